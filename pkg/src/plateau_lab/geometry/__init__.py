"""Geometric core: value types, exact measures, clipping, distances, energy."""

from .core import (
    Ball,
    EmbeddedMesh,
    Gauge,
    IntegrandField,
    LineBoundary,
    as_point,
    integrand_measure,
    mass,
    measure,
    refine,
    simplex_volumes,
    tangent_basis,
    unit_ball_volume,
)
from .clipping import (
    clip_to_ball,
    clipped_measure,
    polygon_disk_area,
    segment_ball_interval,
    sphere_slice_measure,
    triangle_disk_area,
    triangle_sphere_arclength,
)
from .distance import local_hausdorff_distance, point_mesh_distance, sample_mesh
from .energy import circle_samples, douglas_energy

__all__ = [
    "Ball",
    "EmbeddedMesh",
    "Gauge",
    "IntegrandField",
    "LineBoundary",
    "as_point",
    "circle_samples",
    "clip_to_ball",
    "clipped_measure",
    "douglas_energy",
    "integrand_measure",
    "local_hausdorff_distance",
    "mass",
    "measure",
    "point_mesh_distance",
    "polygon_disk_area",
    "refine",
    "sample_mesh",
    "segment_ball_interval",
    "simplex_volumes",
    "sphere_slice_measure",
    "tangent_basis",
    "triangle_disk_area",
    "triangle_sphere_arclength",
    "unit_ball_volume",
]
