"""Reference cone catalog: minimal tangent-cone shapes and their densities.

Every builder returns an ``EmbeddedMesh`` whose apex sits at the origin and
whose flat pieces are truncated far enough out that intersecting with any
ball of radius up to ``extent`` is exact: the ball-measure then equals
``theta * r**d`` with the cataloged constant ``theta``, to machine precision,
via the exact circular clipping in :mod:`plateau_lab.geometry`.

Cataloged constants (measure of the unit-ball slice):

==========  ===  =======================================
name        dim  theta
==========  ===  =======================================
line         1   2
v1(beta)     1   2            (any opening angle)
y1           1   3
plane        2   pi
halfplane    2   pi/2
v(beta)      2   pi           (any dihedral angle)
y            2   3*pi/2
t            2   3*arccos(-1/3)
==========  ===  =======================================
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .geometry.core import EmbeddedMesh

#: content of the unit-ball slice for each catalog entry
CONE_DENSITY = {
    "line": 2.0,
    "v1": 2.0,
    "y1": 3.0,
    "plane": math.pi,
    "halfplane": math.pi / 2.0,
    "v": math.pi,
    "y": 1.5 * math.pi,
    "t": 3.0 * math.acos(-1.0 / 3.0),
}

CONE_DIMENSION = {
    "line": 1, "v1": 1, "y1": 1,
    "plane": 2, "halfplane": 2, "v": 2, "y": 2, "t": 2,
}

#: cones that can only occur against a sliding boundary line
BOUNDARY_CONES = ("halfplane", "v")

#: unit directions toward the corners of the regular tetrahedron
TETRA_DIRECTIONS = np.array([
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
]) / math.sqrt(3.0)


def _pad(vec: Sequence[float], ambient: int) -> np.ndarray:
    v = np.zeros(ambient)
    a = np.asarray(vec, dtype=float)
    v[: a.size] = a
    return v


def line_cone(extent: float = 1.0, ambient: int = 2,
              direction: Optional[Sequence[float]] = None) -> EmbeddedMesh:
    """A straight line through the origin, as two apex rays."""
    u = _pad(direction if direction is not None else [1.0] + [0.0] * (ambient - 1), ambient)
    u = u / np.linalg.norm(u)
    o = np.zeros(ambient)
    return EmbeddedMesh.from_segments([[o, extent * u], [o, -extent * u]])


def v1_cone(beta: float, extent: float = 1.0, ambient: int = 2) -> EmbeddedMesh:
    """Two rays from the origin with opening angle beta in the xy-plane."""
    if not (0.0 < beta < math.pi):
        raise ValueError("opening angle must be in (0, pi)")
    o = np.zeros(ambient)
    u1 = _pad([1.0, 0.0], ambient)
    u2 = _pad([math.cos(beta), math.sin(beta)], ambient)
    return EmbeddedMesh.from_segments([[o, extent * u1], [o, extent * u2]])


def y1_cone(extent: float = 1.0, ambient: int = 2) -> EmbeddedMesh:
    """Three rays at mutual 120 degrees in the xy-plane."""
    o = np.zeros(ambient)
    segs = []
    for k in range(3):
        a = 2.0 * math.pi * k / 3.0
        segs.append([o, extent * _pad([math.cos(a), math.sin(a)], ambient)])
    return EmbeddedMesh.from_segments(segs)


def plane_cone(extent: float = 1.0) -> EmbeddedMesh:
    """The xy-plane through the origin as a two-triangle square in 3-space."""
    R = extent
    p = [[-R, -R, 0.0], [R, -R, 0.0], [R, R, 0.0], [-R, R, 0.0]]
    return EmbeddedMesh.from_triangles([[p[0], p[1], p[2]], [p[0], p[2], p[3]]])


def halfplane_cone(extent: float = 1.0) -> EmbeddedMesh:
    """The half-plane x >= 0 of the xy-plane; its edge is the y-axis."""
    R = extent
    p = [[0.0, -R, 0.0], [R, -R, 0.0], [R, R, 0.0], [0.0, R, 0.0]]
    return EmbeddedMesh.from_triangles([[p[0], p[1], p[2]], [p[0], p[2], p[3]]])


def _halfplane_sheet(phi: float, extent: float) -> list:
    """Two triangles for the half-plane around the z-axis at azimuth phi."""
    R = extent
    u = [math.cos(phi), math.sin(phi)]
    p = [[0.0, 0.0, -R], [R * u[0], R * u[1], -R], [R * u[0], R * u[1], R], [0.0, 0.0, R]]
    return [[p[0], p[1], p[2]], [p[0], p[2], p[3]]]


def v_cone(beta: float, extent: float = 1.0) -> EmbeddedMesh:
    """Two half-planes sharing the z-axis with dihedral angle beta."""
    if not (0.0 < beta < 2.0 * math.pi):
        raise ValueError("dihedral angle must be in (0, 2*pi)")
    tris = _halfplane_sheet(0.0, extent) + _halfplane_sheet(beta, extent)
    return EmbeddedMesh.from_triangles(tris)


def v_cone_azimuths(phi1: float, phi2: float, extent: float = 1.0) -> EmbeddedMesh:
    """Two half-planes sharing the z-axis at explicit azimuths."""
    tris = _halfplane_sheet(phi1, extent) + _halfplane_sheet(phi2, extent)
    return EmbeddedMesh.from_triangles(tris)


def halfplane_azimuth_cone(phi: float, extent: float = 1.0) -> EmbeddedMesh:
    """One half-plane hinged on the z-axis at the given azimuth."""
    return EmbeddedMesh.from_triangles(_halfplane_sheet(phi, extent))


def y_cone(extent: float = 1.0) -> EmbeddedMesh:
    """Three half-planes sharing the z-axis at mutual 120 degree dihedrals."""
    tris = []
    for k in range(3):
        tris.extend(_halfplane_sheet(2.0 * math.pi * k / 3.0, extent))
    return EmbeddedMesh.from_triangles(tris)


def t_cone(extent: float = 1.0) -> EmbeddedMesh:
    """The cone over the edge graph of a regular tetrahedron.

    Six flat wedges, one for each pair of tetrahedron directions; each wedge
    is truncated as the triangle hull(0, c*u, c*v) with c = sqrt(3)*extent so
    that the chord stays outside the ball of radius ``extent`` (the wedge
    opening is arccos(-1/3), whose half-angle cosine is 1/sqrt(3)).
    """
    c = math.sqrt(3.0) * extent
    o = np.zeros(3)
    tris = []
    for i in range(4):
        for j in range(i + 1, 4):
            tris.append([o, c * TETRA_DIRECTIONS[i], c * TETRA_DIRECTIONS[j]])
    return EmbeddedMesh.from_triangles(tris)


_BUILDERS = {
    "line": lambda extent, ambient=3: line_cone(extent, ambient),
    "v1": lambda extent, ambient=3, beta=math.pi / 2: v1_cone(beta, extent, ambient),
    "y1": lambda extent, ambient=3: y1_cone(extent, ambient),
    "plane": lambda extent, ambient=3: plane_cone(extent),
    "halfplane": lambda extent, ambient=3: halfplane_cone(extent),
    "v": lambda extent, ambient=3, beta=math.pi / 2: v_cone(beta, extent),
    "y": lambda extent, ambient=3: y_cone(extent),
    "t": lambda extent, ambient=3: t_cone(extent),
}


def build_cone(name: str, extent: float = 1.0, ambient: int = 3, **params) -> EmbeddedMesh:
    """Build a catalog cone by name (see module docstring for the names)."""
    if name not in _BUILDERS:
        raise ValueError(f"unknown cone {name!r}; catalog: {sorted(_BUILDERS)}")
    return _BUILDERS[name](extent, ambient=ambient, **params)


def catalog(dimension: Optional[int] = None, boundary: bool = False) -> list:
    """Catalog names, optionally filtered by content dimension and context.

    Interior points can only see the unconstrained cones; ``boundary`` adds
    the sliding shapes (half-plane and open book) that require an edge line.
    """
    names = []
    for name, d in CONE_DIMENSION.items():
        if dimension is not None and d != dimension:
            continue
        if name in BOUNDARY_CONES and not boundary:
            continue
        names.append(name)
    return sorted(names)
