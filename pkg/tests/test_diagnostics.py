"""Density profiles, the sliding functional, and the coverage check."""
from __future__ import annotations

import math

import numpy as np
import pytest

from plateau_lab import cones
from plateau_lab import diagnostics as diag
from plateau_lab.geometry.core import EmbeddedMesh, Gauge, LineBoundary

from conftest import square_patch


def polar_annulus(r0: float, r1: float, nr: int = 12, nth: int = 48) -> EmbeddedMesh:
    """Triangulated flat annulus in the z = 0 plane."""
    vs, ts = [], []
    rs = np.linspace(r0, r1, nr + 1)
    for r in rs:
        for k in range(nth):
            a = 2 * math.pi * k / nth
            vs.append((r * math.cos(a), r * math.sin(a), 0.0))
    for i in range(nr):
        for k in range(nth):
            a = i * nth + k
            b = i * nth + (k + 1) % nth
            c = (i + 1) * nth + k
            d = (i + 1) * nth + (k + 1) % nth
            ts.append((a, b, d))
            ts.append((a, d, c))
    return EmbeddedMesh(2, np.array(vs), np.array(ts))


# ── plain profiles ──

def test_plane_profile_is_flat_at_pi():
    plane = cones.plane_cone(extent=6.0)
    prof = diag.density_profile(plane, np.zeros(3), [0.25, 0.5, 1.0, 2.0])
    assert np.allclose(prof["densities"], math.pi, atol=1e-9)
    assert prof["flat"]
    assert prof["spread"] == pytest.approx(0.0, abs=1e-9)


def test_halfplane_interior_profile_decreases_toward_half_disk():
    hp = cones.halfplane_cone(extent=64.0)
    t = 1.0
    x = np.array([t, 0.0, 0.0])
    radii = [t / 4, t / 2, t, 2 * t, 4 * t, 8 * t, 16 * t]
    prof = diag.density_profile(hp, x, radii)
    dens = prof["densities"]
    assert dens[0] == pytest.approx(math.pi, abs=1e-9)   # small balls miss the edge
    # slack 1e-9: the huge sheet corners cost ~1e-12 of clip precision
    assert all(a >= b - 1e-9 for a, b in zip(dens, dens[1:]))
    # half-disk plus a strip of width 2t: pi/2 + 2t/r + O((t/r)^2)
    assert dens[-1] == pytest.approx(math.pi / 2 + 2 / 16, abs=0.02)
    assert not prof["flat"]


def test_gauge_adjustment_only_adds():
    plane = cones.plane_cone(extent=6.0)
    gauge = Gauge(scale=0.2, exponent=0.5, cutoff=4.0)
    prof = diag.density_profile(plane, np.zeros(3), [0.5, 1.0, 2.0], gauge=gauge)
    assert all(a >= d - 1e-12 for a, d in zip(prof["adjusted"], prof["densities"]))
    # the zero gauge changes nothing
    zero = diag.density_profile(plane, np.zeros(3), [0.5, 1.0, 2.0])
    assert np.allclose(zero["adjusted"], zero["densities"], atol=1e-12)


# ── sliding functional ──

def halfplane_context() -> diag.SlidingContext:
    # edge along the y axis, the sheet occupies x >= 0
    return diag.SlidingContext(
        LineBoundary(np.zeros(3), np.array([0.0, 1.0, 0.0])),
        np.array([1.0, 0.0, 0.0]),
    )


def test_sliding_functional_constant_on_halfplane():
    hp = cones.halfplane_cone(extent=64.0)
    t = 1.0
    x = np.array([t, 0.0, 0.0])
    radii = [t / 4, t / 2, t, 2 * t, 4 * t]
    prof = diag.sliding_profile(hp, x, radii, halfplane_context())
    assert np.allclose(prof["shaded_densities"], math.pi, atol=1e-2)


def test_shade_term_is_exactly_zero_inside_the_reach():
    hp = cones.halfplane_cone(extent=64.0)
    t = 1.0
    x = np.array([t, 0.0, 0.0])
    inside = [t / 4, t / 2, 0.999 * t]
    prof = diag.sliding_profile(hp, x, inside, halfplane_context())
    # balls that do not reach the boundary line gain nothing: identical floats
    assert list(prof["shaded_densities"]) == list(prof["densities"])


def test_edge_point_sliding_density_is_half_disk_plus_shade():
    hp = cones.halfplane_cone(extent=8.0)
    x = np.zeros(3)   # on the boundary line itself
    prof = diag.sliding_profile(hp, x, [0.5, 1.0, 2.0], halfplane_context())
    # half-disk (pi/2) plus half-disk of shade = pi, scale free
    assert np.allclose(prof["shaded_densities"], math.pi, atol=1e-9)


# ── coverage / big projection ──

def test_flat_disk_passes_coverage():
    disk = polar_annulus(1e-9, 1.3)
    rep = diag.big_projection_check(disk, np.zeros(3), 1.0)
    assert rep["ok"]
    assert rep["covered_fraction"] == pytest.approx(1.0)
    assert rep["missing_cells"] == 0


def test_center_hole_fails_and_localizes():
    tau = 0.25
    holed = polar_annulus(tau / 2, 1.3)
    rep = diag.big_projection_check(holed, np.zeros(3), 1.0, tau=tau)
    assert not rep["ok"]
    assert rep["missing_cells"] > 0
    holes = np.asarray(rep["holes"])
    # every reported gap sits inside the actual hole (center disk)
    assert (np.linalg.norm(holes[:, :2], axis=1) <= tau / 2 + rep["pitch"]).all()


def test_tilted_disk_still_passes():
    disk = polar_annulus(1e-9, 1.3)
    th = 0.3
    rot = np.array([[1, 0, 0],
                    [0, math.cos(th), -math.sin(th)],
                    [0, math.sin(th), math.cos(th)]])
    rep = diag.big_projection_check(disk.transformed(rotation=rot), np.zeros(3), 1.0)
    assert rep["ok"] and rep["covered_fraction"] == pytest.approx(1.0)


# ── classification, cheap cases only ──

def test_plane_classifies_as_plane():
    plane = cones.plane_cone(extent=1.5)
    rep = diag.classify_point(plane, np.zeros(3), 1.0, rotations=128, depth=1e-2)
    assert rep["best"]["name"] == "plane"
    assert rep["best"]["residual"] <= 0.05


def test_empty_neighborhood_is_unclassified():
    patch = square_patch(side=0.2, z=0.0)
    rep = diag.classify_point(patch, np.array([5.0, 5.0, 0.0]), 1.0,
                              rotations=64, depth=1e-2)
    assert rep["best"] is None or rep["best"]["name"] == "unclassified"
