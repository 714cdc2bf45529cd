"""Catalog cones: exact densities at the apex and slice identities.

Density oracles, all analytic:
  plane      pi                   (full disk)
  halfplane  pi/2
  v          pi                   (two half-disks, any opening)
  y          3*pi/2               (three half-disks)
  t          3*arccos(-1/3)       (six flat wedges, each a sector of the
                                   tetrahedral angle, which is arccos(-1/3))
  line 2, v1 2, y1 3              (counting unit rays)
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from plateau_lab import cones
from plateau_lab.diagnostics import blowup, cone_slice_check, density
from plateau_lab.geometry.core import measure


ANALYTIC = {
    "plane": math.pi,
    "halfplane": math.pi / 2,
    "v": math.pi,
    "y": 3 * math.pi / 2,
    "t": 3 * math.acos(-1.0 / 3.0),
    "line": 2.0,
    "v1": 2.0,
    "y1": 3.0,
}


def test_density_table_matches_analytic_formulas():
    for name, value in ANALYTIC.items():
        assert cones.CONE_DENSITY[name] == pytest.approx(value, abs=1e-12), name


def test_measured_apex_densities_are_exact():
    # every catalog cone is piecewise flat, so the ball clip is exact
    for name in cones.catalog(boundary=True):
        mesh = cones.build_cone(name, extent=1.5)
        got = density(mesh, np.zeros(3), 1.0)
        assert got == pytest.approx(ANALYTIC[name], abs=1e-9), name


@pytest.mark.parametrize("radius", [0.2, 0.5, 0.8, 1.3])
def test_apex_density_is_scale_invariant(radius):
    y = cones.y_cone(extent=1.5)
    assert density(y, np.zeros(3), radius) == pytest.approx(3 * math.pi / 2, abs=1e-9)


def test_v_opening_angle_does_not_change_density():
    for phi in (2 * math.pi / 3, 0.8 * math.pi, math.pi):
        v = cones.v_cone_azimuths(0.0, phi, extent=1.5)
        assert density(v, np.zeros(3), 1.0) == pytest.approx(math.pi, abs=1e-9)


def test_build_cone_dispatch_matches_direct_constructors():
    a = cones.build_cone("y", extent=1.2)
    b = cones.y_cone(extent=1.2)
    assert measure(a) == pytest.approx(measure(b), rel=1e-12)
    assert a.dimension == 2 and cones.CONE_DIMENSION["y"] == 2


def test_catalog_filters():
    assert set(cones.catalog(dimension=1)) == {"line", "v1", "y1"}
    assert "halfplane" not in cones.catalog()
    assert set(cones.BOUNDARY_CONES) <= set(cones.catalog(boundary=True))


@pytest.mark.parametrize("name", ["plane", "y", "t"])
def test_slice_identity_on_generators(name):
    mesh = cones.build_cone(name, extent=1.5)
    rep = cone_slice_check(mesh, np.zeros(3), 1.0, tol=1e-6)
    assert rep["ok"]
    assert rep["residual"] <= 1e-9
    # ball measure = (r/d) * slice measure for a cone with apex at the center
    assert rep["ball_measure"] == pytest.approx(rep["cone_value"], rel=1e-9)


def test_slice_identity_fails_off_center():
    # recentering breaks the cone structure, the identity must notice
    y = cones.y_cone(extent=2.5)
    rep = cone_slice_check(y, np.array([0.3, 0.1, 0.2]), 1.0, tol=1e-6)
    assert rep["residual"] > 1e-3
    assert not rep["ok"]


def test_blowup_of_a_cone_is_measure_preserving():
    # rescaling a cone about its apex reproduces the same density; skip the
    # unit-ball clip so the comparison stays exact
    t = cones.t_cone(extent=1.5)
    for r in (0.5, 0.25):
        zoomed = blowup(t, np.zeros(3), r, clip=False)
        assert density(zoomed, np.zeros(3), 1.0) == pytest.approx(
            ANALYTIC["t"], abs=1e-9)


def test_blowup_straightens_a_smooth_point():
    # zooming into a gentle graph surface approaches the tangent plane density
    from conftest import graph_mesh
    surf = graph_mesh(lambda x, y: 0.05 * math.sin(2 * math.pi * x) * math.sin(2 * math.pi * y),
                      n=48)
    x = np.array([0.5, 0.5, 0.0])   # a saddle of the height function
    vals = [density(blowup(surf, x, r, clip=False), np.zeros(3), 1.0)
            for r in (0.3, 0.15, 0.075)]
    errors = [abs(v - math.pi) for v in vals]
    assert errors[-1] < errors[0]
    assert errors[-1] < 0.05
