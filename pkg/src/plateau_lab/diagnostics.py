"""Local density diagnostics: ratios, profiles, projections, classification.

Everything here works on balls around a chosen point.  Densities use the
exact circular clipping, so catalog cones evaluate to their exact constants;
the classifier matches a ball of content against the cone catalog by density
window plus a seeded rotation search refined with a pattern-search descent.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import cones
from .geometry.clipping import DEFAULT_CLIP_TOL, clip_to_ball, clipped_measure, sphere_slice_measure
from .geometry.core import Ball, EmbeddedMesh, Gauge, LineBoundary, as_point
from .geometry.distance import point_mesh_distance, sample_mesh

logger = logging.getLogger(__name__)

#: relative density spread below which a profile counts as flat
FLAT_TOL = 0.05

#: candidate cones must match the measured density within this window
DENSITY_WINDOW = 0.1

#: a classification is accepted below this normalized shape residual
RESIDUAL_OK = 0.05

#: default size of the seeded rotation net
ROTATION_NET = 512


def density(mesh: EmbeddedMesh, center, radius: float) -> float:
    """H^d(mesh cap B(center, radius)) / radius^d, evaluated exactly."""
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    return clipped_measure(mesh, Ball(center, radius)) / radius ** mesh.dimension


def _gauge_adjustment(gauge: Optional[Gauge], radius: float) -> float:
    """exp of the integrated doubling gauge, closed form for h(t) = c t^a."""
    if gauge is None:
        return 1.0
    if radius > gauge.cutoff:
        return math.inf
    a = gauge.exponent
    return math.exp(gauge.scale * (2.0 ** a) * radius ** a / a)


def density_profile(mesh: EmbeddedMesh, center, radii: Sequence[float],
                    gauge: Optional[Gauge] = None, flat_tol: float = FLAT_TOL) -> dict:
    """Density per radius plus trend diagnostics.

    The adjusted column multiplies the density by the integrated gauge
    factor; for (almost) minimizing content it should be nondecreasing in r,
    which is reported, never asserted.  ``low_density`` flags densities below
    the smallest catalog constant for the dimension (minus the flat window),
    a sign that the ball has strayed off the set.
    """
    rs = sorted(float(r) for r in radii)
    if not rs or rs[0] <= 0.0:
        raise ValueError("radii must be positive")
    dens = [density(mesh, center, r) for r in rs]
    adj = [th * _gauge_adjustment(gauge, r) for th, r in zip(dens, rs)]
    mean = sum(dens) / len(dens)
    spread = (max(dens) - min(dens)) / mean if mean > 0 else math.inf
    floor = 2.0 if mesh.dimension == 1 else math.pi
    tol = 1e-9 * max(1.0, max(adj) if all(map(math.isfinite, adj)) else 1.0)
    monotone = all(b >= a - tol for a, b in zip(adj, adj[1:]))
    return {
        "radii": rs,
        "densities": dens,
        "adjusted": adj,
        "flat": spread <= flat_tol,
        "spread": spread,
        "monotone_adjusted": monotone,
        "drift": adj[-1] - adj[0] if all(map(math.isfinite, adj)) else math.inf,
        "low_density": min(dens) < floor - flat_tol,
    }


@dataclass(frozen=True)
class SlidingContext:
    """A sliding boundary line plus the inward shade direction.

    ``shade`` spans, together with the line direction, the half-plane region
    behind the boundary that sliding competitors may occupy; profiles add its
    ball measure so that half-plane and open-book configurations compare
    against the unconstrained plane and triple-junction constants.
    """

    line: LineBoundary
    shade: np.ndarray

    def __post_init__(self):
        s = as_point(self.shade)
        n = float(np.linalg.norm(s))
        if n <= 0:
            raise ValueError("shade direction must be nonzero")
        s = s / n
        if abs(float(s @ self.line.direction)) > 1e-9:
            raise ValueError("shade direction must be orthogonal to the boundary line")
        s.flags.writeable = False
        object.__setattr__(self, "shade", s)

    def shade_mesh(self, center, extent: float) -> EmbeddedMesh:
        """The shade half-plane behind the line, truncated beyond the ball."""
        foot = self.line.foot(center)
        u = self.line.direction
        w = self.shade
        R = 2.0 * extent
        p0 = foot - R * u
        p1 = foot + R * u
        return EmbeddedMesh.from_triangles([
            [p0, p1, p1 - R * w],
            [p0, p1 - R * w, p0 - R * w],
        ])


def sliding_profile(mesh: EmbeddedMesh, center, radii: Sequence[float],
                    context: SlidingContext, gauge: Optional[Gauge] = None,
                    flat_tol: float = FLAT_TOL) -> dict:
    """Density profile with the boundary shade added to every ball."""
    rs = sorted(float(r) for r in radii)
    if not rs or rs[0] <= 0.0:
        raise ValueError("radii must be positive")
    shade = context.shade_mesh(center, rs[-1])
    out = {"radii": rs, "densities": [], "shaded_densities": [], "adjusted": []}
    for r in rs:
        th = density(mesh, center, r)
        ts = th + density(shade, center, r)
        out["densities"].append(th)
        out["shaded_densities"].append(ts)
        out["adjusted"].append(ts * _gauge_adjustment(gauge, r))
    adj = out["adjusted"]
    tol = 1e-9 * max(1.0, max(adj) if all(map(math.isfinite, adj)) else 1.0)
    out["monotone_adjusted"] = all(b >= a - tol for a, b in zip(adj, adj[1:]))
    mean = sum(out["shaded_densities"]) / len(rs)
    spread = (max(out["shaded_densities"]) - min(out["shaded_densities"])) / mean if mean > 0 else math.inf
    out["flat"] = spread <= flat_tol
    out["spread"] = spread
    return out


def cone_slice_check(mesh: EmbeddedMesh, center, radius: float,
                     tol: float = 1e-9) -> dict:
    """Exact cone compatibility at one radius.

    A cone with apex at the center satisfies H^d(E cap B_r) = (r/d) *
    H^(d-1)(E cap sphere_r) exactly; the relative residual of that identity
    is the conicity defect of the ball.
    """
    ball = Ball(center, radius)
    lhs = clipped_measure(mesh, ball)
    slice_md = sphere_slice_measure(mesh, ball)
    rhs = (radius / mesh.dimension) * slice_md
    scale = max(lhs, rhs, 1e-300)
    residual = abs(lhs - rhs) / scale
    return {"ball_measure": lhs, "slice_measure": slice_md,
            "cone_value": rhs, "residual": residual, "ok": residual <= tol}


def blowup(mesh: EmbeddedMesh, center, radius: float, clip: bool = True,
           tol: float = DEFAULT_CLIP_TOL) -> EmbeddedMesh:
    """(E - center)/radius, optionally clipped to the unit ball."""
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    c = as_point(center)
    scaled = mesh.transformed(scale=1.0 / radius, translation=-c / radius)
    if not clip:
        return scaled
    return clip_to_ball(scaled, Ball(np.zeros(mesh.ambient_dim), 1.0), tol=tol)


def big_projection_check(mesh: EmbeddedMesh, center, radius: float,
                         tau: float = 0.25, direction=None,
                         spacing: Optional[float] = None) -> dict:
    """Does the shadow of E cap B(x, r) cover a coaxial disk of radius (1-tau) r?

    The content is sampled inside the ball, projected along ``direction``
    (smallest principal direction of the samples when omitted), and binned on
    a raster of pitch tau*r/8.  Every raster cell whose center lies within
    (1-tau) r must catch a sample; uncovered cells are reported with their
    world positions, localizing any hole to raster resolution.
    """
    if not (0.0 < tau < 1.0):
        raise ValueError("tau must be in (0, 1)")
    c = as_point(center)
    d = mesh.dimension
    r = float(radius)
    pitch = tau * r / 8.0
    step = spacing if spacing is not None else pitch / 2.0
    pts = sample_mesh(mesh, step, Ball(c, r))
    if pts.shape[0] == 0:
        return {"ok": False, "reason": "no content inside the ball",
                "covered_fraction": 0.0, "holes": []}
    rel = pts - c[None, :]
    if direction is not None:
        axis = as_point(direction)
        axis = axis / np.linalg.norm(axis)
        basis = _complete_basis(axis)[:, :d] if d == 2 else axis[:, None]
        if d == 1:
            basis = axis[:, None]
    else:
        _, _, vt = np.linalg.svd(rel - rel.mean(axis=0), full_matrices=False)
        basis = vt[:d].T          # leading principal directions
    coords = rel @ basis          # (M, d) shadow coordinates
    m = int(math.ceil(2.0 * r / pitch))
    idx = np.floor((coords + r) / pitch).astype(int)
    idx = np.clip(idx, 0, m - 1)
    covered = np.zeros((m,) * d, dtype=bool)
    covered[tuple(idx.T)] = True
    centers_1d = -r + (np.arange(m) + 0.5) * pitch
    if d == 1:
        cell_centers = centers_1d[:, None]
    else:
        gx, gy = np.meshgrid(centers_1d, centers_1d, indexing="ij")
        cell_centers = np.stack([gx.ravel(), gy.ravel()], axis=1)
    within = np.linalg.norm(cell_centers, axis=1) <= (1.0 - tau) * r
    flat_cov = covered.ravel()
    required = int(within.sum())
    missing = np.nonzero(within & ~flat_cov)[0]
    holes = []
    for i in missing[:64]:
        world = c + basis @ cell_centers[i]
        holes.append([float(x) for x in world])
    frac = 1.0 - len(missing) / required if required else 0.0
    return {"ok": len(missing) == 0 and required > 0,
            "covered_fraction": frac,
            "required_cells": required, "missing_cells": int(len(missing)),
            "pitch": pitch, "holes": holes,
            "axis": [float(x) for x in (basis[:, -1] if d == 2 else basis[:, 0])]}


# ---------------------------------------------------------------------------
# rotation search machinery
# ---------------------------------------------------------------------------

def _complete_basis(axis: np.ndarray) -> np.ndarray:
    """Orthonormal frame whose last column is the given unit axis."""
    n = axis.size
    M = np.eye(n)
    k = int(np.argmax(np.abs(axis)))
    M[:, [k, n - 1]] = M[:, [n - 1, k]]
    M[:, n - 1] = axis
    q, _ = np.linalg.qr(M)
    # force the last column to the exact axis and fix orientation
    q[:, n - 1] = axis
    for j in range(n - 1):
        q[:, j] -= (q[:, j] @ axis) * axis
        q[:, j] /= np.linalg.norm(q[:, j])
    return q


def _rotation_from_quaternion(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def _axis_angle(w: np.ndarray) -> np.ndarray:
    theta = float(np.linalg.norm(w))
    if theta < 1e-300:
        return np.eye(3)
    k = w / theta
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(theta) * K + (1 - math.cos(theta)) * (K @ K)


def _rotation_net(seed: int, count: int, n: int) -> list:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    out = [np.eye(n)]
    if n == 2:
        for a in rng.uniform(0.0, 2.0 * math.pi, size=count):
            ca, sa = math.cos(a), math.sin(a)
            out.append(np.array([[ca, -sa], [sa, ca]]))
    else:
        qs = rng.normal(size=(count, 4))
        for q in qs:
            out.append(_rotation_from_quaternion(q))
    return out


class _ResidualEvaluator:
    """Two-sided normalized sup distance between E cap B and a posed cone."""

    def __init__(self, mesh: EmbeddedMesh, center: np.ndarray, radius: float,
                 cone_mesh: EmbeddedMesh, e_spacing: float, cone_spacing: float):
        self.mesh = mesh
        self.center = center
        self.radius = radius
        self.cone = cone_mesh
        self.e_samples = sample_mesh(mesh, e_spacing, Ball(center, radius))
        self.e_coarse = self.e_samples[::4] if self.e_samples.shape[0] > 256 else self.e_samples
        self.cone_samples = sample_mesh(cone_mesh, cone_spacing,
                                        Ball(np.zeros(mesh.ambient_dim), radius))

    def one_sided(self, rot: np.ndarray, coarse: bool = False) -> float:
        """sup dist(E-samples -> cone) / r in the cone frame."""
        samples = self.e_coarse if coarse else self.e_samples
        if samples.shape[0] == 0:
            return math.inf
        local = (samples - self.center) @ rot
        return float(point_mesh_distance(local, self.cone).max()) / self.radius

    def two_sided(self, rot: np.ndarray) -> float:
        a = self.one_sided(rot)
        if self.cone_samples.shape[0] == 0:
            return a
        world = self.cone_samples @ rot.T + self.center
        b = float(point_mesh_distance(world, self.mesh).max()) / self.radius
        return max(a, b)


def _pattern_descent(fun, x0: np.ndarray, f0: float, step: float,
                     depth: float, max_iter: Optional[int] = None):
    """Coordinate pattern search: probe +-step per axis, shrink on failure."""
    x, fx = np.array(x0, dtype=float), f0
    if max_iter is None:
        # enough probes to halve the step from its start down to the depth
        max_iter = 24 * max(4, int(math.log2(max(step / max(depth, 1e-12), 2.0))) + 2)
    it = 0
    while step > depth and it < max_iter:
        improved = False
        for j in range(x.size):
            for sgn in (1.0, -1.0):
                y = x.copy()
                y[j] += sgn * step
                fy = fun(y)
                it += 1
                if fy < fx - 1e-15:
                    x, fx = y, fy
                    improved = True
                    break
            if improved:
                break
        if not improved:
            step *= 0.5
    return x, fx


@dataclass
class ConeFit:
    name: str
    residual: float
    rotation: np.ndarray
    params: dict


def _fit_interior(mesh: EmbeddedMesh, center: np.ndarray, radius: float,
                  name: str, seed: int, rotations: int, depth: float,
                  e_spacing: float, cone_spacing: float) -> ConeFit:
    cone_mesh = cones.build_cone(name, extent=1.02 * radius, ambient=mesh.ambient_dim)
    ev = _ResidualEvaluator(mesh, center, radius, cone_mesh, e_spacing, cone_spacing)
    net = _rotation_net(seed, rotations, mesh.ambient_dim)
    ranked = sorted(range(len(net)), key=lambda i: ev.one_sided(net[i], coarse=True))
    best_rot, best_val = None, math.inf
    for i in ranked[:2]:
        base = net[i]
        if mesh.ambient_dim == 2:
            fun = lambda w: ev.two_sided(base @ np.array(
                [[math.cos(w[0]), -math.sin(w[0])], [math.sin(w[0]), math.cos(w[0])]]))
            w, val = _pattern_descent(fun, np.zeros(1), ev.two_sided(base), 0.2, depth)
            rot = base @ np.array([[math.cos(w[0]), -math.sin(w[0])],
                                   [math.sin(w[0]), math.cos(w[0])]])
        else:
            fun = lambda w: ev.two_sided(base @ _axis_angle(w))
            w, val = _pattern_descent(fun, np.zeros(3), ev.two_sided(base), 0.2, depth)
            rot = base @ _axis_angle(w)
        if val < best_val:
            best_rot, best_val = rot, val
    return ConeFit(name, best_val, best_rot, {})


def _fit_boundary(mesh: EmbeddedMesh, center: np.ndarray, radius: float,
                  name: str, context: SlidingContext, depth: float,
                  e_spacing: float, cone_spacing: float) -> ConeFit:
    frame = _complete_basis(context.line.direction)

    def make(phis):
        if name == "halfplane":
            return cones.halfplane_azimuth_cone(phis[0], extent=1.02 * radius)
        return cones.v_cone_azimuths(phis[0], phis[1], extent=1.02 * radius)

    k = 1 if name == "halfplane" else 2
    grid = np.linspace(0.0, 2.0 * math.pi, 25 if k == 2 else 64, endpoint=False)

    def residual(phis):
        cone_mesh = make(phis)
        ev = _ResidualEvaluator(mesh, center, radius, cone_mesh, e_spacing, cone_spacing)
        return ev.two_sided(frame)

    best_p, best_val = None, math.inf
    if k == 1:
        for p in grid:
            v = residual([p])
            if v < best_val:
                best_p, best_val = np.array([p]), v
    else:
        for i, p1 in enumerate(grid):
            for p2 in grid[i + 1:]:
                v = residual([p1, p2])
                if v < best_val:
                    best_p, best_val = np.array([p1, p2]), v
    best_p, best_val = _pattern_descent(residual, best_p, best_val, 0.2, depth)
    params = {"azimuths": [float(x) for x in best_p]}
    if k == 2:
        delta = abs(best_p[1] - best_p[0]) % (2.0 * math.pi)
        params["dihedral"] = min(delta, 2.0 * math.pi - delta)
    return ConeFit(name, best_val, frame, params)


def classify_point(mesh: EmbeddedMesh, center, radius: float, *,
                   context: Optional[SlidingContext] = None, seed: int = 0,
                   rotations: int = ROTATION_NET, depth: float = 1e-4,
                   window: float = DENSITY_WINDOW, flat_tol: float = FLAT_TOL,
                   residual_ok: float = RESIDUAL_OK,
                   e_spacing: Optional[float] = None,
                   cone_spacing: Optional[float] = None) -> dict:
    """Match the ball around a point against the cone catalog.

    Steps: measure the density, prescreen the profile for scale-invariance,
    shortlist catalog cones within the density window, then fit each
    candidate by seeded rotation net plus pattern descent (interior points)
    or by azimuth search around the boundary line (sliding points).  The
    report carries every stage; ``ok`` requires a flat profile and a
    candidate residual at most ``residual_ok``.
    """
    c = as_point(center)
    r = float(radius)
    d = mesh.dimension
    profile = density_profile(mesh, c, [0.25 * r, 0.5 * r, 0.75 * r, r], flat_tol=flat_tol)
    theta = profile["densities"][-1]
    report = {"density": theta, "profile": profile, "context": context is not None}
    if not profile["flat"]:
        report.update(best=None, candidates=[], ok=False,
                      reason="density is not scale-invariant across the probe radii")
        return report
    names = cones.catalog(d, boundary=context is not None)
    cands = [nm for nm in names if abs(cones.CONE_DENSITY[nm] - theta) <= window]
    if context is not None:
        # an on-boundary point cannot be an unconstrained interior shape of
        # the same density: prefer the sliding candidates when both match
        sliding = [nm for nm in cands if nm in cones.BOUNDARY_CONES]
        if sliding:
            cands = sliding
    report["candidates"] = cands
    if not cands:
        report.update(best=None, ok=False,
                      reason="density matches no catalog constant within the window")
        return report
    e_sp = e_spacing if e_spacing is not None else r / 64.0
    c_sp = cone_spacing if cone_spacing is not None else r / 24.0
    fits = []
    for nm in cands:
        if context is not None and nm in cones.BOUNDARY_CONES:
            fits.append(_fit_boundary(mesh, c, r, nm, context, depth, e_sp, c_sp))
        else:
            fits.append(_fit_interior(mesh, c, r, nm, seed, rotations, depth, e_sp, c_sp))
    fits.sort(key=lambda f: f.residual)
    best = fits[0]
    report["fits"] = [{"name": f.name, "residual": f.residual, **f.params} for f in fits]
    report["best"] = {"name": best.name, "residual": best.residual,
                      "rotation": best.rotation.tolist(), **best.params}
    report["ok"] = best.residual <= residual_ok
    return report
