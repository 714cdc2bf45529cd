"""Discrete minimizer: face-set semantics, moves, and a brute-force oracle.

The d = 1 oracle enumerates every edge subset of a tiny torus grid, keeps the
ones homologous to the start (difference in the GF(2) span of cell
boundaries), and takes the true minimum measure.  The greedy minimizer has to
land on it.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plateau_lab.grids import CubeFace, FlatManifold
from plateau_lab import minimizer as mz

from conftest import flat_slice_mesh, segment_mesh, wiggle_mesh


def torus_grid(n_sub: int, dim: int = 3):
    t = FlatManifold.torus(dim)
    return t, t.grid(n_sub)


def flat_slice_faces(n_sub: int, level: int):
    """All horizontal 2-faces of the z = level/n plane (canonical lattice)."""
    return frozenset(CubeFace(0b011, (i, j, level))
                     for i in range(n_sub) for j in range(n_sub))


def flat_faceset(n_sub: int = 4, level: int = 2) -> mz.FaceSet:
    t, grid = torus_grid(n_sub)
    return mz.FaceSet(grid, flat_slice_faces(n_sub, level), t)


def cell_boundary(grid, cell: CubeFace, manifold) -> frozenset:
    return frozenset(manifold.canonical_face(f, grid.subdivisions)
                     for f in grid.subfaces(cell))


# ── face-set semantics ──


class TestFaceSet:
    def test_measure_counts_top_faces(self):
        fs = flat_faceset(4)
        assert fs.dimension == 2
        assert len(fs.top_faces()) == 16
        assert fs.measure() == pytest.approx(1.0)

    def test_flat_slice_is_a_relative_cycle(self):
        assert flat_faceset(4).is_relative_cycle()

    def test_punctured_slice_is_not(self):
        fs = flat_faceset(4)
        hole = next(iter(fs.top_faces()))
        punctured = fs.with_faces(frozenset(fs.top_faces()) - {hole})
        assert not punctured.is_relative_cycle()
        assert punctured.odd_ridges()

    def test_core_reduce_drops_lower_skeleton_only(self):
        t, grid = torus_grid(4)
        stray_edge = CubeFace(0b001, (0, 0, 0))
        fs = mz.FaceSet(grid, flat_slice_faces(4, 2) | {stray_edge}, t)
        core = mz.core_reduce(fs)
        assert stray_edge not in core.faces
        assert core.top_faces() == fs.top_faces()
        assert core.measure() == pytest.approx(fs.measure())
        again = mz.core_reduce(core)
        assert again.faces == core.faces

    def test_to_mesh_round_trips_measure(self):
        fs = flat_faceset(4)
        from plateau_lab.geometry.core import measure
        assert measure(fs.to_mesh()) == pytest.approx(fs.measure(), rel=1e-12)


# ── moves ──


class TestMoves:
    def test_flip_toggles_one_cell_boundary(self):
        t, grid = torus_grid(4)
        slice_faces = flat_slice_faces(4, 2)
        cell = CubeFace(0b111, (1, 1, 2))
        pimple = frozenset(slice_faces) ^ cell_boundary(grid, cell, t)
        fs = mz.FaceSet(grid, pimple, t)
        assert fs.measure() == pytest.approx(20 / 16)
        assert fs.is_relative_cycle()

        moves = [m for m in mz.admissible_moves(fs) if m.delta_faces < 0]
        best = min(moves, key=lambda m: m.sort_key())
        assert best.kind == "interior-projection"
        assert best.delta_faces == -4
        after = mz.apply_move(fs, best)
        assert after.faces == frozenset(slice_faces)

    def test_apply_move_is_an_involution_on_faces(self):
        t, grid = torus_grid(4)
        cell = CubeFace(0b111, (0, 0, 2))
        fs = flat_faceset(4)
        toggles = cell_boundary(grid, cell, t)
        move = [m for m in mz.admissible_moves(fs, only_improving=False)
                if frozenset(m.toggles) == toggles]
        assert move, "the single-cell toggle should be admissible"
        once = mz.apply_move(fs, move[0])
        again = [m for m in mz.admissible_moves(once, only_improving=False)
                 if frozenset(m.toggles) == toggles]
        assert again and mz.apply_move(once, again[0]).faces == fs.faces

    def test_move_deltas_are_exact_face_counts(self):
        fs = flat_faceset(4)
        s = fs.grid.spacing
        # the flat slice has no improving move, so inspect the full menu
        for move in mz.admissible_moves(fs, only_improving=False):
            after = mz.apply_move(fs, move)
            assert len(after.top_faces()) - len(fs.top_faces()) == move.delta_faces
            assert after.measure() - fs.measure() == pytest.approx(
                move.delta_faces * s**2, abs=1e-12)

    def test_move_support_sits_in_its_ball(self):
        t, grid = torus_grid(4)
        fs = flat_faceset(4)
        for move in mz.admissible_moves(fs, only_improving=False):
            for face in move.toggles:
                center = grid.face_center(face)
                d = t.quotient_distance(center, move.ball.center)
                assert d <= move.ball.radius + 1e-12

    @given(st.sets(st.tuples(st.integers(0, 3), st.integers(0, 3),
                             st.integers(0, 3)), max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_cell_toggles_preserve_the_cycle_property(self, lattice_points):
        # XOR-ing boundaries of any cell bag keeps the chain closed, so the
        # move generator must always be offered cycle-preserving flips
        t, grid = torus_grid(4)
        faces = frozenset(flat_slice_faces(4, 2))
        for lat in lattice_points:
            faces = faces ^ cell_boundary(grid, CubeFace(0b111, lat), t)
        fs = mz.FaceSet(grid, faces, t)
        assert fs.is_relative_cycle()
        for move in mz.admissible_moves(fs, only_improving=False):
            if move.kind == "interior-projection":
                assert mz.apply_move(fs, move).is_relative_cycle()

    def test_free_collapse_trims_a_whisker(self):
        # a dangling edge on a 2-torus curve: exactly one free ridge
        t2 = FlatManifold.torus(2)
        grid = t2.grid(4)
        loop = frozenset(CubeFace(0b01, (i, 1)) for i in range(4))
        whisker = CubeFace(0b10, (2, 1))
        fs = mz.FaceSet(grid, loop | {whisker}, t2)
        assert not fs.is_relative_cycle()
        collapses = mz.collapse_moves(fs)
        assert any(m.kind == "free-collapse" and whisker in m.toggles
                   for m in collapses)
        result = mz.minimize_faceset(fs)
        assert whisker not in result.faceset.faces
        assert result.faceset.faces == loop


# ── flat fixed point and the pimple ──


def test_flat_slice_is_a_fixed_point():
    result = mz.minimize_faceset(flat_faceset(4))
    assert result.final_measure == pytest.approx(1.0)
    assert result.rounds == 0 or not result.log.entries
    assert result.faceset.faces == flat_faceset(4).faces


def test_pimple_is_flattened_in_one_move():
    t, grid = torus_grid(4)
    cell = CubeFace(0b111, (1, 1, 2))
    faces = frozenset(flat_slice_faces(4, 2)) ^ cell_boundary(grid, cell, t)
    result = mz.minimize_faceset(mz.FaceSet(grid, faces, t))
    assert result.final_measure == pytest.approx(1.0)
    assert len(result.log.entries) == 1
    entry = result.log.entries[0]
    assert entry["kind"] == "interior-projection"


# ── brute-force oracle on the 2-torus, d = 1 ──


def gf2_span_membership(vectors: list[np.ndarray], target: np.ndarray) -> bool:
    """Is target in the GF(2) span of vectors?  Plain Gaussian elimination."""
    rows = [v.copy() for v in vectors]
    t = target.copy()
    pivot_cols = []
    reduced = []
    for row in rows:
        for col_r, r in zip(pivot_cols, reduced):
            if row[col_r]:
                row ^= r
        nz = np.flatnonzero(row)
        if nz.size:
            pivot_cols.append(int(nz[0]))
            reduced.append(row)
    for col_r, r in zip(pivot_cols, reduced):
        if t[col_r]:
            t ^= r
    return not t.any()


def test_greedy_reaches_the_enumerated_optimum():
    t2 = FlatManifold.torus(2)
    n = 2
    grid = t2.grid(n)
    edges = sorted(
        {t2.canonical_face(f, n) for k in (1, 2) for f in grid.faces(1)
         if grid.is_valid(f)},
        key=lambda f: (f.axes, f.lattice),
    )
    index = {f: i for i, f in enumerate(edges)}
    assert len(edges) == 2 * n * n

    def vec(faces) -> np.ndarray:
        v = np.zeros(len(edges), dtype=np.uint8)
        for f in faces:
            v[index[t2.canonical_face(f, n)]] ^= 1
        return v

    boundaries = [vec(grid.subfaces(c)) for c in grid.cells()]

    # a bent loop around axis 0 only: right, up, right (wraps), down
    start = {CubeFace(0b01, (0, 0)), CubeFace(0b10, (1, 0)),
             CubeFace(0b01, (1, 1)), CubeFace(0b10, (2, 0))}
    start = frozenset(t2.canonical_face(f, n) for f in start)
    fs = mz.FaceSet(grid, start, t2)
    assert fs.is_relative_cycle()
    start_vec = vec(start)

    # oracle: scan all 2^8 edge subsets in the same homology class
    best = math.inf
    for bits in itertools.product((0, 1), repeat=len(edges)):
        v = np.array(bits, dtype=np.uint8)
        if not gf2_span_membership(boundaries, v ^ start_vec):
            continue
        subset = frozenset(e for e, b in zip(edges, bits) if b)
        cand = mz.FaceSet(grid, subset, t2)
        if cand.is_relative_cycle():
            best = min(best, cand.measure())
    assert best == pytest.approx(1.0)

    result = mz.minimize_faceset(fs)
    assert result.final_measure == pytest.approx(best)
    audit = mz.quasiminimality_audit(result.faceset, trials=500, seed=1)
    assert audit.improving_trials == 0
    assert audit.worst_ratio <= 1.0 + 1e-12


# ── initialization from meshes ──


def test_on_skeleton_mesh_initializes_by_thresholding():
    t, grid = torus_grid(4)
    report = mz.initialize_from_mesh(flat_slice_mesh(level=0.5, n=8), grid,
                                     manifold=t)
    assert report.source == "threshold"
    assert report.faceset.is_relative_cycle()
    assert report.faceset.measure() == pytest.approx(1.0)
    assert any(e["kind"] == "ff-stage" for e in report.log.entries)


def test_wiggly_mesh_falls_back_to_completion():
    t, grid = torus_grid(8)
    report = mz.initialize_from_mesh(wiggle_mesh(amplitude=0.1, n=16), grid,
                                     manifold=t)
    assert report.faceset.is_relative_cycle()
    # the competitor never exceeds the terraced staircase bound
    assert report.faceset.measure() <= 1.0 + 8 / 8 + 1e-9


def test_wiggle_minimizes_back_to_the_flat_slice():
    t, grid = torus_grid(8)
    report = mz.initialize_from_mesh(wiggle_mesh(amplitude=0.1, n=16), grid,
                                     manifold=t)
    result = mz.minimize_faceset(report.faceset)
    assert result.final_measure == pytest.approx(1.0)
    audit = mz.quasiminimality_audit(result.faceset, trials=1000, seed=3)
    assert audit.improving_trials == 0


def test_audit_flags_the_pimple():
    t, grid = torus_grid(4)
    cell = CubeFace(0b111, (1, 1, 2))
    faces = frozenset(flat_slice_faces(4, 2)) ^ cell_boundary(grid, cell, t)
    audit = mz.quasiminimality_audit(mz.FaceSet(grid, faces, t),
                                     trials=2000, seed=0)
    assert audit.improving_trials > 0
    assert audit.worst_ratio > 1.0
    assert audit.improvable


def test_scheme_levels_do_not_increase():
    scheme = mz.run_scheme(wiggle_mesh(amplitude=0.1, n=16), [4, 8],
                           audit_trials=300, seed=0)
    finals = [lv.result.final_measure for lv in scheme.levels]
    assert finals == sorted(finals, reverse=True)
    for lv in scheme.levels:
        assert lv.audit.improving_trials == 0
    assert scheme.distances, "the level ladder must report gap readings"


def test_one_dimensional_curve_on_the_2_torus():
    t2 = FlatManifold.torus(2)
    grid = t2.grid(8)
    # a seam-periodic zigzag around axis 0
    pts = [(i / 16, 0.25 + 0.05 * math.sin(2 * math.pi * i / 16)) for i in range(17)]
    mesh = segment_mesh(pts)
    report = mz.initialize_from_mesh(mesh, grid, manifold=t2)
    result = mz.minimize_faceset(report.faceset)
    assert result.final_measure == pytest.approx(1.0)
