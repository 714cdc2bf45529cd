"""Discrete area minimization over grid facesets.

State is a set of grid faces of dimensions up to d = n-1; only the d-faces
carry measure.  Read as a mod-2 chain, a tidy competitor has even ridge
incidence away from the frozen grid boundary (or everywhere, on a periodic
grid).  Three deformation moves drive the descent, each realizable as a
Lipschitz deformation supported in the ball it reports:

* free-collapse — remove a d-face with a free ridge (whisker trimming;
  retract from the free side),
* interior-projection / flip — toggle the faceset by the boundary of one
  cell (push the membrane across the cube by a central projection; adding
  a mod-2 boundary, so cycles stay cycles),
* interior-projection / shift — toggle by the boundary of a one-level slab
  of cells over a maximal coplanar component (moves a whole terrace at
  once; single-cell moves stall on staircase plateaus).

Every move changes the measure by an exact integer multiple of s^d.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .geometry.core import Ball, EmbeddedMesh
from .grids import CubeFace, DyadicGrid, FlatManifold
from .projection import ProjectionResult, project_to_skeleton

logger = logging.getLogger(__name__)

#: default audit ball radius, in cell sides
AUDIT_RADIUS_CELLS = 2.0


@dataclass(frozen=True)
class FaceSet:
    """Grid faces of dimensions <= d; only d-faces carry measure."""

    grid: DyadicGrid
    faces: frozenset
    manifold: Optional[FlatManifold] = None

    def __post_init__(self):
        d = self.dimension
        for f in self.faces:
            if f.dim > d:
                raise ValueError("faceset faces must have dimension at most n-1")
            if not self.grid.is_valid(f):
                raise ValueError(f"face {f} is not a face of the grid")
        if self.manifold is not None:
            N = self.grid.subdivisions
            for f in self.faces:
                if self.manifold.canonical_face(f, N) != f:
                    raise ValueError("faces must be canonical on periodic axes")

    @property
    def dimension(self) -> int:
        return self.grid.ambient_dim - 1

    def top_faces(self) -> frozenset:
        d = self.dimension
        return frozenset(f for f in self.faces if f.dim == d)

    def measure(self) -> float:
        return len(self.top_faces()) * self.grid.spacing ** self.dimension

    def canonical(self, face: CubeFace) -> CubeFace:
        if self.manifold is None:
            return face
        return self.manifold.canonical_face(face, self.grid.subdivisions)

    # -- chain structure -------------------------------------------------------

    def ridge_incidence(self) -> dict:
        """Canonical (d-1)-faces -> number of incident d-faces of the set."""
        inc: dict[CubeFace, int] = {}
        for f in self.top_faces():
            for r in self.grid.subfaces(f):
                r = self.canonical(r)
                inc[r] = inc.get(r, 0) + 1
        return inc

    def odd_ridges(self) -> set:
        return {r for r, k in self.ridge_incidence().items() if k % 2 == 1}

    def is_relative_cycle(self) -> bool:
        """Even incidence at every ridge off the frozen grid boundary."""
        if self.manifold is not None:
            return not self.odd_ridges()
        return all(self.grid.on_boundary(r) for r in self.odd_ridges())

    def to_mesh(self) -> EmbeddedMesh:
        chunks = []
        for f in sorted(self.top_faces()):
            chunks.extend(self.grid.face_mesh_chunk(f))
        if not chunks:
            return EmbeddedMesh.empty(self.dimension, self.grid.ambient_dim)
        return EmbeddedMesh.from_simplex_list(self.dimension, chunks)

    def with_faces(self, faces: Iterable[CubeFace]) -> "FaceSet":
        return FaceSet(self.grid, frozenset(faces), self.manifold)

    def sorted_keys(self) -> list:
        return [[f.axes, list(f.lattice)] for f in sorted(self.faces)]


def core_reduce(fs: FaceSet) -> FaceSet:
    """Keep exactly the d-faces; measure is unchanged, and it is idempotent."""
    return fs.with_faces(fs.top_faces())


# ---------------------------------------------------------------------------
# moves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Move:
    kind: str                 # "free-collapse" or "interior-projection"
    variant: str              # "collapse", "flip" or "shift"
    toggles: frozenset        # d-faces whose membership flips
    delta_faces: int          # |after| - |before| over d-faces
    anchor: tuple             # deterministic sort key payload
    ball: Ball                # support of the realizing deformation

    def delta(self, grid: DyadicGrid) -> float:
        return self.delta_faces * grid.spacing ** (grid.ambient_dim - 1)

    def sort_key(self):
        return (self.delta_faces, self.kind, self.variant, self.anchor)


def _support_ball(grid: DyadicGrid, faces: Iterable[CubeFace]) -> Ball:
    lows, highs = zip(*(grid.face_bounds(f) for f in faces))
    lo = np.minimum.reduce(lows)
    hi = np.maximum.reduce(highs)
    center = (lo + hi) / 2.0
    return Ball(center, float(np.linalg.norm(hi - center)) + 1e-12)


def _cell_facets(grid: DyadicGrid, cell: CubeFace) -> list:
    """The 2n boundary facets of a top cell."""
    n = grid.ambient_dim
    out = []
    for a in range(n):
        for side in (0, 1):
            lat = list(cell.lattice)
            lat[a] = cell.lattice[a] + side
            out.append(CubeFace(grid.full_mask & ~(1 << a), tuple(lat)))
    return out


def _boundary_toggle(fs: FaceSet, facets: Iterable[CubeFace]):
    """Count the membership flips from toggling the given facet collection."""
    counts: dict[CubeFace, int] = {}
    for f in facets:
        f = fs.canonical(f)
        counts[f] = counts.get(f, 0) + 1
    toggles = frozenset(f for f, k in counts.items() if k % 2 == 1)
    delta = sum(-1 if f in fs.faces else 1 for f in toggles)
    return toggles, delta


def _touches_frozen(fs: FaceSet, toggles: frozenset) -> bool:
    if fs.manifold is not None:
        return False
    return any(fs.grid.on_boundary(f) for f in toggles)


def _cells_touching(fs: FaceSet, face: CubeFace) -> list:
    """Both cells whose closure holds the facet, wrapping identified axes."""
    grid = fs.grid
    N = grid.subdivisions
    a = next(ax for ax in range(grid.ambient_dim) if not face.spans(ax))
    wrap = fs.manifold is not None and fs.manifold.identified[a]
    out = []
    for c in (face.lattice[a] - 1, face.lattice[a]):
        if wrap:
            c %= N
        elif not 0 <= c <= N - 1:
            continue
        lat = list(face.lattice)
        lat[a] = c
        out.append(CubeFace(grid.full_mask, tuple(lat)))
    return out


def collapse_moves(fs: FaceSet) -> list:
    """One move per d-face holding a free ridge off the allowed boundary."""
    inc = fs.ridge_incidence()
    owner: dict[CubeFace, CubeFace] = {}
    for f in fs.top_faces():
        for r in fs.grid.subfaces(f):
            owner[fs.canonical(r)] = f
    moves = []
    seen = set()
    for r, k in inc.items():
        if k != 1:
            continue
        if fs.manifold is None and fs.grid.on_boundary(r):
            continue
        f = owner[r]
        if f in seen:
            continue
        seen.add(f)
        moves.append(Move("free-collapse", "collapse", frozenset([f]), -1,
                          (f.axes,) + f.lattice, _support_ball(fs.grid, [f])))
    return moves


def flip_moves(fs: FaceSet, only_improving: bool = True) -> list:
    """Toggle by one cell boundary; improving needs > n present facets."""
    grid = fs.grid
    cells = set()
    for f in fs.top_faces():
        for c in _cells_touching(fs, f):
            cells.add(c)
    moves = []
    for cell in sorted(cells):
        toggles, delta = _boundary_toggle(fs, _cell_facets(grid, cell))
        if only_improving and delta >= 0:
            continue
        if not toggles or _touches_frozen(fs, toggles):
            continue
        moves.append(Move("interior-projection", "flip", toggles, delta,
                          (cell.axes,) + cell.lattice, _support_ball(grid, [cell])))
    return moves


def _coplanar_components(fs: FaceSet) -> list:
    """Maximal ridge-connected components of d-faces sharing a pinned plane."""
    grid = fs.grid
    n = grid.ambient_dim
    groups: dict[tuple, list] = {}
    for f in fs.top_faces():
        a = next(ax for ax in range(n) if not f.spans(ax))
        groups.setdefault((a, f.lattice[a]), []).append(f)
    comps = []
    for (a, p), members in sorted(groups.items()):
        ridge_map: dict[CubeFace, list] = {}
        for f in members:
            for r in grid.subfaces(f):
                ridge_map.setdefault(fs.canonical(r), []).append(f)
        adjacency: dict[CubeFace, set] = {f: set() for f in members}
        for flist in ridge_map.values():
            for x in flist:
                adjacency[x].update(y for y in flist if y != x)
        todo = set(members)
        while todo:
            seed = min(todo)
            comp = {seed}
            todo.discard(seed)
            frontier = [seed]
            while frontier:
                cur = frontier.pop()
                for nb in adjacency[cur]:
                    if nb in todo:
                        todo.discard(nb)
                        comp.add(nb)
                        frontier.append(nb)
            comps.append((a, p, frozenset(comp)))
    return comps


def _slab_cells(grid: DyadicGrid, axis: int, plane: int, direction: int,
                component: frozenset, manifold: Optional[FlatManifold]):
    """Cells of the one-level prism on the chosen side of the component."""
    N = grid.subdivisions
    level = plane if direction > 0 else plane - 1
    if manifold is not None and manifold.identified[axis]:
        level %= N
    elif not 0 <= level <= N - 1:
        return None
    cells = []
    for f in component:
        lat = list(f.lattice)
        lat[axis] = level
        cells.append(CubeFace(grid.full_mask, tuple(lat)))
    return cells


def shift_moves(fs: FaceSet, only_improving: bool = True) -> list:
    """Toggle by the boundary of a component's one-level prism of cells."""
    grid = fs.grid
    moves = []
    for a, p, comp in _coplanar_components(fs):
        for direction in (-1, 1):
            cells = _slab_cells(grid, a, p, direction, comp, fs.manifold)
            if cells is None:
                continue
            facets = []
            for cell in cells:
                facets.extend(_cell_facets(grid, cell))
            toggles, delta = _boundary_toggle(fs, facets)
            if only_improving and delta >= 0:
                continue
            if not toggles or _touches_frozen(fs, toggles):
                continue
            anchor = (a, p, direction, len(comp)) + tuple(sorted(comp))[0].lattice
            moves.append(Move("interior-projection", "shift", toggles, delta,
                              anchor, _support_ball(grid, cells)))
    return moves


def admissible_moves(fs: FaceSet, only_improving: bool = True) -> list:
    """Every legal move of the three kinds, deterministically ordered."""
    moves = collapse_moves(fs) + flip_moves(fs, only_improving) + shift_moves(fs, only_improving)
    if only_improving:
        moves = [m for m in moves if m.delta_faces < 0]
    return sorted(moves, key=Move.sort_key)


def apply_move(fs: FaceSet, move: Move) -> FaceSet:
    faces = set(fs.faces)
    for f in move.toggles:
        if f in faces:
            faces.discard(f)
        else:
            faces.add(f)
    return fs.with_faces(faces)


# ---------------------------------------------------------------------------
# deformation log
# ---------------------------------------------------------------------------

@dataclass
class DeformationLog:
    """Moves with their support balls and measures, in application order."""

    entries: list = field(default_factory=list)

    def record(self, kind: str, ball: Ball, faces, before: float, after: float,
               variant: str = "") -> None:
        self.entries.append({
            "kind": kind, "variant": variant,
            "ball_center": [float(x) for x in ball.center],
            "ball_radius": float(ball.radius),
            "faces": [[f.axes, list(f.lattice)] for f in sorted(faces)],
            "measure_before": before, "measure_after": after,
        })

    def to_jsonable(self) -> list:
        return list(self.entries)


# ---------------------------------------------------------------------------
# minimization
# ---------------------------------------------------------------------------

@dataclass
class MinimizeResult:
    faceset: FaceSet
    initial_measure: float
    final_measure: float
    log: DeformationLog
    rounds: int
    stalled: bool
    policy: str
    seed: int


def minimize_faceset(fs: FaceSet, *, policy: str = "greedy", seed: int = 0,
                     max_rounds: int = 100000) -> MinimizeResult:
    """Descend by improving moves until none remains.

    ``greedy`` applies the single best move per round; ``priority`` first
    exhausts free collapses (cheap, always safe), then takes the best
    projection move.  Both policies order candidates by (measure delta,
    kind, face keys) and are fully deterministic; the seed is recorded for
    provenance but the current policies draw nothing from it.
    """
    if policy not in ("greedy", "priority"):
        raise ValueError(f"unknown policy {policy!r}")
    log = DeformationLog()
    start = fs.measure()
    rounds = 0
    while rounds < max_rounds:
        if policy == "priority":
            picks = collapse_moves(fs)
            if not picks:
                picks = admissible_moves(fs)
        else:
            picks = admissible_moves(fs)
        picks = [m for m in picks if m.delta_faces < 0]
        if not picks:
            break
        move = min(picks, key=Move.sort_key)
        before = fs.measure()
        fs = apply_move(fs, move)
        rounds += 1
        log.record(move.kind, move.ball, move.toggles, before, fs.measure(),
                   move.variant)
    stalled = rounds >= max_rounds
    if stalled:
        logger.warning("minimization stopped at the round cap %d", max_rounds)
    return MinimizeResult(fs, start, fs.measure(), log, rounds, stalled, policy, seed)


# ---------------------------------------------------------------------------
# initialization from continuous content
# ---------------------------------------------------------------------------

@dataclass
class InitReport:
    faceset: FaceSet
    source: str               # "threshold" or "completion"
    covered_faces: int
    coverage_threshold: float
    projection: ProjectionResult
    log: DeformationLog


def _threshold_faceset(res: ProjectionResult, grid: DyadicGrid,
                       manifold: Optional[FlatManifold], threshold: float) -> FaceSet:
    d = grid.ambient_dim - 1
    target = threshold * grid.spacing ** d
    chosen = [f for f, m in res.content_measure_by_face().items()
              if f.dim == d and m >= target]
    return FaceSet(grid, frozenset(chosen), manifold)


def _completion_faceset(res: ProjectionResult, grid: DyadicGrid,
                        manifold: Optional[FlatManifold]) -> FaceSet:
    """Dominant-level graph completion.

    Pick the axis carrying the most projected coverage, choose the best
    level per column (argmax coverage, ties to the lower plane), and emit
    the graph surface: one pinned face per column plus wall stacks between
    neighboring columns of different levels.  The result is a cycle by
    construction, in the class of a constant-level slice.
    """
    n = grid.ambient_dim
    N = grid.subdivisions
    cover = res.content_measure_by_face()
    per_axis = [0.0] * n
    for f, m in cover.items():
        if f.dim != n - 1:
            continue
        a = next(ax for ax in range(n) if not f.spans(ax))
        per_axis[a] += m
    axis = int(np.argmax(per_axis))
    mask = grid.full_mask & ~(1 << axis)
    levels: dict[tuple, tuple] = {}
    for f, m in cover.items():
        if f.dim != n - 1 or f.axes != mask:
            continue
        col = tuple(x for i, x in enumerate(f.lattice) if i != axis)
        p = f.lattice[axis]
        cur = levels.get(col)
        if cur is None or m > cur[0] + 1e-15 or (abs(m - cur[0]) <= 1e-15 and p < cur[1]):
            levels[col] = (m, p)
    # default level for naked columns: coverage-weighted mode of the others
    if levels:
        tally: dict[int, float] = {}
        for m, p in levels.values():
            tally[p] = tally.get(p, 0.0) + m
        default = max(sorted(tally), key=lambda p: tally[p])
    else:
        default = N // 2
    other_axes = [a for a in range(n) if a != axis]
    cols = list(np.ndindex(*([N] * len(other_axes))))
    level_of = {col: levels.get(tuple(col), (0.0, default))[1] for col in cols}

    def face_at(col, p) -> CubeFace:
        lat = [0] * n
        for i, a in enumerate(other_axes):
            lat[a] = col[i]
        lat[axis] = p
        return CubeFace(mask, tuple(lat))

    faces = set()
    for col in cols:
        faces.add(face_at(col, level_of[col]))
    # walls between neighboring columns at different levels
    for col in cols:
        for i, a in enumerate(other_axes):
            nb = list(col)
            nb[i] += 1
            wrap = manifold is not None and manifold.identified[a]
            if nb[i] >= N:
                if not wrap:
                    continue
                nb[i] %= N
            p0, p1 = level_of[col], level_of[tuple(nb)]
            if p0 == p1:
                continue
            wall_mask = grid.full_mask & ~(1 << a)
            for h in range(min(p0, p1), max(p0, p1)):
                lat = [0] * n
                for j, aa in enumerate(other_axes):
                    lat[aa] = col[j]
                lat[a] = col[i] + 1
                lat[axis] = h
                w = CubeFace(wall_mask, tuple(lat))
                if manifold is not None:
                    w = manifold.canonical_face(w, N)
                faces.add(w)
    return FaceSet(grid, frozenset(faces), manifold)


def initialize_from_mesh(mesh: EmbeddedMesh, grid: DyadicGrid, *,
                         manifold: Optional[FlatManifold] = None,
                         threshold: float = 0.5, strategy: str = "far",
                         trials: int = 32, seed: int = 0) -> InitReport:
    """Project content onto the skeleton and lift a starting faceset.

    Faces covered beyond ``threshold`` of their area are retained when they
    form a relative cycle; otherwise (the usual case for oscillating graphs,
    whose projections terrace across several levels with torn ridges) the
    dominant-level completion builds a clean graph surface from the same
    coverage table, staying in the class of the input slice.
    """
    if mesh.dimension != grid.ambient_dim - 1:
        raise ValueError("initialization expects codimension-one content")
    res = project_to_skeleton(mesh, grid, strategy=strategy, trials=trials,
                              seed=seed, manifold=manifold)
    log = DeformationLog()
    domain = Ball(grid.corner + grid.size / 2.0,
                  grid.size * math.sqrt(grid.ambient_dim) / 2.0)
    for st in res.stages:
        log.record("ff-stage", domain, (), st.measure_in, st.measure_out,
                   variant=f"dim-{st.dim}")
    fs = _threshold_faceset(res, grid, manifold, threshold)
    covered = len(fs.faces)
    if fs.faces and fs.is_relative_cycle():
        return InitReport(fs, "threshold", covered, threshold, res, log)
    fs2 = _completion_faceset(res, grid, manifold)
    if not fs2.is_relative_cycle():
        logger.warning("completion faceset has %d odd ridges", len(fs2.odd_ridges()))
    log.record("ff-stage", domain, (), fs.measure(), fs2.measure(),
               variant="completion")
    return InitReport(fs2, "completion", covered, threshold, res, log)


# ---------------------------------------------------------------------------
# quasiminimality audit
# ---------------------------------------------------------------------------

@dataclass
class HaircutReport:
    worst_ratio: float        # empirical quasiminimality constant >= 1
    improving_trials: int     # trials whose ball admitted an improving move
    trials: int
    max_radius: float
    balls: list               # per-trial records (capped)
    improvable: bool


def quasiminimality_audit(fs: FaceSet, trials: int = 1000,
                          max_radius: Optional[float] = None, seed: int = 0,
                          keep: int = 32) -> HaircutReport:
    """Hunt for ball-local improvements among the move vocabulary.

    Each trial draws a ball (center uniform over the grid domain, radius
    uniform up to ``max_radius``, default two cell sides) and applies the
    best improving move whose toggled faces all lie in the closed ball, if
    any.  The trial ratio is (local measure before) / (local measure after);
    the worst ratio over the trials estimates the quasiminimality constant,
    and 1.0 means no test deformation improved anything.
    """
    grid = fs.grid
    s = grid.spacing
    if max_radius is None:
        max_radius = AUDIT_RADIUS_CELLS * s
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(0xA0D17,)))
    top = sorted(fs.top_faces())
    if not top:
        return HaircutReport(1.0, 0, trials, max_radius, [], False)
    lows, highs = zip(*(grid.face_bounds(f) for f in top))
    lo_arr = np.array(lows)
    hi_arr = np.array(highs)
    moves = admissible_moves(fs, only_improving=True)
    move_bounds = []
    for m in moves:
        ml, mh = zip(*(grid.face_bounds(f) for f in sorted(m.toggles)))
        move_bounds.append((np.array(ml), np.array(mh)))

    def farthest(center, lo, hi):
        # per-face farthest corner distance, wrapped on identified axes
        far = np.maximum(np.abs(lo - center), np.abs(hi - center))
        if fs.manifold is not None:
            L = fs.manifold.size
            for a in range(grid.ambient_dim):
                if fs.manifold.identified[a]:
                    far[..., a] = np.minimum(far[..., a], L - far[..., a])
        return np.sqrt((far ** 2).sum(axis=-1))

    worst = 1.0
    improving = 0
    balls = []
    n = grid.ambient_dim
    for _ in range(trials):
        center = grid.corner + rng.random(n) * grid.size
        r = s + rng.random() * max(max_radius - s, 0.0)
        inside = farthest(center, lo_arr, hi_arr) <= r + 1e-12
        before = int(np.count_nonzero(inside))
        if before == 0:
            continue
        best = None
        for m, (ml, mh) in zip(moves, move_bounds):
            if np.all(farthest(center, ml, mh) <= r + 1e-12):
                after = before + m.delta_faces
                if best is None or after < best:
                    best = after
        if best is None:
            ratio = 1.0
        else:
            improving += 1
            ratio = before / best if best > 0 else math.inf
        if ratio > worst or len(balls) < keep:
            balls.append({"center": [float(x) for x in center], "radius": float(r),
                          "faces": before, "ratio": float(ratio)})
            balls = balls[-keep:]
        worst = max(worst, ratio)
    return HaircutReport(worst, improving, trials, max_radius, balls,
                         improving > 0)


# ---------------------------------------------------------------------------
# refinement scheme
# ---------------------------------------------------------------------------

@dataclass
class SchemeLevel:
    subdivisions: int
    init: InitReport
    result: MinimizeResult
    audit: HaircutReport
    seconds: float


@dataclass
class SchemeResult:
    levels: list
    distances: list           # successive-minimizer gaps on the ball ladder


def run_scheme(mesh: EmbeddedMesh, subdivision_levels: Sequence[int], *,
               manifold_size: Optional[float] = None, corner=None,
               threshold: float = 0.5, strategy: str = "far",
               policy: str = "greedy", seed: int = 0, audit_trials: int = 200,
               ladder_radii: Sequence[float] = (0.25, 0.125),
               ladder_centers: int = 8) -> SchemeResult:
    """Initialize, minimize, core-reduce and audit per grid level.

    With ``manifold_size`` the grid is periodic.  Successive minimizers are
    compared through normalized local gaps on a fixed ball ladder: centers
    sampled on the finest minimizer, one row per (center, radius) scale.
    """
    from .geometry.distance import local_hausdorff_distance

    n = mesh.ambient_dim
    base = np.zeros(n) if corner is None else np.asarray(corner, dtype=float)
    size = manifold_size if manifold_size is not None else 1.0
    manifold = FlatManifold.torus(n, size, base) if manifold_size is not None else None
    levels = []
    for N in subdivision_levels:
        grid = DyadicGrid(base.copy(), size, N)
        t0 = time.time()
        init = initialize_from_mesh(mesh, grid, manifold=manifold,
                                    threshold=threshold, strategy=strategy, seed=seed)
        result = minimize_faceset(init.faceset, policy=policy, seed=seed)
        result.faceset = core_reduce(result.faceset)
        audit = quasiminimality_audit(result.faceset, trials=audit_trials, seed=seed)
        levels.append(SchemeLevel(N, init, result, audit, time.time() - t0))
    # fixed ball ladder: centers on the finest minimizer, shared radii
    distances = []
    if len(levels) >= 2:
        fine = levels[-1].result.faceset
        faces = sorted(fine.top_faces())
        step = max(1, len(faces) // ladder_centers)
        centers = [fine.grid.face_center(f) for f in faces[::step][:ladder_centers]]
        meshes = [lv.result.faceset.to_mesh() for lv in levels]
        for (ia, ma), mb in zip(enumerate(meshes), meshes[1:]):
            row = {"coarse": levels[ia].subdivisions,
                   "fine": levels[ia + 1].subdivisions, "gaps": []}
            for r in ladder_radii:
                gaps = []
                for c in centers:
                    try:
                        gaps.append(local_hausdorff_distance(ma, mb, Ball(c, r * size)))
                    except ValueError:
                        continue
                row["gaps"].append({"radius": r * size,
                                    "max": max(gaps) if gaps else math.inf,
                                    "mean": sum(gaps) / len(gaps) if gaps else math.inf})
            distances.append(row)
    return SchemeResult(levels, distances)
