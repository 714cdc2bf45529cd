"""Weighted networks spanning charged terminals, and their optimizers.

A network is a straight-segment graph with positive integer multiplicities.
Terminals carry integer charges; a network is admissible when the signed flow
through every vertex balances its charge (terminals) or vanishes (interior
vertices), counting each oriented edge flow once.  The cost functionals are

* ``size``  — total length, ignoring multiplicities,
* ``mass``  — length weighted by multiplicity,
* ``m_beta`` — length weighted by multiplicity**beta, 0 < beta <= 1
  (with 0**beta = 0, so zero-multiplicity edges are free).

The optimizer enumerates full Steiner topologies over the terminals (built by
the classical insertion scheme, (2N-5)!! trees), solves each for interior
vertex positions by a damped fixed-point iteration of the weighted
Fermat-point condition, derives edge multiplicities from the terminal charges
by flow conservation on the tree, merges collapsed vertices, and returns the
best network with a small audit certificate.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .geometry.core import as_point

logger = logging.getLogger(__name__)

#: vertices closer than this (relative to the instance scale) merge
MERGE_REL_TOL = 1e-9

#: fixed-point iteration stops when positions move less than this, relative
WEISZFELD_REL_TOL = 1e-12

WEISZFELD_MAX_SWEEPS = 2000

#: interior angles at degree-3 junctions should match 2*pi/3 to this (radians)
ANGLE_AUDIT_TOL = 1e-4


@dataclass(frozen=True)
class Terminal:
    """A charged boundary point: positive charge = source, negative = sink."""

    point: np.ndarray
    charge: int = 1

    def __post_init__(self):
        object.__setattr__(self, "point", as_point(self.point))
        self.point.flags.writeable = False
        if int(self.charge) != self.charge or self.charge == 0:
            raise ValueError("terminal charge must be a nonzero integer")
        object.__setattr__(self, "charge", int(self.charge))


def _charges_balanced(terminals: Sequence[Terminal]) -> bool:
    return sum(t.charge for t in terminals) == 0


@dataclass
class MultiplicityNet:
    """Straight segments with integer multiplicities and oriented flows."""

    points: np.ndarray
    edges: np.ndarray          # (E, 2) vertex indices, flow oriented 0 -> 1
    flows: np.ndarray          # (E,) signed integer flow along the edge

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.flows = np.asarray(self.flows, dtype=np.int64).reshape(-1)
        if self.points.ndim != 2:
            raise ValueError("points must be a (V, n) array")
        if self.flows.shape[0] != self.edges.shape[0]:
            raise ValueError("one flow per edge required")
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= len(self.points)):
            raise ValueError("edge index out of range")

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    @property
    def multiplicities(self) -> np.ndarray:
        return np.abs(self.flows)

    def lengths(self) -> np.ndarray:
        if not self.edges.size:
            return np.zeros(0)
        return np.linalg.norm(self.points[self.edges[:, 1]] - self.points[self.edges[:, 0]], axis=1)

    def size(self) -> float:
        L = self.lengths()
        return float(L[self.multiplicities > 0].sum())

    def mass(self) -> float:
        return float((self.lengths() * self.multiplicities).sum())

    def m_beta(self, beta: float) -> float:
        if not (0.0 < beta <= 1.0):
            raise ValueError("beta must be in (0, 1]")
        m = self.multiplicities.astype(float)
        w = np.where(m > 0, m ** beta, 0.0)
        return float((self.lengths() * w).sum())

    def cost(self, functional: str = "size", beta: float = 1.0) -> float:
        if functional == "size":
            return self.size()
        if functional == "mass":
            return self.mass()
        if functional == "m_beta":
            return self.m_beta(beta)
        raise ValueError(f"unknown functional {functional!r}")

    def vertex_balance(self, n_terminals: int) -> np.ndarray:
        """Net outflow per vertex (outgoing minus incoming signed flow)."""
        bal = np.zeros(len(self.points), dtype=np.int64)
        for (a, b), f in zip(self.edges, self.flows):
            bal[a] += f
            bal[b] -= f
        return bal

    def as_segments_mesh(self):
        from .geometry.core import EmbeddedMesh
        keep = self.multiplicities > 0
        segs = [np.array([self.points[a], self.points[b]])
                for (a, b), k in zip(self.edges, keep) if k]
        if not segs:
            return EmbeddedMesh.empty(1, self.ambient_dim)
        mesh = EmbeddedMesh.from_simplex_list(1, segs)
        return EmbeddedMesh(1, mesh.vertices, mesh.simplices,
                            np.array([int(m) for m in self.multiplicities[keep]]))


def check_kirchhoff(net: MultiplicityNet, terminals: Sequence[Terminal],
                    merge_tol: Optional[float] = None) -> None:
    """Verify flow conservation against the terminal charges.

    Terminal vertices must have net outflow equal to their charge; every
    other vertex must balance to zero.  Raises ValueError with the first
    offending vertex otherwise.
    """
    pts = net.points
    scale = _instance_scale([t.point for t in terminals]) or 1.0
    tol = merge_tol if merge_tol is not None else MERGE_REL_TOL * scale
    charge = np.zeros(len(pts), dtype=np.int64)
    seen = set()
    for t in terminals:
        d = np.linalg.norm(pts - t.point[None, :], axis=1)
        i = int(np.argmin(d))
        if d[i] > tol:
            raise ValueError("terminal has no matching network vertex")
        if i in seen:
            raise ValueError("two terminals map to one network vertex")
        seen.add(i)
        charge[i] += t.charge
    bal = net.vertex_balance(len(terminals))
    bad = np.nonzero(bal != charge)[0]
    if bad.size:
        i = int(bad[0])
        raise ValueError(
            f"flow conservation fails at vertex {i}: net outflow {int(bal[i])}, "
            f"required {int(charge[i])}")


def _instance_scale(points: Sequence[np.ndarray]) -> float:
    arr = np.asarray(points, dtype=float)
    if arr.shape[0] < 2:
        return 1.0
    return float(np.max(arr.max(axis=0) - arr.min(axis=0))) or 1.0


# ---------------------------------------------------------------------------
# topologies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NetTopology:
    """A full tree over N terminals: N leaf slots then N-2 interior slots."""

    n_terminals: int
    edges: tuple

    @property
    def n_interior(self) -> int:
        return max(self.n_terminals - 2, 0)


def enumerate_topologies(n_terminals: int) -> list[NetTopology]:
    """All full Steiner trees by edge insertion: 1, 1, 3, 15, 105, ... trees."""
    N = n_terminals
    if N < 2:
        raise ValueError("need at least two terminals")
    if N == 2:
        return [NetTopology(2, ((0, 1),))]
    base = [(0, 2), (1, 2), ]  # terminals 0,1 joined at interior vertex "2"
    # interior vertices get labels N, N+1, ... below; rebuild the base in that
    # convention: terminals 0..N-1, interior N..2N-3
    tops = [[(0, N), (1, N), (2, N)]]
    for t in range(3, N):
        new_tops = []
        interior_new = N + t - 2
        for edges in tops:
            for i, (a, b) in enumerate(edges):
                out = [e for j, e in enumerate(edges) if j != i]
                out.extend([(a, interior_new), (b, interior_new), (t, interior_new)])
                new_tops.append(out)
        tops = new_tops
    return [NetTopology(N, tuple(sorted(e))) for e in tops]


def _tree_flows(topology: NetTopology, charges: Sequence[int]) -> np.ndarray:
    """Signed flow on each tree edge forced by the terminal charges.

    The flow along edge (a, b), oriented a -> b, equals minus the total
    charge hanging on the b-side of the edge (what must stream back through
    toward a), which the tree structure determines uniquely.
    """
    N = topology.n_terminals
    V = N + topology.n_interior
    adj: list[list[tuple[int, int]]] = [[] for _ in range(V)]
    for idx, (a, b) in enumerate(topology.edges):
        adj[a].append((b, idx))
        adj[b].append((a, idx))
    flows = np.zeros(len(topology.edges), dtype=np.int64)

    def subtree_charge(v: int, parent: int) -> int:
        total = charges[v] if v < N else 0
        for w, idx in adj[v]:
            if w == parent:
                continue
            c = subtree_charge(w, v)
            a, b = topology.edges[idx]
            # orient flow a -> b; the side beyond the far endpoint carries c
            flows[idx] = -c if b == w else c
            total += c
        return total

    root_total = subtree_charge(0, -1)
    if root_total != 0:
        raise ValueError("terminal charges must sum to zero")
    return flows


# ---------------------------------------------------------------------------
# geometric optimization of one topology
# ---------------------------------------------------------------------------

def _edge_weights(flows: np.ndarray, functional: str, beta: float) -> np.ndarray:
    m = np.abs(flows).astype(float)
    if functional == "size":
        return (m > 0).astype(float)
    if functional == "mass":
        return m
    if functional == "m_beta":
        return np.where(m > 0, m ** beta, 0.0)
    raise ValueError(f"unknown functional {functional!r}")


def _optimize_interior(topology: NetTopology, terminals: Sequence[Terminal],
                       weights: np.ndarray, scale: float) -> np.ndarray:
    """Damped Weiszfeld sweeps for the interior vertex positions."""
    N = topology.n_terminals
    V = N + topology.n_interior
    n = terminals[0].point.size
    pos = np.zeros((V, n))
    for i, t in enumerate(terminals):
        pos[i] = t.point
    # harmonic extension over the tree (terminals pinned) as the start guess:
    # distinct per-junction seeds keep symmetric topologies from collapsing
    k = V - N
    if k:
        L = np.zeros((k, k))
        rhs = np.zeros((k, n))
        for a, b in topology.edges:
            for u, w in ((a, b), (b, a)):
                if u >= N:
                    L[u - N, u - N] += 1.0
                    if w >= N:
                        L[u - N, w - N] -= 1.0
                    else:
                        rhs[u - N] += pos[w]
        pos[N:] = np.linalg.solve(L, rhs)
    adj: list[list[tuple[int, float]]] = [[] for _ in range(V)]
    for (a, b), w in zip(topology.edges, weights):
        adj[a].append((b, float(w)))
        adj[b].append((a, float(w)))
    eps = 1e-14 * scale
    tol = WEISZFELD_REL_TOL * scale
    for sweep in range(WEISZFELD_MAX_SWEEPS):
        moved = 0.0
        for v in range(N, V):
            num = np.zeros(n)
            den = 0.0
            for w, wt in adj[v]:
                if wt <= 0.0:
                    continue
                d = float(np.linalg.norm(pos[w] - pos[v]))
                c = wt / max(d, eps)
                num += c * pos[w]
                den += c
            if den <= 0.0:
                continue
            target = num / den
            step = 0.5 * (target - pos[v]) if sweep < 8 else target - pos[v]
            moved = max(moved, float(np.linalg.norm(step)))
            pos[v] = pos[v] + step
        if moved <= tol:
            break
    return pos


def _merge_collapsed(pos: np.ndarray, edges: np.ndarray, flows: np.ndarray,
                     n_terminals: int, scale: float,
                     tol: Optional[float] = None):
    """Merge vertices within the merge tolerance; drop zero-length edges.

    Terminals never merge into each other; interior vertices snap onto the
    earliest coincident vertex (terminals first), keeping indices stable.
    """
    V = len(pos)
    if tol is None:
        tol = MERGE_REL_TOL * scale
    target = list(range(V))
    for v in range(V):
        if v < n_terminals:
            continue
        for u in range(V):
            if u == v:
                break
            if target[u] != u:
                continue
            if np.linalg.norm(pos[v] - pos[u]) <= tol:
                target[v] = u
                break
    new_edges = []
    new_flows = []
    for (a, b), f in zip(edges, flows):
        a2, b2 = target[a], target[b]
        if a2 == b2:
            continue
        new_edges.append((a2, b2))
        new_flows.append(int(f))
    used = sorted({i for e in new_edges for i in e} | set(range(n_terminals)))
    remap = {old: new for new, old in enumerate(used)}
    pts = pos[used]
    e_arr = np.array([(remap[a], remap[b]) for a, b in new_edges], dtype=np.int64).reshape(-1, 2)
    f_arr = np.array(new_flows, dtype=np.int64)
    return pts, e_arr, f_arr


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

def angle_audit(net: MultiplicityNet, n_terminals: int,
                tol: float = ANGLE_AUDIT_TOL) -> dict:
    """Check degree-3 interior junction angles against 120 degrees."""
    deg = np.zeros(len(net.points), dtype=int)
    inc: list[list[int]] = [[] for _ in range(len(net.points))]
    for idx, (a, b) in enumerate(net.edges):
        if net.multiplicities[idx] == 0:
            continue
        deg[a] += 1
        deg[b] += 1
        inc[a].append(idx)
        inc[b].append(idx)
    worst = 0.0
    checked = 0
    for v in range(n_terminals, len(net.points)):
        if deg[v] != 3:
            continue
        dirs = []
        for idx in inc[v]:
            a, b = net.edges[idx]
            other = b if a == v else a
            u = net.points[other] - net.points[v]
            norm = float(np.linalg.norm(u))
            if norm > 0:
                dirs.append(u / norm)
        if len(dirs) != 3:
            continue
        checked += 1
        for u1, u2 in itertools.combinations(dirs, 2):
            ang = math.acos(min(1.0, max(-1.0, float(u1 @ u2))))
            worst = max(worst, abs(ang - 2.0 * math.pi / 3.0))
    return {"junctions": checked, "max_deviation": worst, "ok": worst <= tol or checked == 0}


def star_upper_bound(terminals: Sequence[Terminal], functional: str = "size",
                     beta: float = 1.0) -> float:
    """Cost of the star network through the terminal centroid (an upper bound)."""
    pts = np.array([t.point for t in terminals])
    c = pts.mean(axis=0)
    if functional == "size":
        w = np.ones(len(pts))
    elif functional == "mass":
        w = np.abs([t.charge for t in terminals]).astype(float)
    else:
        w = np.array([abs(t.charge) ** beta for t in terminals])
    return float((np.linalg.norm(pts - c, axis=1) * w).sum())


@dataclass
class SteinerResult:
    net: MultiplicityNet
    cost: float
    functional: str
    beta: float
    topology: NetTopology
    n_topologies: int
    upper_bound: float
    audit: dict
    runner_up: Optional[float] = None


def optimize_steiner(terminals: Sequence[Terminal], *, functional: str = "size",
                     beta: float = 1.0, require_balance: Optional[bool] = None) -> SteinerResult:
    """Best full-topology network over the terminals for the chosen cost.

    Enumerates every full topology (practical up to ~8 terminals), optimizes
    interior vertices, merges collapsed junctions, canonicalizes flows, and
    returns the winner; ties break to the lexicographically smallest edge
    list, so results are deterministic.  Charges must balance for mass or
    m_beta costs (and for size when ``require_balance`` is set).
    """
    terminals = list(terminals)
    if len(terminals) < 2:
        raise ValueError("need at least two terminals")
    n = terminals[0].point.size
    if any(t.point.size != n for t in terminals):
        raise ValueError("terminals must share one ambient dimension")
    if require_balance is None:
        require_balance = functional in ("mass", "m_beta")
    if require_balance and not _charges_balanced(terminals):
        raise ValueError("terminal charges must sum to zero")
    if functional == "size":
        # the size problem is the classical connected one: charges play no
        # role, every tree edge counts with weight 1, so use spanning charges
        # whose partial sums never vanish (keeping all tree flows nonzero)
        charges = [1] * (len(terminals) - 1) + [-(len(terminals) - 1)]
    else:
        charges = [t.charge for t in terminals]
    scale = _instance_scale([t.point for t in terminals])
    tops = enumerate_topologies(len(terminals))
    best: Optional[tuple] = None
    runner: Optional[float] = None
    for topo in tops:
        flows = _tree_flows(topo, charges)
        weights = (np.ones(len(flows)) if functional == "size"
                   else _edge_weights(flows, functional, beta))
        pos = _optimize_interior(topo, terminals, weights, scale)
        pts, e_arr, f_arr = _merge_collapsed(pos, np.array(topo.edges), flows,
                                             len(terminals), scale)
        net = MultiplicityNet(pts, e_arr, f_arr)
        cost = net.cost(functional, beta)
        # Weiszfeld converges slowly when a junction degenerates onto a
        # terminal; a coarse merge is accepted whenever it does not cost more
        pts2, e2, f2 = _merge_collapsed(pos, np.array(topo.edges), flows,
                                        len(terminals), scale, tol=2e-2 * scale)
        if e2.shape != e_arr.shape or (e2 != e_arr).any():
            net2 = MultiplicityNet(pts2, e2, f2)
            cost2 = net2.cost(functional, beta)
            if cost2 <= cost:
                net, cost = net2, cost2
        key = (cost, tuple(sorted(map(tuple, e_arr.tolist()))))
        if best is None or key < best[0]:
            if best is not None:
                runner = best[1]
            best = (key, cost, net, topo)
        elif runner is None or cost < runner:
            runner = cost
    assert best is not None
    _, cost, net, topo = best
    audit = angle_audit(net, len(terminals))
    ub = star_upper_bound(terminals, functional, beta)
    if cost > ub + 1e-9 * max(1.0, ub):
        logger.warning("optimizer exceeded the star upper bound: %.12g > %.12g", cost, ub)
    return SteinerResult(net, cost, functional, beta, topo, len(tops), ub, audit, runner)
