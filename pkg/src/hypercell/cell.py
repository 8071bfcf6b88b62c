"""Exact construction of the K-cell of a sampled hyperplane process.

The K-cell is the intersection of all halfspaces that contain the body
and are bounded by process hyperplanes missing it.  Although the process
is infinite, only hyperplanes near the body matter: the construction
samples hyperplanes in growing annuli between the body and a window, and
stops once every cell vertex lies strictly inside the window.  Then no
hyperplane outside the window can cut the cell, so the result equals the
K-cell of the full process exactly; the final window radius is the
certificate.

Windows grow through the fixed schedule rho_0 * growth^k and each ring
gets its own keyed substream, so enlarging the window extends a sampled
configuration instead of resampling it.  That makes the certificate
property testable: building again with extra rings reproduces the same
vertices.

The planar fast path intersects halfplanes through polar duality (the
convex hull of the points u/t); a dimension-generic incremental vertex
enumerator covers d >= 3, and a brute-force subset enumerator is kept as
the oracle for both.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from hypercell import _kernels, geom
from hypercell.errors import WindowOverflow
from hypercell.process import ProcessParams, _sample_annulus_arrays
from hypercell.rng import as_keyed_stream

FEAS_TOL = 1e-9
SOLVE_RESIDUAL_TOL = 1e-7

__all__ = [
    "WindowPolicy",
    "CellStats",
    "CellPolytope",
    "Intersection",
    "halfspace_intersection",
    "halfspace_intersection_bruteforce",
    "k_cell",
    "cells_along_intensity",
]


@dataclass(frozen=True)
class WindowPolicy:
    """Adaptive window schedule for cell construction.

    `initial_radius` defaults to half the body diameter; radii then grow
    geometrically.  Overflowing `max_rounds` raises instead of returning
    a truncated (downward-biased) cell.
    """

    initial_radius: float | None = None
    growth_factor: float = 2.0
    max_rounds: int = 40

    def __post_init__(self):
        if self.growth_factor <= 1.0:
            raise ValueError("growth factor must exceed 1")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")

    def radius(self, body, round_index: int) -> float:
        rho0 = self.initial_radius if self.initial_radius is not None else body.diameter / 2.0
        return rho0 * self.growth_factor**round_index


@dataclass
class CellStats:
    sampled: int = 0
    active: int = 0
    rounds: int = 0


@dataclass
class CellPolytope:
    """The K-cell: active halfspaces, vertices, and the window certificate."""

    normals: np.ndarray  # (m, d) active constraint normals
    offsets: np.ndarray  # (m,)
    vertices: np.ndarray  # (k, d)
    defining: np.ndarray  # (k, d) indices into the active constraints
    window_radius: float
    stats: CellStats = field(default_factory=CellStats)

    @property
    def halfspaces(self) -> list[tuple[np.ndarray, float]]:
        return [(u, float(t)) for u, t in zip(self.normals, self.offsets)]

    def to_json(self) -> dict:
        return {
            "halfspaces": np.column_stack([self.normals, self.offsets]).tolist(),
            "vertices": self.vertices.tolist(),
            "defining": self.defining.tolist(),
            "window_radius": self.window_radius,
            "stats": {
                "sampled": self.stats.sampled,
                "active": self.stats.active,
                "rounds": self.stats.rounds,
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CellPolytope":
        hs = np.asarray(obj["halfspaces"], dtype=np.float64)
        stats = obj.get("stats", {})
        return cls(
            normals=hs[:, :-1],
            offsets=hs[:, -1],
            vertices=np.asarray(obj["vertices"], dtype=np.float64),
            defining=np.asarray(obj["defining"], dtype=np.int64),
            window_radius=float(obj["window_radius"]),
            stats=CellStats(
                stats.get("sampled", 0), stats.get("active", 0), stats.get("rounds", 0)
            ),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json())


# ---------------------------------------------------------------------------
# halfspace intersection kernels


@dataclass
class Intersection:
    """Vertex description of an intersection of halfspaces and a box.

    `defining` indexes the concatenated constraint array (halfspaces
    first, then box planes); `n_halfspaces` marks the split.  A vertex
    supported by a box plane signals that the bare halfspace intersection
    recedes there (unbounded without the box).
    """

    vertices: np.ndarray
    defining: np.ndarray
    n_halfspaces: int

    @property
    def box_supported(self) -> np.ndarray:
        return (self.defining >= self.n_halfspaces).any(axis=1)


def _axis_box(body, rho: float):
    """Axis-aligned bounding halfspaces of the window body + rho*B."""
    d = body.dim
    U = np.vstack([np.eye(d), -np.eye(d)])
    T = body.support_batch(U) + rho
    return U, T


def halfspace_intersection(normals, offsets, box_normals, box_offsets, tol: float = FEAS_TOL) -> Intersection:
    """Vertices of the intersection of halfspaces {<u,x> <= t} with a box.

    All offsets must be positive (origin interior).  The planar path uses
    polar duality; higher dimensions run the incremental enumerator with
    slack-sorted insertion.  Near-singular defining subsets are skipped.
    """
    U = np.atleast_2d(np.asarray(normals, dtype=np.float64))
    T = np.asarray(offsets, dtype=np.float64)
    BU = np.atleast_2d(np.asarray(box_normals, dtype=np.float64))
    BT = np.asarray(box_offsets, dtype=np.float64)
    if U.shape[0] and T.min() <= 0 or BT.min() <= 0:
        raise ValueError("halfspace offsets must be positive (origin interior)")
    d = BU.shape[1]
    if d == 2:
        return _intersect_dual_2d(U, T, BU, BT)
    return _intersect_incremental(U, T, BU, BT, tol)


def _intersect_dual_2d(U, T, BU, BT) -> Intersection:
    A = np.vstack([U, BU])
    b = np.concatenate([T, BT])
    D = A / b[:, None]
    hull = _kernels.convex_hull_2d(D)
    m = len(hull)
    verts = []
    defin = []
    for i in range(m):
        p = int(hull[i])
        q = int(hull[(i + 1) % m])
        a0, a1 = D[p], D[q]
        det = a0[0] * a1[1] - a0[1] * a1[0]
        if abs(det) < 1e-14:
            continue  # coincident directions: tangency, no vertex
        x = np.array([(a1[1] - a0[1]) / det, (a0[0] - a1[0]) / det])
        verts.append(x)
        defin.append((p, q))
    if not verts:
        return Intersection(np.empty((0, 2)), np.empty((0, 2), dtype=np.int64), len(T))
    return Intersection(np.array(verts), np.array(defin, dtype=np.int64), len(T))


def _solve_subset(A: np.ndarray, b: np.ndarray):
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(x)):
        return None
    residual = np.abs(A @ x - b).max()
    if residual > SOLVE_RESIDUAL_TOL * (1.0 + np.abs(b).max()):
        return None
    return x


def _intersect_incremental(U, T, BU, BT, tol) -> Intersection:
    d = BU.shape[1]
    n = len(T)
    A = np.vstack([U, BU])
    b = np.concatenate([T, BT])
    # start from the box corners
    corners = np.array(list(itertools.product(*[(-1.0, 1.0)] * d)))
    verts = []
    defin = []
    box_ids = np.arange(n, n + 2 * d)
    for c in corners:
        planes = [n + j if c[j] > 0 else n + d + j for j in range(d)]
        x = _solve_subset(A[planes], b[planes])
        if x is not None:
            verts.append(x)
            defin.append(planes)
    V = np.array(verts)
    D = np.array(defin, dtype=np.int64)
    order = np.argsort(T)
    for i in order:
        u, t = A[i], b[i]
        viol = V @ u > t
        if not viol.any():
            continue
        keep = ~viol
        active = np.unique(D)
        new_v = []
        new_d = []
        for combo in itertools.combinations(active.tolist(), d - 1):
            planes = [int(i), *combo]
            x = _solve_subset(A[planes], b[planes])
            if x is None:
                continue
            slack = b[np.concatenate([active, box_ids])] - A[np.concatenate([active, box_ids])] @ x
            if slack.min() >= -tol * (1.0 + abs(t)) and u @ x <= t + tol:
                new_v.append(x)
                new_d.append(planes)
        V = np.vstack([V[keep], np.array(new_v)]) if new_v else V[keep]
        D = (
            np.vstack([D[keep], np.array(new_d, dtype=np.int64)])
            if new_d
            else D[keep]
        )
        if len(V) == 0:
            break
    V, D = _dedupe_vertices(V, D)
    return Intersection(V, D, n)


def _dedupe_vertices(V: np.ndarray, D: np.ndarray, tol: float = 1e-9):
    if len(V) <= 1:
        return V, D
    keep = []
    for i in range(len(V)):
        if not any(np.linalg.norm(V[i] - V[j]) <= tol * (1.0 + np.linalg.norm(V[j])) for j in keep):
            keep.append(i)
    return V[keep], D[keep]


def halfspace_intersection_bruteforce(normals, offsets, box_normals, box_offsets, tol: float = FEAS_TOL) -> Intersection:
    """Oracle: enumerate every d-subset, solve, filter by feasibility.

    Exponentially slower than the production paths; retained unchanged as
    the independent check they are validated against.
    """
    U = np.atleast_2d(np.asarray(normals, dtype=np.float64))
    T = np.asarray(offsets, dtype=np.float64)
    BU = np.atleast_2d(np.asarray(box_normals, dtype=np.float64))
    BT = np.asarray(box_offsets, dtype=np.float64)
    A = np.vstack([U, BU])
    b = np.concatenate([T, BT])
    d = A.shape[1]
    verts = []
    defin = []
    for combo in itertools.combinations(range(len(b)), d):
        x = _solve_subset(A[list(combo)], b[list(combo)])
        if x is None:
            continue
        if np.all(A @ x <= b + tol * (1.0 + np.abs(b))):
            verts.append(x)
            defin.append(combo)
    if not verts:
        return Intersection(np.empty((0, d)), np.empty((0, d), dtype=np.int64), len(T))
    V, D = _dedupe_vertices(np.array(verts), np.array(defin, dtype=np.int64))
    return Intersection(V, D, len(T))


# ---------------------------------------------------------------------------
# K-cell construction


class _CellBuilder:
    """Incremental exact cell state within a fixed certified window."""

    def __init__(self, body, dim: int, debug_oracle: bool = False):
        self.body = body
        self.dim = dim
        self.debug_oracle = debug_oracle
        self.U = np.empty((0, dim))
        self.T = np.empty(0)
        self.inter: Intersection | None = None

    def rebuild(self, U_new, T_new, rho: float):
        """Recompute from retained + new constraints inside window radius rho."""
        self.U = np.vstack([self.U, U_new])
        self.T = np.concatenate([self.T, T_new])
        BU, BT = _axis_box(self.body, rho)
        self.inter = halfspace_intersection(self.U, self.T, BU, BT)
        if self.debug_oracle and self.dim == 2:
            self._cross_check(BU, BT)
        self._compact()

    def add_incremental(self, U_new, T_new, rho: float):
        """Add constraints to a certified cell; cells only shrink here."""
        if len(T_new) == 0:
            return
        cutting = _kernels.cut_mask(U_new, T_new, self.inter.vertices)
        if not cutting.any():
            return
        self.rebuild(U_new[cutting], T_new[cutting], rho)

    def _cross_check(self, BU, BT):
        oracle = halfspace_intersection_bruteforce(self.U, self.T, BU, BT)
        if not _vertex_sets_match(self.inter.vertices, oracle.vertices, 1e-7):
            raise AssertionError("fast-path intersection deviates from the subset oracle")

    def _compact(self):
        """Keep only constraints that define vertices (active set)."""
        act = np.unique(self.inter.defining)
        act = act[act < len(self.T)]
        remap = -np.ones(len(self.T) + 2 * self.dim, dtype=np.int64)
        remap[act] = np.arange(len(act))
        # box plane ids shift to follow the new constraint count
        n_old = len(self.T)
        for j in range(2 * self.dim):
            remap[n_old + j] = len(act) + j
        self.inter = Intersection(
            self.inter.vertices, remap[self.inter.defining], len(act)
        )
        self.U = self.U[act]
        self.T = self.T[act]

    def margins(self) -> np.ndarray:
        """Distance from the body to each current vertex."""
        if len(self.inter.vertices) == 0:
            return np.empty(0)
        return self.body.distance_batch(self.inter.vertices)


def _vertex_sets_match(A: np.ndarray, B: np.ndarray, tol: float) -> bool:
    if len(A) != len(B):
        return False
    if len(A) == 0:
        return True
    used = np.zeros(len(B), dtype=bool)
    for a in A:
        dist = np.linalg.norm(B - a, axis=1)
        dist[used] = np.inf
        j = int(np.argmin(dist))
        if dist[j] > tol * (1.0 + np.linalg.norm(a)):
            return False
        used[j] = True
    return True


def _finalize(builder: _CellBuilder, rho: float, sampled: int, rounds: int) -> CellPolytope:
    inter = builder.inter
    stats = CellStats(sampled=sampled, active=len(builder.T), rounds=rounds)
    return CellPolytope(
        normals=builder.U.copy(),
        offsets=builder.T.copy(),
        vertices=inter.vertices.copy(),
        defining=inter.defining.copy(),
        window_radius=rho,
        stats=stats,
    )


def cells_along_intensity(
    params_base: ProcessParams,
    body,
    gamma_grid,
    policy: WindowPolicy | None = None,
    stream_key=0,
    debug_oracle: bool = False,
    extra_rings: int = 0,
) -> list[CellPolytope]:
    """Coupled K-cells for every intensity in an increasing grid.

    One realization of the embedded process serves all intensities: each
    sampled hyperplane carries a uniform birth intensity in
    (0, gamma_max], and the cell at gamma uses those born by gamma.
    Cells are therefore nested and share one window certificate (grown
    until the largest cell fits strictly inside).  `stream_key` is an int
    seed or KeyedStream; window rings use keyed substreams so enlarged
    windows extend the configuration (`extra_rings` forces enlargement,
    used by certificate tests).
    """
    grid = [float(g) for g in gamma_grid]
    if any(g <= 0 for g in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("gamma grid must be positive and strictly increasing")
    policy = policy or WindowPolicy()
    key = as_keyed_stream(stream_key)
    gamma_max = grid[-1]
    params_max = params_base.with_gamma(gamma_max)

    builder = _CellBuilder(body, body.dim, debug_oracle)
    ring_store: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []  # (U, T, marks)
    sampled_total = 0

    def sample_ring(r: int):
        nonlocal sampled_total
        rng = key.child("ring", r)
        inner = body if r == 0 else geom.outer_parallel(body, policy.radius(body, r - 1))
        outer = geom.outer_parallel(body, policy.radius(body, r))
        U, T = _sample_annulus_arrays(params_max, inner, outer, rng)
        marks = gamma_max * (1.0 - rng.random(len(T)))  # birth intensity in (0, gamma_max]
        ring_store.append((U, T, marks))
        sampled_total += len(T)

    # phase 1: certify the largest cell (smallest intensity)
    g1 = grid[0]
    rounds = 0
    certified = False
    while rounds < policy.max_rounds:
        sample_ring(rounds)
        rho = policy.radius(body, rounds)
        sel = [(U[m <= g1], T[m <= g1]) for U, T, m in ring_store]
        builder = _CellBuilder(body, body.dim, debug_oracle)
        builder.rebuild(
            np.vstack([u for u, _ in sel]) if sel else np.empty((0, body.dim)),
            np.concatenate([t for _, t in sel]) if sel else np.empty(0),
            rho,
        )
        rounds += 1
        margins = builder.margins()
        if len(margins) and margins.max() < rho - FEAS_TOL:
            certified = True
            break
    if not certified:
        raise WindowOverflow(rounds, policy.radius(body, rounds - 1))

    for _ in range(extra_rings):
        sample_ring(rounds)
        rho = policy.radius(body, rounds)
        sel = [(U[m <= g1], T[m <= g1]) for U, T, m in ring_store]
        builder = _CellBuilder(body, body.dim, debug_oracle)
        builder.rebuild(
            np.vstack([u for u, _ in sel]),
            np.concatenate([t for _, t in sel]),
            rho,
        )
        rounds += 1

    rho_final = policy.radius(body, rounds - 1)
    count1 = sum(int((m <= g1).sum()) for _, _, m in ring_store)
    cells = [_finalize(builder, rho_final, count1, rounds)]

    # phase 2: later intensities only add constraints; cells shrink
    prev = g1
    running = count1
    for g in grid[1:]:
        for U, T, m in ring_store:
            pick = (m > prev) & (m <= g)
            running += int(pick.sum())
            builder.add_incremental(U[pick], T[pick], rho_final)
        cells.append(_finalize(builder, rho_final, running, rounds))
        prev = g
    return cells


def k_cell(
    params: ProcessParams,
    body,
    policy: WindowPolicy | None = None,
    stream_key=0,
    debug_oracle: bool = False,
    extra_rings: int = 0,
) -> CellPolytope:
    """Exact K-cell at a single intensity (see `cells_along_intensity`)."""
    return cells_along_intensity(
        params,
        body,
        [params.gamma],
        policy,
        stream_key,
        debug_oracle,
        extra_rings,
    )[0]
