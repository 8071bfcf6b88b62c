"""Convex bodies with closed-form support functions.

Three body classes are supported: polytopes given by vertices, Euclidean
balls, and Minkowski sums polytope + ball (`BallSum`).  The family is
closed under outer parallel sets, every member has an exactly evaluable
support function, and the boundary of a planar member decomposes into
arcs and segments, which the rest of the package leans on heavily.

Constructors translate each body so the vertex centroid (or ball center)
sits at the origin; all downstream code assumes an interior origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hypercell import _kernels
from hypercell.errors import ContainmentViolated, UnsupportedBody

UNIT_NORM_TOL = 1e-12
FEASIBILITY_TOL = 1e-9

__all__ = [
    "Polytope",
    "Ball",
    "BallSum",
    "SurfaceMeasure",
    "as_unit_vector",
    "support",
    "extension_support",
    "distance",
    "parallel_boundary_sample",
    "surface_measure",
    "hausdorff_containing",
    "project",
    "project_batch",
    "outer_parallel",
    "parallel_gap",
    "boundary_path",
    "sphere_area",
    "body_to_json",
    "body_from_json",
]


def as_unit_vector(u, dim: int | None = None) -> np.ndarray:
    """Validate and return a unit vector as a float array."""
    v = np.asarray(u, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < 2:
        raise ValueError(f"unit vector must be 1-d with dimension >= 2, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {v.shape[0]}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"vector norm {norm!r} deviates from 1 beyond {UNIT_NORM_TOL}")
    return v


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^dim."""
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


def _dedupe_rows(arr: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    out: list[np.ndarray] = []
    for row in arr:
        if not any(np.linalg.norm(row - r) <= tol for r in out):
            out.append(row)
    return np.array(out)


# ---------------------------------------------------------------------------
# body classes


class _BodyBase:
    """Shared caching body interface; see module docstring for the family."""

    dim: int

    def support(self, u) -> float:
        return float(self.support_batch(np.asarray(u, dtype=np.float64)[None, :])[0])

    # subclasses implement support_batch / distance_batch / diameter /
    # circumradius / inradius_origin

    def distance(self, x) -> float:
        return float(self.distance_batch(np.asarray(x, dtype=np.float64)[None, :])[0])

    def contains(self, x, tol: float = FEASIBILITY_TOL) -> bool:
        return self.distance(x) <= tol


class Polytope(_BodyBase):
    """Convex hull of finitely many points with nonempty interior.

    Vertices are deduplicated and recentred on their mean.  For d = 2 the
    hull is ordered counterclockwise and edge data is cached; for d >= 3
    facet data is computed lazily from the hull.
    """

    def __init__(self, vertices):
        V = np.atleast_2d(np.asarray(vertices, dtype=np.float64))
        if V.shape[0] < 2 or V.shape[1] < 2:
            raise ValueError("polytope needs at least d+1 vertices in dimension >= 2")
        V = _dedupe_rows(V)
        V = V - V.mean(axis=0)
        d = V.shape[1]
        if V.shape[0] < d + 1 or np.linalg.matrix_rank(V, tol=1e-12) < d:
            raise ValueError("polytope vertices must affinely span R^d")
        self.vertices = V
        self.dim = d
        self.diameter = float(
            np.sqrt(((V[:, None, :] - V[None, :, :]) ** 2).sum(-1).max())
        )
        self.circumradius = float(np.linalg.norm(V, axis=1).max())
        self._facets = None
        if d == 2:
            self._init_polygon()

    def _init_polygon(self):
        hull = _kernels.convex_hull_2d(self.vertices)
        self.hull_vertices = self.vertices[hull]
        a = self.hull_vertices
        b = np.roll(a, -1, axis=0)
        e = b - a
        lengths = np.linalg.norm(e, axis=1)
        normals = np.column_stack([e[:, 1], -e[:, 0]]) / lengths[:, None]
        self.edge_normals = normals
        self.edge_lengths = lengths
        self.edge_offsets = np.einsum("ij,ij->i", a, normals)

    @property
    def facets(self):
        """List of (normal, offset, area, vertex index array); lazy for d >= 3."""
        if self.dim == 2:
            hull_idx = _kernels.convex_hull_2d(self.vertices)
            m = len(hull_idx)
            return [
                (
                    self.edge_normals[i],
                    float(self.edge_offsets[i]),
                    float(self.edge_lengths[i]),
                    np.array([hull_idx[i], hull_idx[(i + 1) % m]]),
                )
                for i in range(m)
            ]
        if self._facets is None:
            self._facets = _facets_qhull(self.vertices)
        return self._facets

    def support_batch(self, U: np.ndarray) -> np.ndarray:
        return (U @ self.vertices.T).max(axis=1)

    def distance_batch(self, X: np.ndarray) -> np.ndarray:
        if self.dim == 2:
            return _kernels.polygon_distance(self.hull_vertices, X)
        return np.array([_projection_distance(self.vertices, x)[0] for x in X])

    def inradius_origin(self) -> float:
        if self.dim == 2:
            return float(self.edge_offsets.min())
        return min(off for _, off, _, _ in self.facets)


class Ball(_BodyBase):
    """Euclidean ball; the constructor recentres it on the origin."""

    def __init__(self, center, radius: float):
        c = np.asarray(center, dtype=np.float64)
        if c.ndim != 1 or c.shape[0] < 2:
            raise ValueError("ball center must be a vector of dimension >= 2")
        if radius <= 0:
            raise ValueError(f"ball radius must be positive, got {radius}")
        self.center = np.zeros_like(c)
        self.radius = float(radius)
        self.dim = c.shape[0]
        self.diameter = 2.0 * self.radius
        self.circumradius = self.radius

    def support_batch(self, U: np.ndarray) -> np.ndarray:
        return U @ self.center + self.radius

    def distance_batch(self, X: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, np.linalg.norm(X - self.center, axis=1) - self.radius)

    def inradius_origin(self) -> float:
        return self.radius - float(np.linalg.norm(self.center))


class BallSum(_BodyBase):
    """Minkowski sum of a (possibly lower-dimensional) polytope and a ball.

    Realizes bodies in which a ball of the given radius slides freely.
    The polytope part may degenerate to a segment or point, so it is kept
    as a raw vertex array rather than a `Polytope`.
    """

    def __init__(self, vertices, radius: float):
        if radius <= 0:
            raise ValueError(f"ballsum radius must be positive, got {radius}")
        V = np.atleast_2d(np.asarray(vertices, dtype=np.float64))
        V = _dedupe_rows(V)
        V = V - V.mean(axis=0)
        self.vertices = V
        self.radius = float(radius)
        self.dim = V.shape[1]
        core_diam = float(np.sqrt(((V[:, None, :] - V[None, :, :]) ** 2).sum(-1).max())) if len(V) > 1 else 0.0
        self.diameter = core_diam + 2.0 * self.radius
        self.circumradius = float(np.linalg.norm(V, axis=1).max()) + self.radius
        if self.dim == 2:
            hull = _kernels.convex_hull_2d(V)
            self.hull_vertices = V[hull]

    def _core_rank(self) -> int:
        return int(np.linalg.matrix_rank(self.vertices, tol=1e-12)) if len(self.vertices) > 1 else 0

    def support_batch(self, U: np.ndarray) -> np.ndarray:
        return (U @ self.vertices.T).max(axis=1) + self.radius

    def distance_batch(self, X: np.ndarray) -> np.ndarray:
        if self.dim == 2:
            core = _kernels.polygon_distance(self.hull_vertices, X)
        else:
            core = np.array([_projection_distance(self.vertices, x)[0] for x in X])
        return np.maximum(0.0, core - self.radius)

    def inradius_origin(self) -> float:
        if self._core_rank() < self.dim:
            return self.radius
        return Polytope(self.vertices).inradius_origin() + self.radius


Body = Polytope | Ball | BallSum


# ---------------------------------------------------------------------------
# exact projection onto a vertex-described polytope (min-norm point method)


def _affine_min_norm(A: np.ndarray):
    s = A.shape[0]
    M = np.empty((s + 1, s + 1))
    M[:s, :s] = A @ A.T
    M[:s, s] = 1.0
    M[s, :s] = 1.0
    M[s, s] = 0.0
    rhs = np.zeros(s + 1)
    rhs[s] = 1.0
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:s]


def _projection_distance(V: np.ndarray, x: np.ndarray, tol: float = FEASIBILITY_TOL):
    """Distance from x to conv(V) and the nearest point (Wolfe's method).

    Active-set search for the min-norm point of the shifted hull; finite
    termination, with a stall guard for floating-point plateaus.
    """
    P = V - x
    norms2 = np.einsum("ij,ij->i", P, P)
    i0 = int(np.argmin(norms2))
    active = [i0]
    lam = np.array([1.0])
    y = P[i0].copy()
    scale2 = max(1.0, float(norms2.max()))
    prev_yy = np.inf
    for _ in range(16 * len(P) + 64):
        yy = float(y @ y)
        if yy <= 1e-20 * scale2 or prev_yy - yy <= 1e-15 * scale2 and prev_yy != np.inf:
            break
        prev_yy = yy
        dots = P @ y
        j = int(np.argmin(dots))
        if dots[j] >= yy - 1e-13 * scale2 or j in active:
            break
        active.append(j)
        lam = np.append(lam, 0.0)
        while len(active) > 1:
            A = P[active]
            a = _affine_min_norm(A)
            if np.all(a > 1e-12):
                lam = a
                y = a @ A
                break
            # step toward the affine minimizer until a weight hits zero
            neg = a <= 1e-12
            denom = lam[neg] - a[neg]
            ratios = np.where(denom > 0, lam[neg] / np.where(denom > 0, denom, 1.0), np.inf)
            theta = min(1.0, float(ratios.min())) if ratios.size else 1.0
            lam = np.maximum((1.0 - theta) * lam + theta * a, 0.0)
            keep = lam > 1e-12
            if keep.all():
                keep[int(np.argmin(lam))] = False
            active = [idx for idx, k in zip(active, keep) if k]
            lam = lam[keep]
            total = lam.sum()
            lam = lam / total if total > 0 else np.full(len(active), 1.0 / len(active))
            y = lam @ P[active]
        else:
            y = P[active[0]].copy()
            lam = np.array([1.0])
    d = float(np.linalg.norm(y))
    return (0.0 if d <= tol * math.sqrt(scale2) else d), x + y


def _facets_qhull(V: np.ndarray):
    """Facet (normal, offset, area, vertex indices) via the qhull wrapper."""
    from scipy.spatial import ConvexHull

    hull = ConvexHull(V)
    d = V.shape[1]
    groups: dict[tuple, list[int]] = {}
    for si, eq in enumerate(hull.equations):
        key = tuple(np.round(eq, 9))
        groups.setdefault(key, []).append(si)
    facets = []
    for key, simplices in groups.items():
        normal = np.array(key[:d])
        normal /= np.linalg.norm(normal)
        offset = float(-key[d])
        area = 0.0
        verts: set[int] = set()
        for si in simplices:
            ids = hull.simplices[si]
            verts.update(int(i) for i in ids)
            E = V[ids[1:]] - V[ids[0]]
            gram = E @ E.T
            det = float(np.linalg.det(gram))
            area += math.sqrt(max(det, 0.0)) / math.factorial(d - 1)
        facets.append((normal, offset, area, np.array(sorted(verts))))
    return facets


# ---------------------------------------------------------------------------
# public operations


def support(body: Body, u) -> float:
    """Support function h(body, u) for a unit direction."""
    return body.support(as_unit_vector(u, body.dim))


def extension_support(body: Body, y, u) -> float:
    """Support function of conv(body U {y}): max(h(body,u), <y,u>)."""
    uv = as_unit_vector(u, body.dim)
    return max(body.support(uv), float(np.dot(np.asarray(y, dtype=np.float64), uv)))


def distance(body: Body, x) -> float:
    """Euclidean distance from x to the body (0 inside)."""
    return body.distance(x)


def parallel_boundary_sample(body: Body, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Random point on the boundary of the outer parallel body at distance eps.

    Draws either a uniform direction and a random point of its support
    set, or (for bodies with flat pieces) a uniform facet with a random
    point on it.  The mixture gives every boundary piece positive
    sampling density; within faces the density is the convex-weight
    density, not surface area (bias documented, harmless for coverage).
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    d = body.dim
    flat = isinstance(body, Polytope) or (
        isinstance(body, BallSum) and len(body.vertices) > 1 and (d == 2 or body._core_rank() == d)
    )
    use_facet = flat and rng.random() < 0.5
    if use_facet:
        x, v = _random_facet_point(body, rng)
    else:
        g = rng.standard_normal(d)
        v = g / np.linalg.norm(g)
        x = _support_point(body, v, rng)
    return x + eps * v


def _support_point(body: Body, v: np.ndarray, rng, face_tol: float = 1e-12):
    if isinstance(body, Ball):
        return body.center + body.radius * v
    V = body.vertices
    dots = V @ v
    m = dots.max()
    face = np.nonzero(dots >= m - face_tol * (1.0 + abs(m)))[0]
    if len(face) == 1:
        x = V[face[0]]
    else:
        w = rng.dirichlet(np.ones(len(face)))
        x = w @ V[face]
    if isinstance(body, BallSum):
        return x + body.radius * v
    return x.copy()


def _polygon_edges(hull: np.ndarray):
    """Directed boundary edges (a, b, outward normal) of a CCW hull.

    A 2-point hull (segment) contributes both sides.
    """
    if len(hull) == 2:
        n = _segment_normal(hull, 0)
        return [(hull[0], hull[1], n), (hull[1], hull[0], -n)]
    b = np.roll(hull, -1, axis=0)
    e = b - hull
    ln = np.linalg.norm(e, axis=1)
    normals = np.column_stack([e[:, 1], -e[:, 0]]) / ln[:, None]
    return [(hull[i], b[i], normals[i]) for i in range(len(hull))]


def _random_facet_point(body: Body, rng):
    if body.dim == 2:
        edges = _polygon_edges(body.hull_vertices)
        a, b, n = edges[int(rng.integers(len(edges)))]
        x = a + rng.random() * (b - a)
    else:
        facets = body.facets if isinstance(body, Polytope) else Polytope(body.vertices).facets
        n, _, _, ids = facets[int(rng.integers(len(facets)))]
        V = body.vertices[ids]
        w = rng.dirichlet(np.ones(len(V)))
        x = w @ V
    if isinstance(body, BallSum):
        return x + body.radius * n, n
    return x, n


def _segment_normal(hull: np.ndarray, i: int) -> np.ndarray:
    e = hull[1] - hull[0]
    n = np.array([e[1], -e[0]]) / np.linalg.norm(e)
    return n if i == 0 else -n


@dataclass
class SurfaceMeasure:
    """Boundary area split by outer normal direction.

    `atoms` lists (unit normal, facet area) pairs; `sphere_density` is a
    constant density with respect to spherical Lebesgue measure covering
    the smooth part of the boundary (0 when absent).
    """

    atoms: list = field(default_factory=list)
    sphere_density: float = 0.0
    dim: int = 2

    @property
    def total_mass(self) -> float:
        mass = sum(w for _, w in self.atoms)
        if self.sphere_density:
            mass += self.sphere_density * sphere_area(self.dim)
        return mass

    @property
    def has_density(self) -> bool:
        return self.sphere_density > 0.0


def surface_measure(body: Body) -> SurfaceMeasure:
    """Surface area measure: facet atoms and/or a constant spherical density."""
    if isinstance(body, Ball):
        return SurfaceMeasure(atoms=[], sphere_density=body.radius ** (body.dim - 1), dim=body.dim)
    if isinstance(body, Polytope):
        atoms = [(n.copy(), float(area)) for n, _, area, _ in body.facets]
        return SurfaceMeasure(atoms=atoms, sphere_density=0.0, dim=body.dim)
    if isinstance(body, BallSum):
        if body.dim != 2:
            raise UnsupportedBody("surface measure of polytope+ball sums is only available in d = 2")
        hull = body.hull_vertices
        if len(hull) == 1:
            return SurfaceMeasure(atoms=[], sphere_density=body.radius, dim=2)
        atoms = []
        if len(hull) == 2:
            n = _segment_normal(hull, 0)
            ln = float(np.linalg.norm(hull[1] - hull[0]))
            atoms = [(n, ln), (-n, ln)]
        else:
            a, b = hull, np.roll(hull, -1, axis=0)
            e = b - a
            ln = np.linalg.norm(e, axis=1)
            normals = np.column_stack([e[:, 1], -e[:, 0]]) / ln[:, None]
            atoms = [(normals[i].copy(), float(ln[i])) for i in range(len(hull))]
        return SurfaceMeasure(atoms=atoms, sphere_density=body.radius, dim=2)
    raise TypeError(f"not a body: {body!r}")


def hausdorff_containing(body: Body, vertices, certificate=None) -> float:
    """Hausdorff distance from the body to a polytope containing it.

    The polytope is given by its vertices.  `certificate` is the list of
    (normal, offset) halfspaces defining it; when provided, containment
    h(body,u) <= t is verified (ContainmentViolated on failure).  Pass
    None only when containment is structurally guaranteed, e.g. for cell
    polytopes.  Equals max over vertices of distance(body, vertex).
    """
    V = np.atleast_2d(np.asarray(vertices, dtype=np.float64))
    if certificate is not None:
        for u, t in certificate:
            hu = body.support(as_unit_vector(u, body.dim))
            if hu > t + FEASIBILITY_TOL * (1.0 + abs(t)):
                raise ContainmentViolated(
                    f"halfspace <u,x> <= {t:g} cuts the body (h = {hu:g})"
                )
    return float(body.distance_batch(V).max())


def project(body: Body, x) -> tuple[float, np.ndarray]:
    """Distance to the body and the nearest body point."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(body, Ball):
        v = x - body.center
        n = float(np.linalg.norm(v))
        if n <= body.radius:
            return 0.0, x.copy()
        return n - body.radius, body.center + body.radius * v / n
    if isinstance(body, Polytope):
        if body.dim == 2:
            return _polygon_project(body.hull_vertices, x)
        return _projection_distance(body.vertices, x)
    if isinstance(body, BallSum):
        if body.dim == 2:
            dc, pc = _polygon_project(body.hull_vertices, x)
        else:
            dc, pc = _projection_distance(body.vertices, x)
        if dc <= body.radius:
            return 0.0, x.copy()
        return dc - body.radius, pc + body.radius * (x - pc) / dc
    raise TypeError(f"not a body: {body!r}")


def project_batch(body: Body, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized `project` over rows of Y."""
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if isinstance(body, Ball):
        V = Y - body.center
        n = np.linalg.norm(V, axis=1)
        outside = n > body.radius
        pts = Y.copy()
        safe = np.where(n > 0, n, 1.0)
        pts[outside] = body.center + body.radius * (V[outside] / safe[outside, None])
        return np.maximum(0.0, n - body.radius), pts
    if body.dim == 2:
        d, p = _polygon_project_batch(body.hull_vertices, Y)
        if isinstance(body, BallSum):
            inside = d <= body.radius
            out_d = np.maximum(0.0, d - body.radius)
            safe = np.where(d > 0, d, 1.0)
            pts = p + body.radius * (Y - p) / safe[:, None]
            pts[inside] = Y[inside]
            return out_d, pts
        return d, p
    pairs = [project(body, y) for y in Y]
    return np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])


def _polygon_project_batch(hull: np.ndarray, Y: np.ndarray):
    if len(hull) == 1:
        d = np.linalg.norm(Y - hull[0], axis=1)
        return d, np.broadcast_to(hull[0], Y.shape).copy()
    edges = _polygon_edges(hull)
    A = np.array([a for a, _, _ in edges])
    B = np.array([b for _, b, _ in edges])
    E = B - A
    ee = np.einsum("ij,ij->i", E, E)
    ee = np.where(ee == 0, 1.0, ee)
    diff = Y[:, None, :] - A[None, :, :]
    t = np.clip(np.einsum("nmj,mj->nm", diff, E) / ee, 0.0, 1.0)
    proj = A[None, :, :] + t[..., None] * E[None, :, :]
    d2 = ((Y[:, None, :] - proj) ** 2).sum(-1)
    j = np.argmin(d2, axis=1)
    rows = np.arange(len(Y))
    pts = proj[rows, j]
    d = np.sqrt(d2[rows, j])
    if len(hull) >= 3:
        crosses = diff[..., 0] * E[None, :, 1] - diff[..., 1] * E[None, :, 0]
        inside = (crosses <= 0.0).all(axis=1)
        d = np.where(inside, 0.0, d)
        pts[inside] = Y[inside]
    return d, pts


def _polygon_project(hull: np.ndarray, x: np.ndarray) -> tuple[float, np.ndarray]:
    if len(hull) == 1:
        return float(np.linalg.norm(x - hull[0])), hull[0].copy()
    best_d2 = np.inf
    best_p = None
    inside = len(hull) >= 3
    for a, b, _ in _polygon_edges(hull):
        e = b - a
        ee = float(e @ e)
        t = 0.0 if ee == 0 else min(1.0, max(0.0, float((x - a) @ e) / ee))
        p = a + t * e
        d2 = float((x - p) @ (x - p))
        if d2 < best_d2:
            best_d2 = d2
            best_p = p
        if inside and (x[0] - a[0]) * e[1] - (x[1] - a[1]) * e[0] > 0.0:
            inside = False
    if inside:
        return 0.0, x.copy()
    return math.sqrt(best_d2), best_p


def outer_parallel(body: Body, rho: float) -> Body:
    """Outer parallel body at distance rho (closed-form in this family)."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if isinstance(body, Ball):
        return Ball(body.center, body.radius + rho)
    if isinstance(body, Polytope):
        return BallSum(body.vertices, rho)
    return BallSum(body.vertices, body.radius + rho)


def parallel_gap(inner: Body, outer: Body) -> float | None:
    """Return rho if outer == inner + rho*B (same core), else None."""
    if isinstance(inner, Ball) and isinstance(outer, Ball):
        if np.array_equal(inner.center, outer.center) and outer.radius > inner.radius:
            return outer.radius - inner.radius
        return None
    if isinstance(outer, BallSum) and isinstance(inner, (Polytope, BallSum)):
        r_in = inner.radius if isinstance(inner, BallSum) else 0.0
        if (
            inner.vertices.shape == outer.vertices.shape
            and np.array_equal(inner.vertices, outer.vertices)
            and outer.radius > r_in
        ):
            return outer.radius - r_in
    return None


# ---------------------------------------------------------------------------
# planar boundary parametrization (outer parallel boundary as arcs + segments)


class BoundaryPath2D:
    """Arclength parametrization of the boundary of a planar parallel body.

    The boundary of K + R*B splits into straight edge translates and
    circular arcs around hull vertices; `point_at` maps arclength values
    in [0, total) to boundary points.  Exact for all three body classes.
    """

    def __init__(self, body: Body, offset: float):
        if body.dim != 2:
            raise ValueError("boundary path is only defined for planar bodies")
        if isinstance(body, Ball):
            core = body.center[None, :]
            radius = body.radius + offset
        elif isinstance(body, Polytope):
            core = body.hull_vertices
            radius = offset
        else:
            core = body.hull_vertices
            radius = body.radius + offset
        self.radius = radius
        pieces = []  # (kind, length, data)
        m = len(core)
        if m == 1:
            pieces.append(("arc", 2 * math.pi * radius, (core[0], 0.0)))
        else:
            edges = _polygon_edges(core)
            k = len(edges)
            for i in range(k):
                a, b, n = edges[i]
                pieces.append(("seg", float(np.linalg.norm(b - a)), (a + radius * n, b + radius * n)))
                n_next = edges[(i + 1) % k][2]
                th0 = math.atan2(n[1], n[0])
                th1 = math.atan2(n_next[1], n_next[0])
                sweep = (th1 - th0) % (2 * math.pi)
                pieces.append(("arc", radius * sweep, (b, th0)))
        self.pieces = pieces
        lengths = np.array([ln for _, ln, _ in pieces])
        self.cum = np.concatenate([[0.0], np.cumsum(lengths)])
        self.total = float(self.cum[-1])

    def point_at(self, s) -> np.ndarray:
        """Boundary points for arclength values (vectorized)."""
        s = np.atleast_1d(np.asarray(s, dtype=np.float64)) % self.total
        idx = np.searchsorted(self.cum, s, side="right") - 1
        idx = np.clip(idx, 0, len(self.pieces) - 1)
        out = np.empty((len(s), 2))
        for i, (kind, ln, data) in enumerate(self.pieces):
            sel = idx == i
            if not sel.any():
                continue
            local = s[sel] - self.cum[i]
            if kind == "seg":
                a, b = data
                t = (local / ln)[:, None]
                out[sel] = a + t * (b - a)
            else:
                center, th0 = data
                ang = th0 + local / self.radius
                out[sel] = center + self.radius * np.column_stack([np.cos(ang), np.sin(ang)])
        return out


def boundary_path(body: Body, eps: float) -> BoundaryPath2D:
    """Parametrize the boundary of the outer parallel body at distance eps."""
    return BoundaryPath2D(body, eps)


# ---------------------------------------------------------------------------
# serialization


def body_to_json(body: Body) -> dict:
    if isinstance(body, Polytope):
        return {"type": "polytope", "vertices": body.vertices.tolist()}
    if isinstance(body, Ball):
        return {"type": "ball", "center": body.center.tolist(), "radius": body.radius}
    if isinstance(body, BallSum):
        return {"type": "ballsum", "vertices": body.vertices.tolist(), "radius": body.radius}
    raise TypeError(f"not a body: {body!r}")


def body_from_json(obj: dict) -> Body:
    kind = obj.get("type")
    if kind == "polytope":
        return Polytope(obj["vertices"])
    if kind == "ball":
        return Ball(obj["center"], obj["radius"])
    if kind == "ballsum":
        return BallSum(obj["vertices"], obj["radius"])
    raise ValueError(f"unknown body type {kind!r}")
