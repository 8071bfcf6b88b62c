"""Separation diagnostics of a body/direction-law pair.

The central quantity is the minimal support excess at offset eps: the
minimum, over points y at distance eps from the body, of the integral of
h(conv(K u {y}), .) - h(K, .) against the directional distribution.  It
controls the exponential rate at which cells stop protruding past the
eps-parallel body, and its small-eps scaling exponent separates the
polytope / rolling-ball / generic regimes.

Planar excess integrals are evaluated with quadrature localized to the
support arc of the integrand (the directions in which y beats the body),
split at the kink directions; this keeps relative accuracy flat as eps
shrinks, which a global grid cannot do once the arc is narrower than the
grid spacing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hypercell import direction as dn
from hypercell import geom
from hypercell.errors import InvalidEpsilon
from hypercell.rng import stream

__all__ = [
    "MuConfig",
    "MuEstimate",
    "ScalingFit",
    "ExcessEvaluator",
    "excess",
    "mu_estimate",
    "mu_scaling",
    "hausdorff_cell",
]


@dataclass(frozen=True)
class MuConfig:
    """Search and quadrature settings for the minimal-excess estimate."""

    coarse_samples: int = 4096
    refine_tol: float = 1e-10
    max_refine: int = 4000
    restarts: int = 5
    integration: dn.IntegrationConfig = field(default_factory=dn.IntegrationConfig)
    seed: int = 99173


@dataclass
class MuEstimate:
    """Minimal support excess over the eps-offset boundary (upper bound)."""

    value: float
    argmin_point: np.ndarray
    evaluations: int
    refinement_gap: float

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "argmin_point": self.argmin_point.tolist(),
            "evaluations": self.evaluations,
            "refinement_gap": self.refinement_gap,
        }


@dataclass
class ScalingFit:
    """Least-squares line through (log eps, log mu)."""

    slope: float
    intercept: float
    r_squared: float
    points: list

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "points": [[float(a), float(b)] for a, b in self.points],
        }


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _gl_panel(f, a: float, b: float) -> float:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(_GL_WEIGHTS @ f(mid + half * _GL_NODES))


class ExcessEvaluator:
    """Support-excess integrals for one body/distribution pair.

    `batch` ranks candidate points fast (exact for atoms, unsplit local
    quadrature for planar continuous laws, common-random-number Monte
    Carlo otherwise); `precise` refines single points with kink-split
    panels.  Precomputing the body data here keeps minimization loops
    cheap.
    """

    def __init__(self, body, dist, cfg: dn.IntegrationConfig | None = None):
        self.body = body
        self.dist = dist
        self.cfg = cfg or dn.IntegrationConfig()
        self.dim = body.dim
        self._parts = self._flatten(dist, 1.0)
        self._kinks = self._kink_angles()
        self._mc_nodes = None

    @staticmethod
    def _flatten(dist, weight):
        if isinstance(dist, dn.Mixture):
            out = []
            for w, comp in zip(dist.weights, dist.components):
                out.extend(ExcessEvaluator._flatten(comp, weight * w))
            return out
        return [(weight, dist)]

    def _kink_angles(self) -> np.ndarray:
        if self.dim != 2:
            return np.empty(0)
        if isinstance(self.body, geom.Ball):
            return np.empty(0)
        hull = self.body.hull_vertices
        if len(hull) < 2:
            return np.empty(0)
        normals = [n for _, _, n in geom._polygon_edges(hull)]
        return np.array([math.atan2(n[1], n[0]) for n in normals])

    # -- planar continuous part ---------------------------------------
    def _support_arc(self, y: np.ndarray) -> tuple[float, float] | None:
        """Angular interval where <y, u> exceeds h(body, u) (None if empty)."""
        dist_y, p = geom.project(self.body, y)
        if dist_y <= 0.0:
            return None
        n = (y - p) / dist_y
        th0 = math.atan2(n[1], n[0])

        def f(th):
            u = np.array([math.cos(th), math.sin(th)])
            return float(y @ u) - self.body.support(u)

        lo, hi = th0 - math.pi, th0 + math.pi
        a, b = th0, th0
        fl = f(lo)
        fa = f(th0)
        if fa <= 0.0:  # numerically on the body
            return None
        x0, x1 = lo, th0
        for _ in range(64):
            mid = 0.5 * (x0 + x1)
            if f(mid) > 0.0:
                x1 = mid
            else:
                x0 = mid
        a = 0.5 * (x0 + x1)
        x0, x1 = th0, hi
        for _ in range(64):
            mid = 0.5 * (x0 + x1)
            if f(mid) > 0.0:
                x0 = mid
            else:
                x1 = mid
        b = 0.5 * (x0 + x1)
        return a, b

    def _density_breaks(self, comp) -> np.ndarray:
        if isinstance(comp, dn.CapStarved):
            alpha = math.atan2(comp.axis[1], comp.axis[0])
            angs = comp.cap_angles
            return np.concatenate(
                [alpha + s * angs + k for s in (1.0, -1.0) for k in (0.0, math.pi)]
            )
        return np.empty(0)

    def _planar_continuous(self, y: np.ndarray, comp, weight: float, split: bool) -> float:
        arc = self._support_arc(y)
        if arc is None:
            return 0.0
        a, b = arc

        if isinstance(comp, dn.Isotropic):
            dens = None
        elif isinstance(comp, dn.DensityOnSphere) or isinstance(comp, dn.CapStarved):
            dens = comp.density
        else:
            raise TypeError(f"unsupported planar component {type(comp).__name__}")

        def integrand(th):
            th = np.atleast_1d(th)
            U = np.column_stack([np.cos(th), np.sin(th)])
            vals = np.maximum(U @ y - self.body.support_batch(U), 0.0)
            if dens is not None:
                vals = vals * dens(U)
            return vals

        if split:
            breaks = [a, b]
            all_kinks = np.concatenate([self._kinks, self._density_breaks(comp)])
            for kink in all_kinks:
                shifted = kink + 2.0 * math.pi * np.round((0.5 * (a + b) - kink) / (2.0 * math.pi))
                for cand in (shifted - 2 * math.pi, shifted, shifted + 2 * math.pi):
                    if a < cand < b:
                        breaks.append(cand)
            breaks = sorted(set(breaks))
        else:
            breaks = [a, b]
        total = 0.0
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            total += _gl_panel(integrand, lo, hi)
        return weight * total / (2.0 * math.pi)

    # -- generic Monte Carlo part (d >= 3) -----------------------------
    def _mc_part(self, comp, weight):
        if self._mc_nodes is None:
            self._mc_nodes = {}
        key = id(comp)
        if key not in self._mc_nodes:
            rng = stream(self.cfg.seed, "excess-mc", len(self._mc_nodes))
            m = max(2, self.cfg.samples // 2)
            if isinstance(comp, dn.Isotropic):
                U = dn._uniform_sphere(rng, m, self.dim)
                dens = np.ones(m)
            elif isinstance(comp, dn.DensityOnSphere):
                U = dn._uniform_sphere(rng, m, self.dim)
                dens = comp.density(U)
            else:
                U = comp.sample_batch(rng, m)
                dens = np.ones(m)
            hK = self.body.support_batch(U)
            hK_neg = self.body.support_batch(-U)
            self._mc_nodes[key] = (U, dens, hK, hK_neg, weight)
        return self._mc_nodes[key]

    def _planar_batch(self, Y: np.ndarray, comp, weight: float) -> np.ndarray:
        """Vectorized unsplit arc quadrature over many points."""
        n = len(Y)
        dist, proj = geom.project_batch(self.body, Y)
        out = np.zeros(n)
        live = dist > 0.0
        if not live.any():
            return out
        Yl = Y[live]
        normals = (Yl - proj[live]) / dist[live][:, None]
        th0 = np.arctan2(normals[:, 1], normals[:, 0])

        def gap(phi):
            ang = th0 + phi
            U = np.column_stack([np.cos(ang), np.sin(ang)])
            return np.einsum("ij,ij->i", Yl, U) - self.body.support_batch(U)

        # vectorized bisection for both ends of the positive arc
        ends = []
        for lo0, hi0, positive_at in ((-math.pi, 0.0, "hi"), (0.0, math.pi, "lo")):
            lo = np.full(len(Yl), lo0)
            hi = np.full(len(Yl), hi0)
            for _ in range(48):
                mid = 0.5 * (lo + hi)
                pos = gap(mid) > 0.0
                if positive_at == "hi":
                    hi = np.where(pos, mid, hi)
                    lo = np.where(pos, lo, mid)
                else:
                    lo = np.where(pos, mid, lo)
                    hi = np.where(pos, hi, mid)
            ends.append(0.5 * (lo + hi))
        a, b = ends
        abs_a = th0 + a
        abs_b = th0 + b
        # split panels at the body's kink directions inside each arc
        columns = [abs_a]
        mid_all = 0.5 * (abs_a + abs_b)
        for kink in self._kinks:
            shifted = kink + 2.0 * math.pi * np.round((mid_all - kink) / (2.0 * math.pi))
            columns.append(np.clip(shifted, abs_a, abs_b))
        columns.append(abs_b)
        bounds = np.sort(np.column_stack(columns), axis=1)
        total = np.zeros(len(Yl))
        for j in range(bounds.shape[1] - 1):
            lo = bounds[:, j]
            hi = bounds[:, j + 1]
            half = 0.5 * (hi - lo)
            mid = 0.5 * (hi + lo)
            ang = mid[:, None] + half[:, None] * _GL_NODES[None, :]
            U = np.stack([np.cos(ang), np.sin(ang)], axis=-1)  # (n, 32, 2)
            flat = U.reshape(-1, 2)
            vals = np.einsum("nkj,nj->nk", U, Yl) - self.body.support_batch(flat).reshape(ang.shape)
            np.maximum(vals, 0.0, out=vals)
            if isinstance(comp, (dn.DensityOnSphere, dn.CapStarved)):
                vals *= comp.density(flat).reshape(ang.shape)
            elif not isinstance(comp, dn.Isotropic):
                raise TypeError(f"unsupported planar component {type(comp).__name__}")
            total += half * (vals @ _GL_WEIGHTS)
        out[live] = weight * total / (2.0 * math.pi)
        return out

    def _eval(self, Y: np.ndarray, split: bool) -> np.ndarray:
        out = np.zeros(len(Y))
        for weight, comp in self._parts:
            if isinstance(comp, dn.Atomic):
                gaps = np.maximum(Y @ comp.atoms.T - self.body.support_batch(comp.atoms), 0.0)
                out += weight * gaps @ comp.weights
            elif self.dim == 2:
                if split:
                    out += np.array(
                        [self._planar_continuous(y, comp, weight, split) for y in Y]
                    )
                else:
                    out += self._planar_batch(Y, comp, weight)
            else:
                U, dens, hK, hK_neg, w = self._mc_part(comp, weight)
                plus = np.maximum(Y @ U.T - hK, 0.0) * dens
                minus = np.maximum(-(Y @ U.T) - hK_neg, 0.0) * dens
                out += w * 0.5 * (plus + minus).mean(axis=1)
        return out

    def batch(self, Y: np.ndarray) -> np.ndarray:
        """Fast ranking values for an array of candidate points."""
        return self._eval(np.atleast_2d(Y), split=False)

    def precise(self, y) -> float:
        """Accurate excess at a single point (kink-split quadrature)."""
        return float(self._eval(np.atleast_2d(np.asarray(y, dtype=np.float64)), split=True)[0])


def excess(body, dist, y, cfg: dn.IntegrationConfig | None = None) -> float:
    """Integral of max(h(body,u), <y,u>) - h(body,u) against the distribution.

    Zero exactly when y lies in the body.
    """
    return ExcessEvaluator(body, dist, cfg).precise(y)


def mu_estimate(body, dist, eps: float, cfg: MuConfig | None = None) -> MuEstimate:
    """Minimal excess over the boundary of the eps-parallel body.

    Planar bodies get a deterministic arclength scan plus local pattern
    search; higher dimensions scan random boundary samples and refine by
    tangent steps with re-projection onto the offset boundary.  The
    result is an upper bound on the true minimum (finite search).
    """
    if eps <= 0:
        raise InvalidEpsilon(f"eps must be positive, got {eps}")
    cfg = cfg or MuConfig()
    evaluator = ExcessEvaluator(body, dist, cfg.integration)
    if body.dim == 2:
        return _mu_planar(body, evaluator, eps, cfg)
    return _mu_generic(body, evaluator, eps, cfg)


def _mu_planar(body, evaluator: ExcessEvaluator, eps: float, cfg: MuConfig) -> MuEstimate:
    path = geom.boundary_path(body, eps)
    m = cfg.coarse_samples
    s_grid = (np.arange(m) + 0.5) * (path.total / m)
    coarse = evaluator.batch(path.point_at(s_grid))
    evals = m

    # pick well-separated restart basins
    order = np.argsort(coarse)
    starts = []
    min_gap = path.total / 16.0
    for idx in order:
        s = s_grid[idx]
        if all(_circ_dist(s, s0, path.total) >= min_gap for s0 in starts):
            starts.append(float(s))
        if len(starts) >= cfg.restarts:
            break

    best_val = math.inf
    best_s = starts[0]
    gap = math.inf
    for s0 in starts:
        val, s_ref, used, gap0 = _pattern_search_1d(
            lambda s: evaluator.precise(path.point_at(s)[0]),
            s0,
            path.total / m,
            path.total,
            cfg.refine_tol,
            cfg.max_refine // max(1, len(starts)),
        )
        evals += used
        if val < best_val:
            best_val, best_s, gap = val, s_ref, gap0
    point = path.point_at(best_s)[0]
    return MuEstimate(best_val, point, evals, gap)


def _circ_dist(a: float, b: float, period: float) -> float:
    d = abs(a - b) % period
    return min(d, period - d)


def _pattern_search_1d(f, s0, step, period, refine_tol, max_evals):
    best = f(s0)
    s = s0
    evals = 1
    gap = math.inf
    while evals < max_evals and step > period * 1e-15:
        improved = False
        for cand in (s + step, s - step):
            v = f(cand % period)
            evals += 1
            if v < best:
                gap = best - v
                best = v
                s = cand % period
                improved = True
                break
        if not improved:
            step *= 0.5
            if gap < refine_tol:
                break
    return best, s, evals, gap


def _mu_generic(body, evaluator: ExcessEvaluator, eps: float, cfg: MuConfig) -> MuEstimate:
    rng = stream(cfg.seed, "mu-coarse")
    Y = np.array([geom.parallel_boundary_sample(body, eps, rng) for _ in range(cfg.coarse_samples)])
    vals = evaluator.batch(Y)
    evals = len(Y)
    order = np.argsort(vals)
    best_val = math.inf
    best_y = Y[order[0]]
    gap = math.inf
    for idx in order[: cfg.restarts]:
        val, y_ref, used, gap0 = _pattern_search_boundary(
            body, evaluator, eps, Y[idx], eps * 0.5, cfg.refine_tol, cfg.max_refine // cfg.restarts
        )
        evals += used
        if val < best_val:
            best_val, best_y, gap = val, y_ref, gap0
    return MuEstimate(best_val, best_y, evals, gap)


def _reproject(body, eps: float, y: np.ndarray) -> np.ndarray:
    """Nearest point of the offset boundary along the outward normal."""
    d, p = geom.project(body, y)
    if d <= 0.0:
        # fell inside: push out along a fixed direction from the deepest vertex
        g = y - body.vertices.mean(axis=0) if hasattr(body, "vertices") else y
        n = np.linalg.norm(g)
        g = g / n if n > 0 else np.eye(body.dim)[0]
        d2, p2 = geom.project(body, y + 2.0 * eps * g)
        return p2 + eps * (y + 2.0 * eps * g - p2) / max(d2, 1e-300)
    return p + eps * (y - p) / d

def _pattern_search_boundary(body, evaluator, eps, y0, step, refine_tol, max_evals):
    y = _reproject(body, eps, y0)
    best = evaluator.precise(y)
    evals = 1
    gap = math.inf
    d = body.dim
    while evals + 2 * d <= max_evals and step > eps * 1e-12:
        improved = False
        for j in range(d):
            for sign in (1.0, -1.0):
                cand = y.copy()
                cand[j] += sign * step
                cand = _reproject(body, eps, cand)
                v = evaluator.precise(cand)
                evals += 1
                if v < best:
                    gap = best - v
                    best = v
                    y = cand
                    improved = True
        if not improved:
            step *= 0.5
            if gap < refine_tol:
                break
    return best, y, evals, gap


def mu_scaling(body, dist, eps_grid, cfg: MuConfig | None = None) -> ScalingFit:
    """Empirical scaling exponent of the minimal excess over an eps grid."""
    eps_arr = np.asarray(list(eps_grid), dtype=np.float64)
    if np.any(eps_arr <= 0):
        raise InvalidEpsilon("eps grid must be positive")
    limit = min(1.0, body.diameter)
    if np.any(eps_arr > limit + 1e-12):
        raise InvalidEpsilon(f"eps grid must stay within (0, {limit:g}]")
    cfg = cfg or MuConfig()
    points = []
    for eps in eps_arr:
        est = mu_estimate(body, dist, float(eps), cfg)
        points.append((math.log(eps), math.log(est.value)))
    slope, intercept, r2 = _ols([p[0] for p in points], [p[1] for p in points])
    return ScalingFit(slope, intercept, r2, points)


def _ols(x, y) -> tuple[float, float, float]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0.0:
        raise ValueError("all abscissae equal")
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    syy = float(((y - ym) ** 2).sum())
    r2 = 0.0 if syy == 0.0 else 1.0 - float((resid**2).sum()) / syy
    return slope, intercept, r2


def hausdorff_cell(body, cell) -> float:
    """Hausdorff distance from the body to one of its cells.

    Containment is part of the cell construction contract, so only the
    vertex-to-body distances matter.
    """
    return geom.hausdorff_containing(body, cell.vertices, certificate=None)
