"""Even directional distributions on the unit sphere.

These play the role of the law of hyperplane normals.  Every variant is
an even probability measure with full-dimensional support: isotropic,
finitely supported (antipodal atom pairs), density-weighted, the
cap-starved construction that suppresses mass near one normal direction,
and finite mixtures.

Integration is deterministic in the plane (composite Simpson, or exact
sums for atoms) and Monte Carlo with antithetic pairs in higher
dimensions; `integrate` reports a standard error alongside the value
(zero for the deterministic paths).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from hypercell import rng as hrng
from hypercell.errors import InfeasibleBudget, RejectionStall
from hypercell.geom import as_unit_vector, sphere_area, surface_measure

ANGULAR_TOL = 1e-9
MASS_TOL = 1e-9

__all__ = [
    "IntegrationConfig",
    "IntegralResult",
    "Isotropic",
    "Atomic",
    "DensityOnSphere",
    "CapStarved",
    "Mixture",
    "MeasureSupport",
    "sample_direction",
    "integrate",
    "support_of",
    "supports_approximation",
    "from_surface_measure",
    "cap_starved",
    "distribution_to_json",
    "distribution_from_json",
]


@dataclass(frozen=True)
class IntegrationConfig:
    """Quadrature and Monte Carlo settings for spherical integrals."""

    nodes: int = 4096
    samples: int = 1_000_000
    seed: int = 715517


class IntegralResult(NamedTuple):
    value: float
    stderr: float


def _eval_batch(f, U: np.ndarray) -> np.ndarray:
    """Evaluate f on rows of U, accepting batch or per-vector callables."""
    try:
        vals = np.asarray(f(U), dtype=np.float64)
        if vals.shape == (U.shape[0],):
            return vals
    except Exception:
        pass
    return np.array([float(f(u)) for u in U], dtype=np.float64)


def _rejection_batch(rng, n, propose, accept_prob):
    """Generic batch rejection sampler with a stall guard."""
    out = []
    got = 0
    proposals = 0
    while got < n:
        m = max(1024, 2 * (n - got))
        cand = propose(rng, m)
        p = accept_prob(cand)
        keep = rng.random(len(cand)) <= p
        acc = cand[keep]
        out.append(acc[: n - got])
        got += min(len(acc), n - got)
        proposals += m
        if proposals >= 1e7 and got / proposals < 1e-6:
            raise RejectionStall(
                f"acceptance rate {got / proposals:.2e} after {proposals:.0f} proposals"
            )
    return np.vstack(out)


def _uniform_sphere(rng, n, dim):
    g = rng.standard_normal((n, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# variants


class Isotropic:
    """Rotation invariant distribution (normalized spherical Lebesgue)."""

    def __init__(self, dim: int):
        if dim < 2:
            raise ValueError("dimension must be >= 2")
        self.dim = dim

    def sample_batch(self, rng, n: int) -> np.ndarray:
        return _uniform_sphere(rng, n, self.dim)


class Atomic:
    """Finitely supported even distribution: antipodal atom pairs."""

    def __init__(self, atoms, weights):
        U = np.atleast_2d(np.asarray(atoms, dtype=np.float64))
        w = np.asarray(weights, dtype=np.float64)
        if len(U) != len(w) or len(U) == 0:
            raise ValueError("atoms and weights must be equal-length and nonempty")
        norms = np.linalg.norm(U, axis=1)
        if np.abs(norms - 1.0).max() > 1e-12:
            raise ValueError("atoms must be unit vectors")
        if w.min() <= 0:
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        self.atoms = U
        self.weights = w
        self.dim = U.shape[1]
        self._check_even()

    def _check_even(self):
        for u, w in zip(self.atoms, self.weights):
            d = np.linalg.norm(self.atoms + u, axis=1)
            j = int(np.argmin(d))
            if d[j] > ANGULAR_TOL or abs(self.weights[j] - w) > MASS_TOL:
                raise ValueError("atoms must come in antipodal pairs with equal weight")

    @classmethod
    def symmetrized(cls, axes, weights) -> "Atomic":
        """Build from one representative per antipodal pair."""
        U = np.atleast_2d(np.asarray(axes, dtype=np.float64))
        w = np.asarray(weights, dtype=np.float64)
        w = w / w.sum()
        return cls(np.vstack([U, -U]), np.concatenate([w, w]) / 2.0)

    def sample_batch(self, rng, n: int) -> np.ndarray:
        idx = rng.choice(len(self.weights), size=n, p=self.weights)
        return self.atoms[idx]


class DensityOnSphere:
    """Distribution with density g relative to the uniform distribution.

    g is symmetrized at construction, so evenness holds regardless of the
    callable supplied.  `sup_bound` must dominate g; it is the rejection
    envelope.
    """

    def __init__(self, g: Callable, sup_bound: float, dim: int):
        if sup_bound <= 0:
            raise ValueError("sup_bound must be positive")
        self._raw = g
        self.sup_bound = float(sup_bound)
        self.dim = dim

    def density(self, U: np.ndarray) -> np.ndarray:
        """Even density with respect to the uniform probability measure."""
        return 0.5 * (_eval_batch(self._raw, U) + _eval_batch(self._raw, -U))

    def sample_batch(self, rng, n: int) -> np.ndarray:
        return _rejection_batch(
            rng,
            n,
            lambda r, m: _uniform_sphere(r, m, self.dim),
            lambda U: self.density(U) / self.sup_bound,
        )


class CapStarved:
    """Piecewise-constant even density, starved on shrinking polar caps.

    The sphere is split into nested caps about ``axis`` (and their
    antipodes) with prescribed one-sided masses, plus a uniform
    remainder.  Stored shell boundaries and masses make the construction
    reproducible and exactly integrable.
    """

    def __init__(self, axis, cap_angles, cap_masses, outside_mass):
        self.axis = as_unit_vector(axis)
        self.dim = self.axis.shape[0]
        ang = np.asarray(cap_angles, dtype=np.float64)  # decreasing half-angles
        m = np.asarray(cap_masses, dtype=np.float64)  # one-sided cap masses, decreasing
        if len(ang) != len(m):
            raise ValueError("cap_angles and cap_masses must have equal length")
        if np.any(np.diff(ang) >= 0) or ang[0] >= math.pi / 2 or ang[-1] <= 0:
            raise ValueError("cap angles must decrease strictly within (0, pi/2)")
        if np.any(np.diff(m) >= 0) or m[-1] <= 0:
            raise ValueError("cap masses must decrease strictly and stay positive")
        total = 2.0 * m[0] + float(outside_mass)
        if abs(total - 1.0) > MASS_TOL or outside_mass <= 0:
            raise InfeasibleBudget(f"masses total {total!r} with outside {outside_mass!r}")
        self.cap_angles = ang
        self.cap_masses = m
        self.outside_mass = float(outside_mass)
        # pieces: one-sided bands ang[i] > theta >= ang[i+1], innermost cap, outside
        self._piece_angles = []
        self._piece_masses = []
        for i in range(len(ang) - 1):
            self._piece_angles.append((ang[i + 1], ang[i]))
            self._piece_masses.append(m[i] - m[i + 1])
        self._piece_angles.append((0.0, ang[-1]))
        self._piece_masses.append(m[-1])
        self._basis = _orthonormal_complement(self.axis)
        self._sigma_cache: dict[tuple, float] = {}

    # -- geometry of polar pieces -------------------------------------
    def _band_sigma(self, lo: float, hi: float) -> float:
        """Spherical Lebesgue measure of one polar band {lo <= theta <= hi}."""
        if self.dim == 2:
            return 2.0 * (hi - lo)
        key = (lo, hi)
        cached = self._sigma_cache.get(key)
        if cached is None:
            from scipy.integrate import quad

            val, _ = quad(lambda t: math.sin(t) ** (self.dim - 2), lo, hi)
            cached = sphere_area(self.dim - 1) * val
            self._sigma_cache[key] = cached
        return cached

    def density(self, U: np.ndarray) -> np.ndarray:
        """Density with respect to the uniform probability measure."""
        U = np.atleast_2d(U)
        cosines = np.abs(U @ self.axis)
        theta = np.arccos(np.clip(cosines, -1.0, 1.0))
        out = np.full(
            len(U),
            self.outside_mass
            / (self._band_sigma(self.cap_angles[0], math.pi - self.cap_angles[0]))
            * sphere_area(self.dim),
        )
        for (lo, hi), mass in zip(self._piece_angles, self._piece_masses):
            sel = (theta >= lo) & (theta < hi)
            out[sel] = mass / self._band_sigma(lo, hi) * sphere_area(self.dim)
        return out

    def cap_mass(self, threshold: float) -> float:
        """Exact one-sided mass of {<u, axis> >= threshold}."""
        angle = math.acos(min(1.0, max(-1.0, threshold)))
        total = 0.0
        for (lo, hi), mass in zip(self._piece_angles, self._piece_masses):
            if angle >= hi:
                total += mass
            elif angle > lo:
                total += mass * self._band_sigma(lo, angle) / self._band_sigma(lo, hi)
        if angle > self.cap_angles[0]:
            # the outside band below polar angle `angle` lies inside the cap
            lo = self.cap_angles[0]
            hi = math.pi - self.cap_angles[0]
            frac = self._band_sigma(lo, min(angle, hi)) / self._band_sigma(lo, hi)
            total += self.outside_mass * frac
        return total

    def _sample_polar(self, rng, n, lo, hi):
        if self.dim == 2 or n == 0:
            return rng.uniform(lo, hi, size=n)
        # rejection against the uniform angle with sin^(d-2) weight
        env = max(math.sin(lo), math.sin(hi), 1.0 if lo <= math.pi / 2 <= hi else 0.0)
        env = env ** (self.dim - 2)
        out = np.empty(n)
        got = 0
        while got < n:
            m = 2 * (n - got) + 16
            t = rng.uniform(lo, hi, size=m)
            keep = rng.random(m) * env <= np.sin(t) ** (self.dim - 2)
            acc = t[keep][: n - got]
            out[got : got + len(acc)] = acc
            got += len(acc)
        return out

    def sample_batch(self, rng, n: int) -> np.ndarray:
        masses = [2.0 * b for b in self._piece_masses] + [self.outside_mass]
        idx = rng.choice(len(masses), size=n, p=np.asarray(masses))
        out = np.empty((n, self.dim))
        for i, mass in enumerate(masses):
            sel = np.nonzero(idx == i)[0]
            if len(sel) == 0:
                continue
            if i < len(self._piece_masses):
                lo, hi = self._piece_angles[i]
            else:
                lo, hi = self.cap_angles[0], math.pi - self.cap_angles[0]
            theta = self._sample_polar(rng, len(sel), lo, hi)
            if self.dim == 2:
                sign = np.where(rng.random(len(sel)) < 0.5, 1.0, -1.0)
                tang = sign[:, None] * self._basis[0]
            else:
                tang = _uniform_sphere(rng, len(sel), self.dim - 1) @ self._basis
            u = np.cos(theta)[:, None] * self.axis + np.sin(theta)[:, None] * tang
            if i < len(self._piece_masses):
                flip = np.where(rng.random(len(sel)) < 0.5, 1.0, -1.0)
                u = flip[:, None] * u
            out[sel] = u
        return out


class Mixture:
    """Finite mixture of directional distributions."""

    def __init__(self, components):
        comps = list(components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        w = np.array([float(c[0]) for c in comps])
        if w.min() <= 0 or abs(w.sum() - 1.0) > MASS_TOL:
            raise ValueError("mixture weights must be positive and sum to 1")
        dims = {c[1].dim for c in comps}
        if len(dims) != 1:
            raise ValueError("mixture components must share a dimension")
        self.weights = w
        self.components = [c[1] for c in comps]
        self.dim = dims.pop()

    def sample_batch(self, rng, n: int) -> np.ndarray:
        idx = rng.choice(len(self.weights), size=n, p=self.weights)
        out = np.empty((n, self.dim))
        for i, comp in enumerate(self.components):
            sel = np.nonzero(idx == i)[0]
            if len(sel):
                out[sel] = comp.sample_batch(rng, len(sel))
        return out


DirectionalDistribution = Isotropic | Atomic | DensityOnSphere | CapStarved | Mixture


def _orthonormal_complement(axis: np.ndarray) -> np.ndarray:
    """Rows form an orthonormal basis of the hyperplane orthogonal to axis."""
    d = len(axis)
    M = np.eye(d) - np.outer(axis, axis)
    q, r = np.linalg.qr(M)
    cols = np.argsort(-np.abs(np.diag(r)))[: d - 1]
    return q[:, sorted(cols)].T


# ---------------------------------------------------------------------------
# operations


def sample_direction(dist: DirectionalDistribution, rng) -> np.ndarray:
    """Draw one direction from the distribution."""
    return dist.sample_batch(rng, 1)[0]


def sample_directions(dist: DirectionalDistribution, rng, n: int) -> np.ndarray:
    """Draw n directions (vectorized)."""
    return dist.sample_batch(rng, n)


def _simpson_circle(f, nodes: int) -> float:
    """Composite Simpson average of f over the unit circle."""
    n = nodes if nodes % 2 == 0 else nodes + 1
    theta = np.linspace(0.0, 2.0 * math.pi, n + 1)
    U = np.column_stack([np.cos(theta), np.sin(theta)])
    vals = _eval_batch(f, U)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    h = 2.0 * math.pi / n
    return float((w * vals).sum() * h / 3.0 / (2.0 * math.pi))


def _mc_indices(cfg: IntegrationConfig):
    return hrng.stream(cfg.seed, "integrate")


def integrate(dist: DirectionalDistribution, f, cfg: IntegrationConfig | None = None) -> IntegralResult:
    """Integral of f against the distribution.

    Exact for atoms, composite Simpson in the plane, antithetic Monte
    Carlo otherwise (stderr reported; 0 for the deterministic paths).
    """
    cfg = cfg or IntegrationConfig()
    if isinstance(dist, Atomic):
        vals = _eval_batch(f, dist.atoms)
        return IntegralResult(float(vals @ dist.weights), 0.0)
    if isinstance(dist, Mixture):
        parts = [integrate(c, f, cfg) for c in dist.components]
        val = float(sum(w * p.value for w, p in zip(dist.weights, parts)))
        se = math.sqrt(sum((w * p.stderr) ** 2 for w, p in zip(dist.weights, parts)))
        return IntegralResult(val, se)
    if dist.dim == 2:
        if isinstance(dist, Isotropic):
            return IntegralResult(_simpson_circle(f, cfg.nodes), 0.0)
        if isinstance(dist, DensityOnSphere):
            g = dist.density
            return IntegralResult(
                _simpson_circle(lambda U: _eval_batch(f, U) * g(U), cfg.nodes), 0.0
            )
        if isinstance(dist, CapStarved):
            return IntegralResult(_cap_starved_integral_2d(dist, f, cfg), 0.0)
    # Monte Carlo with antithetic pairs (exact for odd integrand parts)
    rng = _mc_indices(cfg)
    m = max(2, cfg.samples // 2)
    if isinstance(dist, Isotropic):
        U = _uniform_sphere(rng, m, dist.dim)
        vals = 0.5 * (_eval_batch(f, U) + _eval_batch(f, -U))
    elif isinstance(dist, DensityOnSphere):
        U = _uniform_sphere(rng, m, dist.dim)
        vals = dist.density(U) * 0.5 * (_eval_batch(f, U) + _eval_batch(f, -U))
    else:
        U = dist.sample_batch(rng, m)
        vals = 0.5 * (_eval_batch(f, U) + _eval_batch(f, -U))
    return IntegralResult(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(m)))


def _cap_starved_integral_2d(dist: CapStarved, f, cfg: IntegrationConfig) -> float:
    """Exact piecewise integration for the planar cap-starved density."""
    alpha = math.atan2(dist.axis[1], dist.axis[0])

    def arc_avg(lo, hi, nodes=96):
        # average of f over the two polar arcs at +-azimuth, both cap sides
        n = nodes + nodes % 2
        t = np.linspace(lo, hi, n + 1)
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        total = 0.0
        for sign_axis in (0.0, math.pi):
            for sign_az in (1.0, -1.0):
                ang = alpha + sign_axis + sign_az * t
                U = np.column_stack([np.cos(ang), np.sin(ang)])
                total += float((w * _eval_batch(f, U)).sum() * (hi - lo) / n / 3.0)
        return total / (4.0 * (hi - lo))

    total = 0.0
    for (lo, hi), mass in zip(dist._piece_angles, dist._piece_masses):
        total += 2.0 * mass * arc_avg(lo, hi)
    lo = dist.cap_angles[0]
    hi = math.pi / 2.0
    # outside region: band between the caps; by symmetry integrate to pi/2
    total += dist.outside_mass * arc_avg(lo, hi)
    return total


@dataclass(frozen=True)
class MeasureSupport:
    """Support descriptor: the full sphere or a finite antipodal atom set."""

    kind: str  # "full" | "atoms"
    atoms: np.ndarray | None = None


def nondegenerate(dist: DirectionalDistribution) -> bool:
    """Whether the support spans R^d (not concentrated on a great subsphere).

    This is the property that keeps cells of the induced hyperplane
    process bounded; it applies to the distribution as a whole, so an
    atomic component on a subsphere is fine inside a richer mixture.
    """
    sup = support_of(dist)
    if sup.kind == "full":
        return True
    return int(np.linalg.matrix_rank(sup.atoms, tol=1e-9)) == dist.dim


def support_of(dist: DirectionalDistribution) -> MeasureSupport:
    """Support of the distribution (full sphere unless purely atomic)."""
    if isinstance(dist, Atomic):
        return MeasureSupport("atoms", dist.atoms.copy())
    if isinstance(dist, Mixture):
        subs = [support_of(c) for c in dist.components]
        if any(s.kind == "full" for s in subs):
            return MeasureSupport("full")
        return MeasureSupport("atoms", np.vstack([s.atoms for s in subs]))
    return MeasureSupport("full")


def supports_approximation(body, dist: DirectionalDistribution) -> bool:
    """Whether supp S_(d-1)(body, .) is contained in supp(dist).

    True exactly when arbitrarily close Hausdorff approximation of the
    body by cells of the process is possible.
    """
    sm = surface_measure(body)
    sup = support_of(dist)
    if sup.kind == "full":
        return True
    if sm.has_density:
        return False
    for normal, _ in sm.atoms:
        dev = np.linalg.norm(sup.atoms - normal, axis=1).min()
        if dev > math.sqrt(2.0 * ANGULAR_TOL):  # chord length for angular tol
            return False
    return True


def from_surface_measure(body, mix: float = 0.0) -> DirectionalDistribution:
    """Normalized (symmetrized) surface area measure, blended with isotropic.

    The result dominates a positive multiple of the body's surface
    measure; with mix > 0 it also dominates a multiple of the uniform
    measure.
    """
    if not 0.0 <= mix <= 1.0:
        raise ValueError("mix must lie in [0, 1]")
    sm = surface_measure(body)
    atom_mass = sum(w for _, w in sm.atoms)
    dens_mass = sm.sphere_density * sphere_area(sm.dim) if sm.has_density else 0.0
    total = atom_mass + dens_mass
    comps: list[tuple[float, DirectionalDistribution]] = []
    if atom_mass > 0:
        # symmetrize: surface measures of asymmetric polytopes are not even
        merged: list[tuple[np.ndarray, float]] = []
        for u, w in sm.atoms:
            for i, (v, _) in enumerate(merged):
                if np.linalg.norm(v - u) < 1e-12 or np.linalg.norm(v + u) < 1e-12:
                    merged[i] = (v, merged[i][1] + w)
                    break
            else:
                merged.append((u, w))
        axes = np.array([v for v, _ in merged])
        ws = np.array([w for _, w in merged])
        comps.append(((1.0 - mix) * atom_mass / total, Atomic.symmetrized(axes, ws)))
    iso_weight = (1.0 - mix) * dens_mass / total + mix
    if iso_weight > 0:
        comps.append((iso_weight, Isotropic(sm.dim)))
    if len(comps) == 1:
        return comps[0][1]
    return Mixture(comps)


def cap_starved(
    axis,
    eps_schedule: Callable[[int], float],
    n_max: int,
    budget: Callable[[int], float],
    radius: float = 1.0,
) -> CapStarved:
    """Even density starving the caps around one normal direction.

    Shell masses are chosen so the one-sided cap mass phi(S_n) satisfies
    2 n eps_n phi(S_n) < budget(n) for every n <= n_max, where S_n is the
    polar cap with cosine threshold radius/(radius + eps_n).  The
    remaining mass is uniform outside the largest cap, and the whole
    measure is even with full support.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    eps = np.array([float(eps_schedule(n)) for n in range(1, n_max + 1)])
    if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ValueError("eps schedule must be positive and strictly decreasing")
    budgets = np.array([float(budget(n)) for n in range(1, n_max + 1)])
    if np.any(budgets <= 0):
        raise InfeasibleBudget("budget must be positive for every n")
    with np.errstate(over="ignore"):
        limits = budgets / (2.0 * np.arange(1, n_max + 1) * eps)
    # conservative prefix minimum: satisfies every earlier budget too
    ceil = 0.4
    masses = 0.75 * np.minimum(np.minimum.accumulate(limits), ceil)
    # enforce strict decrease so every shell keeps positive density
    for i in range(1, n_max):
        masses[i] = min(masses[i], masses[i - 1] * (1.0 - 1e-9))
    if masses[-1] <= 0 or 2.0 * masses[0] >= 1.0:
        raise InfeasibleBudget("cap masses leave no room for a probability measure")
    angles = np.arccos(radius / (radius + eps))
    return CapStarved(axis, angles, masses, 1.0 - 2.0 * masses[0])


# ---------------------------------------------------------------------------
# serialization


def distribution_to_json(dist: DirectionalDistribution) -> dict:
    if isinstance(dist, Isotropic):
        return {"type": "isotropic", "dim": dist.dim}
    if isinstance(dist, Atomic):
        return {
            "type": "atomic",
            "atoms": dist.atoms.tolist(),
            "weights": dist.weights.tolist(),
        }
    if isinstance(dist, CapStarved):
        return {
            "type": "cap_starved",
            "axis": dist.axis.tolist(),
            "cap_angles": dist.cap_angles.tolist(),
            "cap_masses": dist.cap_masses.tolist(),
            "outside_mass": dist.outside_mass,
        }
    if isinstance(dist, Mixture):
        return {
            "type": "mixture",
            "components": [
                {"weight": float(w), "dist": distribution_to_json(c)}
                for w, c in zip(dist.weights, dist.components)
            ],
        }
    raise ValueError(f"distribution {type(dist).__name__} is not JSON-serializable")


def distribution_from_json(obj: dict) -> DirectionalDistribution:
    kind = obj.get("type")
    if kind == "isotropic":
        return Isotropic(obj["dim"])
    if kind == "atomic":
        return Atomic(obj["atoms"], obj["weights"])
    if kind == "cap_starved":
        return CapStarved(obj["axis"], obj["cap_angles"], obj["cap_masses"], obj["outside_mass"])
    if kind == "mixture":
        return Mixture(
            [(c["weight"], distribution_from_json(c["dist"])) for c in obj["components"]]
        )
    raise ValueError(f"unknown distribution type {kind!r}")
