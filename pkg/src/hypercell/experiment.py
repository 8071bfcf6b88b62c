"""Seeded Monte Carlo harnesses and persistence.

Three experiment families: convergence-rate runs (cells along an
increasing intensity grid, median Hausdorff distances fitted against the
normalizing sequence log(n)/n), tail runs (exceedance probabilities of a
fixed offset across intensities), and the cap-starved counterexample
(frequencies of the distance staying above a prescribed schedule).

Replications are independent tasks keyed by (seed, rep); aggregation is
a deterministic fold in rep order, so results do not depend on thread
scheduling, and a rerun with the same seed reproduces output files
byte for byte.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from hypercell import direction as dn
from hypercell import geom, metrics
from hypercell.cell import WindowPolicy, cells_along_intensity
from hypercell.errors import AllZeroTail, ConfigError, DegenerateX, WindowOverflow
from hypercell.process import ProcessParams
from hypercell.rng import KeyedStream

__all__ = [
    "RateRunConfig",
    "TailRunConfig",
    "CounterexampleConfig",
    "FitResult",
    "RunRecord",
    "ExperimentResult",
    "run_rate",
    "run_tail",
    "run_counterexample",
    "fit_loglog",
    "persist",
    "read_records",
]

CSV_HEADER = ["rep", "n", "delta", "hyperplanes", "rounds", "overflow"]


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r_squared,
            "n_points": self.n_points,
        }


@dataclass(frozen=True)
class RunRecord:
    rep: int
    n: float
    delta: float  # nan when the replication overflowed
    hyperplanes: int
    rounds: int
    overflow: int

    def row(self) -> list:
        return [self.rep, self.n, self.delta, self.hyperplanes, self.rounds, self.overflow]


@dataclass(frozen=True)
class RateRunConfig:
    body: object
    distribution: object
    n_grid: tuple
    reps: int
    seed: int
    expected_exponent: float | None = None
    policy: WindowPolicy = field(default_factory=WindowPolicy)
    debug_oracle: bool = False

    def __post_init__(self):
        grid = tuple(self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if any(b <= a for a, b in zip(grid, grid[1:])) or not grid:
            raise ConfigError("n_grid must be nonempty and strictly increasing")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")

    def to_json(self) -> dict:
        out = {
            "experiment": "rate",
            "body": geom.body_to_json(self.body),
            "distribution": dn.distribution_to_json(self.distribution),
            "n_grid": list(self.n_grid),
            "reps": self.reps,
            "seed": self.seed,
            "policy": _policy_to_json(self.policy),
        }
        if self.expected_exponent is not None:
            out["expected_exponent"] = self.expected_exponent
        return out


@dataclass(frozen=True)
class TailRunConfig:
    body: object
    distribution: object
    eps: float
    gamma_grid: tuple
    reps: int
    seed: int
    policy: WindowPolicy = field(default_factory=WindowPolicy)
    debug_oracle: bool = False

    def __post_init__(self):
        grid = tuple(self.gamma_grid)
        object.__setattr__(self, "gamma_grid", grid)
        if not 0 < self.eps <= 1:
            raise ConfigError("tail eps must lie in (0, 1]")
        if any(g < 1 for g in grid):
            raise ConfigError("tail gamma grid assumes gamma >= 1")
        if any(b <= a for a, b in zip(grid, grid[1:])) or not grid:
            raise ConfigError("gamma_grid must be nonempty and strictly increasing")

    def to_json(self) -> dict:
        return {
            "experiment": "tail",
            "body": geom.body_to_json(self.body),
            "distribution": dn.distribution_to_json(self.distribution),
            "eps": self.eps,
            "gamma_grid": list(self.gamma_grid),
            "reps": self.reps,
            "seed": self.seed,
            "policy": _policy_to_json(self.policy),
        }


@dataclass(frozen=True)
class CounterexampleConfig:
    body: object
    beta: float
    n_grid: tuple
    reps: int
    seed: int
    policy: WindowPolicy = field(default_factory=WindowPolicy)
    control: bool = False  # isotropic control instead of the starved law
    debug_oracle: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(self.n_grid))
        if not isinstance(self.body, (geom.Ball, geom.BallSum)):
            raise ConfigError(
                "counterexample body must carry a rolling ball (Ball or BallSum)"
            )
        if self.beta <= 0:
            raise ConfigError("beta must be positive")

    def to_json(self) -> dict:
        return {
            "experiment": "counterexample",
            "body": geom.body_to_json(self.body),
            "beta": self.beta,
            "n_grid": list(self.n_grid),
            "reps": self.reps,
            "seed": self.seed,
            "policy": _policy_to_json(self.policy),
            "control": self.control,
        }


def _policy_to_json(policy: WindowPolicy) -> dict:
    return {
        "initial_radius": policy.initial_radius,
        "growth_factor": policy.growth_factor,
        "max_rounds": policy.max_rounds,
    }


def policy_from_json(obj: dict) -> WindowPolicy:
    return WindowPolicy(
        initial_radius=obj.get("initial_radius"),
        growth_factor=obj.get("growth_factor", 2.0),
        max_rounds=obj.get("max_rounds", 40),
    )


@dataclass
class ExperimentResult:
    """Records plus aggregates; the JSON document embeds the config echo."""

    config: dict
    records: list
    per_n: list
    fit: FitResult | None
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        doc = {
            "config": self.config,
            "per_n": self.per_n,
            "fit": self.fit.to_json() if self.fit is not None else None,
        }
        doc.update(self.extras)
        return doc


# ---------------------------------------------------------------------------
# single-replication workers (top level so process pools can pickle them)


def _rate_rep(cfg: RateRunConfig, rep: int) -> list[RunRecord]:
    params = ProcessParams(1.0, cfg.distribution, cfg.body.dim)
    key = KeyedStream(cfg.seed, rep)
    try:
        cells = cells_along_intensity(
            params, cfg.body, cfg.n_grid, cfg.policy, key, debug_oracle=cfg.debug_oracle
        )
    except WindowOverflow:
        return [
            RunRecord(rep, float(n), math.nan, 0, cfg.policy.max_rounds, 1)
            for n in cfg.n_grid
        ]
    out = []
    prev = math.inf
    for n, z in zip(cfg.n_grid, cells):
        delta = metrics.hausdorff_cell(cfg.body, z)
        if delta > prev + 1e-12:
            raise AssertionError("coupled deltas must be nonincreasing in the intensity")
        prev = delta
        out.append(RunRecord(rep, float(n), delta, z.stats.sampled, z.stats.rounds, 0))
    return out


def _counterexample_rep(args) -> list:
    cfg, rep, dist, y_points = args
    params = ProcessParams(1.0, dist, cfg.body.dim)
    key = KeyedStream(cfg.seed, rep)
    try:
        cells = cells_along_intensity(
            params, cfg.body, cfg.n_grid, cfg.policy, key, debug_oracle=cfg.debug_oracle
        )
    except WindowOverflow:
        return [
            (RunRecord(rep, float(n), math.nan, 0, cfg.policy.max_rounds, 1), 0, 0)
            for n in cfg.n_grid
        ]
    out = []
    for n, z, y in zip(cfg.n_grid, cells, y_points):
        delta = metrics.hausdorff_cell(cfg.body, z)
        eps_n = float(n) ** (-cfg.beta)
        separated = bool(len(z.offsets)) and bool(
            (z.normals @ y - z.offsets).max() > 0.0
        )
        exceeded = delta >= eps_n
        rec = RunRecord(rep, float(n), delta, z.stats.sampled, z.stats.rounds, 0)
        out.append((rec, int(exceeded), int(separated)))
    return out


def _run_reps(worker, tasks, threads: int):
    if threads <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


def _rate_rep_star(args):
    return _rate_rep(*args)


# ---------------------------------------------------------------------------
# experiments


def _check_rate_hypotheses(cfg) -> None:
    if not dn.supports_approximation(cfg.body, cfg.distribution):
        raise ConfigError(
            "directional distribution cannot approximate this body "
            "(surface measure support is not covered)"
        )
    parts = metrics.ExcessEvaluator._flatten(cfg.distribution, 1.0)
    if any(isinstance(c, dn.DensityOnSphere) for _, c in parts):
        warnings.warn(
            "density distribution: no verified uniform lower bound against the "
            "sphere or the surface measure; rate guarantees may not apply",
            stacklevel=3,
        )


def run_rate(cfg: RateRunConfig, threads: int = 1) -> ExperimentResult:
    """Coupled-cell convergence run; fits log median delta vs log(log n / n).

    Replications that overflow the window are excluded from aggregates
    and reported per n in `overflow_count`.
    """
    _check_rate_hypotheses(cfg)
    rep_results = _run_reps(
        _rate_rep_star, [(cfg, rep) for rep in range(cfg.reps)], threads
    )
    records = [r for chunk in rep_results for r in chunk]
    records.sort(key=lambda r: (r.rep, r.n))
    per_n, fit = _aggregate_rate(cfg.n_grid, records)
    return ExperimentResult(cfg.to_json(), records, per_n, fit)


def _aggregate_rate(n_grid, records):
    per_n = []
    xs, ys = [], []
    for n in n_grid:
        deltas = np.array(
            [r.delta for r in records if r.n == float(n) and not r.overflow]
        )
        overflow = sum(1 for r in records if r.n == float(n) and r.overflow)
        entry = {"n": float(n), "overflow_count": overflow}
        if len(deltas):
            entry["median_delta"] = float(np.median(deltas))
            entry["q10"] = float(np.quantile(deltas, 0.1))
            entry["q90"] = float(np.quantile(deltas, 0.9))
            if entry["median_delta"] > 0:
                xs.append(math.log(math.log(n) / n))
                ys.append(math.log(entry["median_delta"]))
        per_n.append(entry)
    fit = fit_loglog(list(zip(xs, ys))) if len(set(xs)) >= 2 else None
    return per_n, fit


def run_tail(cfg: TailRunConfig, threads: int = 1) -> ExperimentResult:
    """Exceedance probabilities P(delta > eps) along an intensity grid.

    Fits log P against gamma over the subgrid with nondegenerate
    estimates; the coupled construction makes P nonincreasing by
    construction.  Raises AllZeroTail when no exceedances occur at all.
    """
    rate_cfg = RateRunConfig(
        cfg.body,
        cfg.distribution,
        cfg.gamma_grid,
        cfg.reps,
        cfg.seed,
        policy=cfg.policy,
        debug_oracle=cfg.debug_oracle,
    )
    _check_rate_hypotheses(rate_cfg)
    rep_results = _run_reps(
        _rate_rep_star, [(rate_cfg, rep) for rep in range(cfg.reps)], threads
    )
    records = [r for chunk in rep_results for r in chunk]
    records.sort(key=lambda r: (r.rep, r.n))
    per_n = []
    xs, ys = [], []
    for g in cfg.gamma_grid:
        flags = np.array(
            [r.delta > cfg.eps for r in records if r.n == float(g) and not r.overflow]
        )
        overflow = sum(1 for r in records if r.n == float(g) and r.overflow)
        p_hat = float(flags.mean()) if len(flags) else math.nan
        per_n.append(
            {"n": float(g), "p_hat": p_hat, "count": int(len(flags)), "overflow_count": overflow}
        )
        if 0.0 < p_hat < 1.0:
            xs.append(float(g))
            ys.append(math.log(p_hat))
    if all(e["p_hat"] == 0.0 for e in per_n if not math.isnan(e["p_hat"])):
        raise AllZeroTail("no exceedances anywhere on the gamma grid; shrink gamma or eps")
    fit = fit_loglog(list(zip(xs, ys))) if len(set(xs)) >= 2 else None
    extras = {}
    if fit is not None:
        mu = metrics.mu_estimate(cfg.body, cfg.distribution, cfg.eps)
        extras["mu_reference"] = {
            "mu": mu.value,
            "abs_slope_over_mu": abs(fit.slope) / mu.value if mu.value > 0 else math.nan,
        }
    return ExperimentResult(cfg.to_json(), records, per_n, fit, extras)


def _counterexample_distribution(cfg: CounterexampleConfig):
    """The starved law (or isotropic control) plus the probe points y_n."""
    body = cfg.body
    r = body.radius
    if isinstance(body, geom.Ball):
        axis = np.zeros(body.dim)
        axis[0] = 1.0
        x_touch = body.center + r * axis
    else:
        # outer normal in a vertex's normal cone: boundary point on an arc
        hull = body.hull_vertices if body.dim == 2 else body.vertices
        v = hull[int(np.argmax(np.linalg.norm(hull, axis=1)))]
        nv = np.linalg.norm(v)
        axis = v / nv if nv > 0 else np.eye(body.dim)[0]
        x_touch = v + r * axis
    n_max = int(max(cfg.n_grid))
    if cfg.control:
        dist = dn.Isotropic(body.dim)
    else:
        dist = dn.cap_starved(
            axis,
            lambda n: float(n) ** (-cfg.beta),
            n_max,
            _default_budget,
            radius=r,
        )
    y_points = [x_touch + float(n) ** (-cfg.beta) * axis for n in cfg.n_grid]
    return dist, y_points


def _default_budget(n: int) -> float:
    if n <= 1:
        return math.inf
    return abs(math.log1p(-(float(n) ** -2)))


def run_counterexample(cfg: CounterexampleConfig, threads: int = 1) -> ExperimentResult:
    """Frequencies of delta_n >= n^(-beta) under the cap-starved law.

    Also reports how often the probe point beyond the touching boundary
    point was separated by a sampled hyperplane; the construction budget
    keeps that frequency below n^-2.
    """
    dist, y_points = _counterexample_distribution(cfg)
    tasks = [(cfg, rep, dist, y_points) for rep in range(cfg.reps)]
    rep_results = _run_reps(_counterexample_rep, tasks, threads)
    triples = [t for chunk in rep_results for t in chunk]
    triples.sort(key=lambda t: (t[0].rep, t[0].n))
    records = [t[0] for t in triples]
    per_n = []
    for n in cfg.n_grid:
        rows = [t for t in triples if t[0].n == float(n) and not t[0].overflow]
        eps_n = float(n) ** (-cfg.beta)
        count = len(rows)
        per_n.append(
            {
                "n": float(n),
                "eps_n": eps_n,
                "count": count,
                "overflow_count": sum(
                    1 for t in triples if t[0].n == float(n) and t[0].overflow
                ),
                "exceed_freq": (sum(t[1] for t in rows) / count) if count else math.nan,
                "separated_freq": (sum(t[2] for t in rows) / count) if count else math.nan,
            }
        )
    violations = {}
    for rec, exceeded, _ in triples:
        if not rec.overflow and not exceeded:
            violations[rec.rep] = violations.get(rec.rep, 0) + 1
    extras = {
        "distribution": dn.distribution_to_json(dist),
        "violations_per_rep": {str(k): v for k, v in sorted(violations.items())},
    }
    return ExperimentResult(cfg.to_json(), records, per_n, None, extras)


# ---------------------------------------------------------------------------
# fitting and persistence


def fit_loglog(points) -> FitResult:
    """Ordinary least squares through the given points.

    Exact on collinear input.  Constant ordinates give slope 0 with
    r-squared reported as 0 (zero explained variance convention).
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len({x for x, _ in pts}) < 2:
        raise DegenerateX("need at least two distinct abscissae")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = float(ym - slope * xm)
    syy = float(((y - ym) ** 2).sum())
    if syy == 0.0:
        return FitResult(0.0, float(ym), 0.0, len(pts))
    resid = y - (intercept + slope * x)
    r2 = 1.0 - float((resid**2).sum()) / syy
    return FitResult(slope, intercept, r2, len(pts))


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def persist(result, path, fmt: str = "csv") -> None:
    """Write records as CSV or the full result document as JSON.

    CSV rows are sorted by (rep, n) so output never depends on the
    execution schedule; reruns with the same seed are byte-identical.
    """
    if fmt == "csv":
        records = result.records if isinstance(result, ExperimentResult) else list(result)
        rows = sorted(records, key=lambda r: (r.rep, r.n))
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for rec in rows:
                writer.writerow([_format_cell(v) for v in rec.row()])
    elif fmt == "json":
        if not isinstance(result, ExperimentResult):
            raise ConfigError("json persistence needs an ExperimentResult")
        with open(path, "w") as fh:
            json.dump(result.to_json(), fh, indent=2, sort_keys=False)
            fh.write("\n")
    else:
        raise ConfigError(f"unknown format {fmt!r}; use csv or json")


def read_records(path) -> list[RunRecord]:
    """Inverse of the CSV side of `persist`."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ConfigError(f"unexpected CSV header {header!r}")
        for row in reader:
            out.append(
                RunRecord(
                    rep=int(row[0]),
                    n=float(row[1]),
                    delta=float(row[2]),
                    hyperplanes=int(row[3]),
                    rounds=int(row[4]),
                    overflow=int(row[5]),
                )
            )
    return out
