"""Invariant battery behind the `validate` CLI subcommand.

Each check exercises one module's oracle identity or distributional
property at desk scale with a fixed seed; the suite is the quick
self-diagnosis counterpart of the full pytest run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hypercell import cell, direction as dn, geom, metrics, process
from hypercell.rng import KeyedStream, stream

SEED = 1_000_003


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str


def _bodies():
    square = geom.Polytope([[-1, -1], [1, -1], [1, 1], [-1, 1]])
    ball = geom.Ball([0, 0], 1.0)
    stadium = geom.BallSum([[-1, 0], [1, 0]], 1.0)
    return square, ball, stadium


def run_all(verbose: bool = True) -> list[CheckResult]:
    checks = [
        _c_support_sublinear,
        _c_parallel_sample_distance,
        _c_surface_mass,
        _c_hausdorff_dense_boundary,
        _c_integrate_constants,
        _c_atomic_bruteforce,
        _c_evenness_sign,
        _c_support_inclusion_table,
        _c_hitting_contract,
        _c_offset_uniformity,
        _c_cap_fraction,
        _c_thinning_consistency,
        _c_determinism,
        _c_intersection_oracle,
        _c_cell_contains_body,
        _c_cell_nesting,
        _c_certificate_stability,
        _c_mu_oracle_gap,
        _c_mu_monotone,
        _c_excess_ray_monotone,
    ]
    results = []
    for fn in checks:
        res = fn()
        results.append(res)
        if verbose:
            print(f"{'PASS' if res.ok else 'FAIL'}  {res.name}: {res.detail}")
    if verbose:
        bad = sum(1 for r in results if not r.ok)
        print(f"{len(results) - bad}/{len(results)} checks passed")
    return results


def _c_support_sublinear() -> CheckResult:
    rng = stream(SEED, "sublinear")
    worst = -math.inf
    for body in _bodies():
        U = rng.standard_normal((400, 2))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        a, b = U[:200], U[200:]
        s = a + b
        ns = np.linalg.norm(s, axis=1)
        keep = ns > 1e-9
        lhs = body.support_batch(s[keep] / ns[keep, None]) * ns[keep]
        rhs = body.support_batch(a[keep]) + body.support_batch(b[keep])
        worst = max(worst, float((lhs - rhs).max()))
    return CheckResult("support sublinearity", worst <= 1e-9, f"max violation {worst:.2e}")


def _c_parallel_sample_distance() -> CheckResult:
    rng = stream(SEED, "psample")
    worst = 0.0
    for body in _bodies():
        for eps in (0.05, 0.7):
            Y = np.array([geom.parallel_boundary_sample(body, eps, rng) for _ in range(200)])
            worst = max(worst, float(np.abs(body.distance_batch(Y) - eps).max()))
    return CheckResult("offset boundary sampling distance", worst <= 1e-9, f"max |d-eps| {worst:.2e}")


def _c_surface_mass() -> CheckResult:
    square, ball, stadium = _bodies()
    targets = [(square, 8.0), (ball, 2 * math.pi), (stadium, 4 + 2 * math.pi)]
    worst = max(abs(geom.surface_measure(b).total_mass - m) for b, m in targets)
    return CheckResult("surface measure mass", worst <= 1e-9, f"max |mass err| {worst:.2e}")


def _c_hausdorff_dense_boundary() -> CheckResult:
    square, _, _ = _bodies()
    eps = 0.25
    path = geom.boundary_path(square, eps)
    pts = path.point_at(np.linspace(0, path.total, 4000, endpoint=False))
    got = geom.hausdorff_containing(square, pts, certificate=None)
    return CheckResult("dense offset boundary Hausdorff", abs(got - eps) <= 1e-6, f"{got:.8f} vs {eps}")


def _c_integrate_constants() -> CheckResult:
    square, ball, stadium = _bodies()
    dists = [
        dn.Isotropic(2),
        dn.Atomic.symmetrized([[1, 0], [0, 1]], [0.5, 0.5]),
        dn.from_surface_measure(stadium, 0.25),
        dn.cap_starved([1, 0], lambda n: n**-0.25, 16, lambda n: math.inf if n == 1 else abs(math.log1p(-(n**-2)))),
    ]
    worst = 0.0
    for d in dists:
        res = dn.integrate(d, lambda U: np.ones(len(U)))
        worst = max(worst, abs(res.value - 1.0))
    return CheckResult("integrate normalization", worst <= 1e-9, f"max |mass-1| {worst:.2e}")


def _c_atomic_bruteforce() -> CheckResult:
    square, _, _ = _bodies()
    at = dn.Atomic.symmetrized([[1, 0], [0, 1]], [0.7, 0.3])
    val = dn.integrate(at, square.support_batch).value
    brute = float(sum(w * square.support(u) for u, w in zip(at.atoms, at.weights)))
    return CheckResult("atomic integrate equals brute sum", abs(val - brute) <= 1e-12, f"diff {abs(val-brute):.2e}")


def _c_evenness_sign() -> CheckResult:
    rng = stream(SEED, "even")
    w = np.array([0.3, 0.95])
    w /= np.linalg.norm(w)
    worst = 0.0
    for d in (
        dn.Isotropic(2),
        dn.Atomic.symmetrized([[1, 0], [0, 1]], [0.5, 0.5]),
        dn.cap_starved([1, 0], lambda n: n**-0.5, 8, lambda n: math.inf if n == 1 else abs(math.log1p(-(n**-2)))),
    ):
        U = d.sample_batch(rng, 40000)
        frac = float((U @ w > 0).mean())
        worst = max(worst, abs(frac - 0.5))
    # 99% two-sided binomial bound at n=40000
    return CheckResult("evenness sign test", worst <= 2.58 * 0.5 / math.sqrt(40000), f"max |frac-1/2| {worst:.4f}")


def _c_support_inclusion_table() -> CheckResult:
    square, ball, stadium = _bodies()
    at = dn.Atomic.symmetrized([[1, 0], [0, 1]], [0.5, 0.5])
    iso = dn.Isotropic(2)
    expected = {
        ("square", "atomic"): True,
        ("square", "isotropic"): True,
        ("ball", "atomic"): False,
        ("ball", "isotropic"): True,
        ("stadium", "atomic"): False,
        ("stadium", "isotropic"): True,
    }
    got = {}
    for bn, b in (("square", square), ("ball", ball), ("stadium", stadium)):
        for dname, d in (("atomic", at), ("isotropic", iso)):
            got[(bn, dname)] = dn.supports_approximation(b, d)
    return CheckResult("support inclusion table", got == expected, f"{sum(got[k]==expected[k] for k in expected)}/6 agree")


def _c_hitting_contract() -> CheckResult:
    square, ball, _ = _bodies()
    rng = stream(SEED, "hit")
    params = process.ProcessParams(3.0, dn.Isotropic(2), 2)
    ok = True
    for W in (square, ball):
        for _ in range(50):
            for h in process.sample_hitting(params, W, rng):
                ok &= h.t > 0 and process.hits(h, W)
    return CheckResult("hitting sample contract", ok, "all t>0 and hit the window")


def _c_offset_uniformity() -> CheckResult:
    from scipy.stats import kstest

    ball = geom.Ball([0, 0], 1.0)
    rng = stream(SEED, "toff")
    params = process.ProcessParams(30.0, dn.Isotropic(2), 2)
    ts = []
    while len(ts) < 20000:
        ts.extend(h.t for h in process.sample_hitting(params, ball, rng))
    stat = kstest(np.array(ts[:20000]), "uniform").statistic
    crit = 1.63 / math.sqrt(20000)
    return CheckResult("offset uniformity (KS)", stat < crit, f"KS {stat:.5f} < {crit:.5f}")


def _c_cap_fraction() -> CheckResult:
    square, _, _ = _bodies()
    rng = stream(SEED, "capfrac")
    iso = dn.Isotropic(2)
    params = process.ProcessParams(50.0, iso, 2)
    cap_axis = np.array([1.0, 0.0])
    cos_thresh = math.cos(0.5)
    hits_in_cap = 0
    total = 0
    while total < 100000:
        U, T = process._sample_hitting_arrays(params, square, rng)
        hits_in_cap += int(((U @ cap_axis) >= cos_thresh).sum())
        total += len(T)
    # expected fraction: integral of h over the cap / integral of h
    cfg = dn.IntegrationConfig(nodes=8192)
    num = dn.integrate(iso, lambda U: square.support_batch(U) * ((U @ cap_axis) >= cos_thresh), cfg).value
    den = dn.integrate(iso, square.support_batch, cfg).value
    p = num / den
    emp = hits_in_cap / total
    sig = math.sqrt(p * (1 - p) / total)
    return CheckResult("direction cap fraction", abs(emp - p) <= 3 * sig, f"|{emp:.5f}-{p:.5f}| <= 3x{sig:.5f}")


def _c_thinning_consistency() -> CheckResult:
    from scipy.stats import chi2_contingency

    ball = geom.Ball([0, 0], 1.0)
    W = geom.outer_parallel(ball, 1.0)
    params = process.ProcessParams(2.0, dn.Isotropic(2), 2)
    rng = stream(SEED, "thin")
    reps = 3000
    filtered = []
    direct = []
    for _ in range(reps):
        hs = process.sample_hitting(params, W, rng)
        filtered.append(sum(1 for h in hs if not process.hits(h, ball)))
        direct.append(len(process.sample_annulus(params, ball, W, rng)))
    top = max(max(filtered), max(direct))
    bins = np.arange(top + 2)
    f_counts = np.bincount(filtered, minlength=top + 1)
    d_counts = np.bincount(direct, minlength=top + 1)
    keep = (f_counts + d_counts) >= 10
    table = np.vstack([f_counts[keep], d_counts[keep]])
    _, pval, _, _ = chi2_contingency(table)
    return CheckResult("thinning vs annulus counts", pval > 0.001, f"chi-square p={pval:.4f}")


def _c_determinism() -> CheckResult:
    ball = geom.Ball([0, 0], 1.0)
    params = process.ProcessParams(10.0, dn.Isotropic(2), 2)
    a = process.sample_hitting(params, ball, stream(SEED, "det"))
    b = process.sample_hitting(params, ball, stream(SEED, "det"))
    same = len(a) == len(b) and all(
        np.array_equal(x.u, y.u) and x.t == y.t for x, y in zip(a, b)
    )
    return CheckResult("seeded determinism", same, f"{len(a)} hyperplanes identical")


def _c_intersection_oracle() -> CheckResult:
    rng = stream(SEED, "oracle")
    bad = 0
    for _ in range(200):
        n = int(rng.integers(4, 40))
        th = rng.uniform(0, 2 * math.pi, n)
        U = np.column_stack([np.cos(th), np.sin(th)])
        T = rng.uniform(0.3, 2.0, n)
        BU = np.vstack([np.eye(2), -np.eye(2)])
        BT = np.full(4, 50.0)
        fast = cell.halfspace_intersection(U, T, BU, BT)
        slow = cell.halfspace_intersection_bruteforce(U, T, BU, BT)
        if not cell._vertex_sets_match(fast.vertices, slow.vertices, 1e-7):
            bad += 1
    return CheckResult("planar fast path vs subset oracle", bad == 0, f"{bad}/200 mismatches")


def _c_cell_contains_body() -> CheckResult:
    ball = geom.Ball([0, 0], 1.0)
    params = process.ProcessParams(40.0, dn.Isotropic(2), 2)
    worst = math.inf
    for rep in range(50):
        z = cell.k_cell(params, ball, stream_key=KeyedStream(SEED, "contain", rep))
        worst = min(worst, float((z.offsets - ball.support_batch(z.normals)).min()))
    return CheckResult("body inside cell (t > h)", worst > 0, f"min slack {worst:.2e}")


def _c_cell_nesting() -> CheckResult:
    square, _, _ = _bodies()
    params = process.ProcessParams(1.0, dn.Isotropic(2), 2)
    cells = cell.cells_along_intensity(params, square, [4, 16, 64], stream_key=KeyedStream(SEED, "nest"))
    ok = True
    for za, zb in zip(cells, cells[1:]):
        if len(zb.vertices) and len(za.offsets):
            ok &= bool(np.all(zb.vertices @ za.normals.T <= za.offsets + 1e-9))
    return CheckResult("cell nesting along intensities", ok, "vertex inclusion holds")


def _c_certificate_stability() -> CheckResult:
    ball = geom.Ball([0, 0], 1.0)
    params = process.ProcessParams(25.0, dn.Isotropic(2), 2)
    bad = 0
    for rep in range(20):
        key = KeyedStream(SEED, "cert", rep)
        a = cell.k_cell(params, ball, stream_key=key)
        b = cell.k_cell(params, ball, stream_key=key, extra_rings=1)
        if not cell._vertex_sets_match(a.vertices, b.vertices, 1e-9):
            bad += 1
    return CheckResult("window certificate stability", bad == 0, f"{bad}/20 vertex changes")


def _c_mu_oracle_gap() -> CheckResult:
    square = geom.Polytope([[-1, -1], [1, -1], [1, 1], [-1, 1]])
    at = dn.Atomic.symmetrized([[1, 0], [0, 1]], [0.5, 0.5])
    cfg = metrics.MuConfig(coarse_samples=1024)
    est = metrics.mu_estimate(square, at, 0.1, cfg)
    ev = metrics.ExcessEvaluator(square, at)
    path = geom.boundary_path(square, 0.1)
    grid = path.point_at(np.linspace(0, path.total, 200000, endpoint=False))
    oracle = float(ev.batch(grid).min())
    ok = abs(est.value - oracle) <= 1e-4 * max(oracle, 1e-300)
    return CheckResult("planar dense-grid oracle gap", ok, f"|{est.value:.8f}-{oracle:.8f}|")


def _c_mu_monotone() -> CheckResult:
    ball = geom.Ball([0, 0], 1.0)
    iso = dn.Isotropic(2)
    cfg = metrics.MuConfig(coarse_samples=512)
    vals = [metrics.mu_estimate(ball, iso, e, cfg).value for e in (0.05, 0.1, 0.2, 0.4)]
    ok = all(a < b for a, b in zip(vals, vals[1:]))
    return CheckResult("minimal excess monotone in eps", ok, f"{[round(v,6) for v in vals]}")


def _c_excess_ray_monotone() -> CheckResult:
    square = geom.Polytope([[-1, -1], [1, -1], [1, 1], [-1, 1]])
    iso = dn.Isotropic(2)
    rng = stream(SEED, "ray")
    ev = metrics.ExcessEvaluator(square, iso)
    ok = True
    for _ in range(50):
        th = rng.uniform(0, 2 * math.pi)
        v = np.array([math.cos(th), math.sin(th)])
        scales = [1.2, 1.5, 2.0, 3.0]
        vals = [ev.precise(s * v) for s in scales]
        ok &= all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
    return CheckResult("excess monotone along rays", ok, "nondecreasing outward")
