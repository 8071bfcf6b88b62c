#!/usr/bin/env python3
"""Benchmark: compiled Cython kernels vs the pure NumPy fallback.

Micro-benchmarks call both backends directly; the end-to-end cell
construction runs in subprocesses with HYPERCELL_PURE toggled, since the
backend is fixed at import time.

Usage: python benchmarks/bench_kernels.py [--quick]
"""
import argparse
import math
import os
import subprocess
import sys
import time

import numpy as np

from hypercell import _kernels


def timeit(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def micro_benchmarks(quick: bool):
    rng = np.random.default_rng(7)
    sizes = [64, 1024, 16384] if not quick else [64, 1024]
    repeat = 5 if quick else 15
    backends = {"pure": _kernels.get_backend("pure")}
    try:
        backends["compiled"] = _kernels.get_backend("compiled")
    except ImportError:
        print("compiled backend not built; micro-benchmarks cover the pure path only")

    rows = []
    for n in sizes:
        pts = rng.standard_normal((n, 2))
        poly_pts = rng.standard_normal((24, 2))
        hull = backends["pure"].convex_hull_2d(poly_pts)
        poly = poly_pts[hull]
        queries = rng.uniform(-3, 3, size=(n, 2))
        U = rng.standard_normal((n, 2))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        T = rng.uniform(0.2, 3.0, n)
        V = rng.uniform(-1, 1, size=(16, 2))
        for name, impl in backends.items():
            rows.append((f"convex_hull_2d n={n}", name, timeit(lambda: impl.convex_hull_2d(pts), repeat)))
            rows.append((f"polygon_distance n={n}", name, timeit(lambda: impl.polygon_distance(poly, queries), repeat)))
            rows.append((f"cut_mask n={n}", name, timeit(lambda: impl.cut_mask(U, T, V), repeat)))
    return rows


END_TO_END = r"""
import time
from hypercell import geom, direction, process, cell, metrics
from hypercell.rng import KeyedStream
import hypercell
ball = geom.Ball([0, 0], 1.0)
params = process.ProcessParams(2048.0, direction.Isotropic(2), 2)
t0 = time.time()
for rep in range(40):
    z = cell.k_cell(params, ball, stream_key=KeyedStream(1, rep))
    metrics.hausdorff_cell(ball, z)
print(f"{hypercell.kernel_backend()} {time.time() - t0:.3f}")
"""


def end_to_end():
    rows = []
    for pure in ("0", "1"):
        env = dict(os.environ, HYPERCELL_PURE=pure)
        out = subprocess.run(
            [sys.executable, "-c", END_TO_END], capture_output=True, text=True, env=env
        )
        if out.returncode != 0:
            print(out.stderr, file=sys.stderr)
            continue
        backend, seconds = out.stdout.split()
        rows.append((backend, float(seconds)))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller sizes, fewer repeats")
    args = parser.parse_args()

    rows = micro_benchmarks(args.quick)
    print(f"{'kernel':<28} {'backend':<10} {'best (ms)':>10}")
    print("-" * 50)
    for task, backend, secs in rows:
        print(f"{task:<28} {backend:<10} {secs * 1e3:>10.3f}")

    print("\nend-to-end: 40 cell constructions at intensity 2048 (ball, isotropic)")
    seen = {}
    for backend, secs in end_to_end():
        seen[backend] = secs
        print(f"  {backend:<10} {secs:.3f}s")
    if {"pure", "compiled"} <= set(seen):
        print(f"  speedup   {seen['pure'] / seen['compiled']:.2f}x")


if __name__ == "__main__":
    main()
