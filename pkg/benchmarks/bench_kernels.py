#!/usr/bin/env python3
"""Benchmark the hot kernels under the numba and pure-numpy backends.

The backend flag is read per call, so the same process can time both paths;
numba timings exclude the one-off jit compilation (warmed up first).

Usage: python benchmarks/bench_kernels.py [--depth 12] [--repeats 5]
"""

import argparse
import os
import time

import numpy as np

from gasket_solenoid import kernels
from gasket_solenoid.backend import ENV_VAR, HAS_NUMBA
from gasket_solenoid.distance import GasketGraph
from gasket_solenoid.functions import coordinate_alpha, integrate
from gasket_solenoid.zeta import edge_target_sums


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def build_cases(depth):
    size = 1 << depth
    corners = kernels.subdivide_corners(depth, size)
    a = corners[:, 0].copy()
    b = corners[:, 1].copy()
    a_hi = a + size  # branch-cell points of the next tower level
    exp_a = np.array([0, 1, 2, 1], np.int64)
    exp_b = np.array([1, 0, 0, 1], np.int64)
    coeffs = np.array([0.25, 1.0, -0.125, 0.5])
    vals = kernels.eval_poly_scaled(a, b, size, exp_a, exp_b, coeffs)
    graph = GasketGraph(0, min(depth, 9))
    alpha = coordinate_alpha()

    return [
        ("subdivide corners", lambda: kernels.subdivide_corners(depth, size)),
        ("covering descent", lambda: kernels.descend_scaled(a_hi, b, 1, 0, size)),
        ("polynomial eval", lambda: kernels.eval_poly_scaled(a, b, size, exp_a, exp_b, coeffs)),
        ("compensated sum", lambda: kernels.sum_values(vals)),
        ("edge-quotient max", lambda: kernels.max_pair_diff(vals, vals * 0.5, -vals)),
        ("graph BFS", lambda: kernels.bfs_hops(graph.indptr, graph.indices, 0)),
        ("quadrature (full path)", lambda: integrate(alpha, 0, depth)),
        ("per-class edge sums", lambda: edge_target_sums(alpha, 0, depth)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--depth", type=int, default=12, help="subdivision depth (3**depth cells)")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    if HAS_NUMBA:
        os.environ[ENV_VAR] = "numba"
        kernels.warmup()

    cases = build_cases(args.depth)
    results = {}
    for backend in backends:
        os.environ[ENV_VAR] = backend
        for name, fn in cases:
            fn()  # warm caches / jit
            results[(backend, name)] = time_call(fn, args.repeats)

    width = max(len(n) for n, _ in cases)
    header = f"{'kernel':<{width}}  " + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(f"depth {args.depth}: {3**args.depth} cells, best of {args.repeats}")
    print(header)
    print("-" * len(header))
    for name, _ in cases:
        row = f"{name:<{width}}  "
        for b in backends:
            row += f"{results[(b, name)] * 1e3:>10.2f}ms"
        if len(backends) == 2:
            ratio = results[("numpy", name)] / max(results[("numba", name)], 1e-12)
            row += f"{ratio:>9.2f}x"
        print(row)


if __name__ == "__main__":
    main()
