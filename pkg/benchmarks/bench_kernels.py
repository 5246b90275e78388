#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the pure-numpy reference.

Times the two hot operations (the Helmholtz system matvec and the off-grid
field evaluation) at a few problem sizes and reports throughput in million
source-target pairs per second. Run from the repository root:

    python benchmarks/bench_kernels.py [--sizes 2000 8000 32000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from smallscat import kernels
from smallscat.kernels import _ref


def make_problem(n, seed=0):
    rng = np.random.default_rng(seed)
    pts = np.ascontiguousarray(rng.random((n, 3)))
    coef = np.ascontiguousarray(rng.standard_normal(n) * 0.1)
    diag = np.ascontiguousarray(1.0 + 0.01 * rng.standard_normal(n) + 0j)
    x = np.ascontiguousarray(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    targets = np.ascontiguousarray(rng.random((max(n // 8, 1), 3)) * 1.5 - 0.25)
    return pts, coef, diag, x, targets


def best_time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[2000, 8000, 32000])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    print(f"active backend: {kernels.BACKEND}")
    header = f"{'op':<8} {'N':>7} {'compiled':>12} {'numpy':>12} {'speedup':>8} {'Mpairs/s':>10}"
    print(header)
    print("-" * len(header))

    for n in args.sizes:
        pts, coef, diag, x, targets = make_problem(n)
        k = 1.0

        t_fast, y_fast = best_time(lambda: kernels.helm_matvec(pts, coef, diag, k, x), args.repeats)
        t_ref, y_ref = best_time(lambda: _ref.helm_matvec(pts, coef, diag, k, x), args.repeats)
        err = np.max(np.abs(y_fast - y_ref)) / np.max(np.abs(y_ref))
        assert err < 1e-12, f"backend mismatch: {err:.2e}"
        pairs = n * n
        print(f"{'matvec':<8} {n:>7} {t_fast:>11.4f}s {t_ref:>11.4f}s {t_ref / t_fast:>7.1f}x {pairs / t_fast / 1e6:>10.1f}")

        m = targets.shape[0]
        cx = np.ascontiguousarray(coef * x)
        t_fast, v_fast = best_time(lambda: kernels.helm_eval(targets, pts, cx, 0.01, k), args.repeats)
        t_ref, v_ref = best_time(lambda: _ref.helm_eval(targets, pts, cx, 0.01, k), args.repeats)
        err = np.max(np.abs(v_fast - v_ref)) / np.max(np.abs(v_ref))
        assert err < 1e-12, f"backend mismatch: {err:.2e}"
        pairs = m * n
        print(f"{'eval':<8} {n:>7} {t_fast:>11.4f}s {t_ref:>11.4f}s {t_ref / t_fast:>7.1f}x {pairs / t_fast / 1e6:>10.1f}")


if __name__ == "__main__":
    main()
