#!/usr/bin/env python3
"""Benchmark the compiled quantizer core against the pure-Python fallback.

The sequential state recursions are the only part of the pipeline that cannot
be vectorized with numpy, so they dominate runtime without the extension.
Usage: python benchmarks/bench_backends.py [--m 4096] [--rows 64]
"""

import argparse
import time

import numpy as np

from qrff import _fallback

try:
    from qrff import _native
except ImportError:
    _native = None


def time_fn(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench(m: int, rows: int) -> None:
    rng = np.random.default_rng(0)
    Z = np.ascontiguousarray(np.cos(rng.uniform(0, 2 * np.pi, (rows, m))))
    q = np.empty(m)
    u = np.empty(m)
    h2 = np.ascontiguousarray([2.0, -1.0])

    cases = {
        "first-order": lambda impl: [impl.sd1(Z[i], 1, 0.0, q, u) for i in range(rows)],
        "second-order": lambda impl: [impl.sd_filtered(Z[i], 4, h2, q, u) for i in range(rows)],
        "beta blocks": lambda impl: [impl.beta_run(Z[i], 1, 1.5, 8, q, u) for i in range(rows)],
    }

    print(f"rows={rows}, m={m} (seconds per full batch, best of 5)")
    header = f"{'kernel':>14} {'python':>10}" + ("" if _native is None else f" {'native':>10} {'speedup':>9}")
    print(header)
    for name, runner in cases.items():
        t_py = time_fn(lambda: runner(_fallback))
        line = f"{name:>14} {t_py:>10.4f}"
        if _native is not None:
            t_nat = time_fn(lambda: runner(_native))
            line += f" {t_nat:>10.4f} {t_py / t_nat:>8.1f}x"
        print(line)
    if _native is None:
        print("compiled extension not available; showing fallback only")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--m", type=int, default=4096)
    parser.add_argument("--rows", type=int, default=64)
    args = parser.parse_args()
    bench(args.m, args.rows)
