#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--batch 64] [--repeats 5]
"""

import argparse
import time

import numpy as np

from misdiag.classifier import kernels_np

try:
    from misdiag.classifier import _kernels_cy
except ImportError:
    _kernels_cy = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(backend, name, batch, repeats):
    rng = np.random.default_rng(0)
    x1 = rng.normal(size=(batch, 3, 32, 32))
    w1 = rng.normal(size=(8, 3, 3, 3))
    b1 = rng.normal(size=8)
    x2 = rng.normal(size=(batch, 8, 16, 16))
    w2 = rng.normal(size=(16, 8, 3, 3))
    b2 = rng.normal(size=16)
    gy1 = rng.normal(size=(batch, 8, 32, 32))
    gy2 = rng.normal(size=(batch, 16, 16, 16))
    rows = []
    rows.append(("conv 3->8 fwd", timeit(lambda: backend.conv2d_forward(x1, w1, b1), repeats)))
    rows.append(("conv 3->8 bwd", timeit(lambda: backend.conv2d_backward(x1, w1, gy1), repeats)))
    rows.append(("conv 8->16 fwd", timeit(lambda: backend.conv2d_forward(x2, w2, b2), repeats)))
    rows.append(("conv 8->16 bwd", timeit(lambda: backend.conv2d_backward(x2, w2, gy2), repeats)))
    y, idx = backend.maxpool2_forward(x1)
    rows.append(("maxpool fwd", timeit(lambda: backend.maxpool2_forward(x1), repeats)))
    rows.append(("maxpool bwd", timeit(lambda: backend.maxpool2_backward(idx, y), repeats)))
    print(f"\n{name} (batch={batch}, best of {repeats}):")
    for label, t in rows:
        print(f"  {label:<16} {t * 1e3:8.2f} ms")
    return dict(rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batch", type=int, default=64)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    np_rows = bench(kernels_np, "numpy fallback", args.batch, args.repeats)
    if _kernels_cy is None:
        print("\ncompiled extension not built; skipping comparison")
        return
    cy_rows = bench(_kernels_cy, "cython extension", args.batch, args.repeats)
    print("\nspeedup (numpy / cython):")
    for label in np_rows:
        print(f"  {label:<16} {np_rows[label] / cy_rows[label]:6.2f}x")


if __name__ == "__main__":
    main()
