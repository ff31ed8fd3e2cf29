#!/usr/bin/env python3
"""Benchmark the alignment DP kernel: numba @njit vs pure numpy.

The DP matrix fill dominates corpus alignment time, so this is the one hot
kernel the package accelerates. Run:

    python3 benchmarks/bench_align.py [--pairs 2000] [--len 30]

The same comparison can be forced at runtime with BIASFORGE_BACKEND=numpy.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from biasforge._kernels import HAS_NUMBA, dp_fill


def make_pairs(n_pairs: int, mean_len: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n_pairs):
        n = max(1, int(rng.poisson(mean_len)))
        m = max(1, int(rng.poisson(mean_len)))
        ref = rng.integers(0, 50, size=n).astype(np.int32)
        hyp = ref[: m].copy() if m <= n else np.concatenate(
            [ref, rng.integers(0, 50, size=m - n).astype(np.int32)]
        )
        flips = rng.random(m) < 0.2
        hyp[flips] = rng.integers(0, 50, size=int(flips.sum()))
        pairs.append((ref, hyp))
    return pairs


def bench(backend: str, pairs) -> float:
    start = time.perf_counter()
    sink = 0
    for ref, hyp in pairs:
        sink += int(dp_fill(ref, hyp, backend=backend)[-1, -1])
    elapsed = time.perf_counter() - start
    print(f"  {backend:>6}: {elapsed * 1000:8.1f} ms total "
          f"({elapsed / len(pairs) * 1e6:7.1f} us/pair, checksum {sink})")
    return elapsed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--len", dest="mean_len", type=int, default=30)
    args = parser.parse_args()

    pairs = make_pairs(args.pairs, args.mean_len)
    print(f"{args.pairs} pairs, mean length {args.mean_len} words")
    if HAS_NUMBA:
        dp_fill(pairs[0][0], pairs[0][1], backend="numba")  # compile outside timing
        t_numba = bench("numba", pairs)
    else:
        print("  numba: not available")
        t_numba = None
    t_numpy = bench("numpy", pairs)
    if t_numba:
        print(f"  speedup: {t_numpy / t_numba:.1f}x")


if __name__ == "__main__":
    main()
