"""Edit-distance DP kernels.

Two interchangeable implementations of the (n+1)x(m+1) cost-matrix fill:
a numba @njit scalar loop and a vectorized numpy row sweep. Backend is
chosen by the BIASFORGE_BACKEND environment variable ("numba" or "numpy";
default prefers numba when importable). Both produce identical matrices;
the backtrace lives in align.py and is backend independent.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


@njit(cache=True)
def _dp_fill_numba(ref_ids: np.ndarray, hyp_ids: np.ndarray) -> np.ndarray:
    n = ref_ids.shape[0]
    m = hyp_ids.shape[0]
    dist = np.empty((n + 1, m + 1), dtype=np.int32)
    for j in range(m + 1):
        dist[0, j] = j
    for i in range(1, n + 1):
        dist[i, 0] = i
        r = ref_ids[i - 1]
        for j in range(1, m + 1):
            cost = 0 if r == hyp_ids[j - 1] else 1
            best = dist[i - 1, j - 1] + cost
            up = dist[i - 1, j] + 1
            if up < best:
                best = up
            left = dist[i, j - 1] + 1
            if left < best:
                best = left
            dist[i, j] = best
    return dist


def _dp_fill_numpy(ref_ids: np.ndarray, hyp_ids: np.ndarray) -> np.ndarray:
    n = ref_ids.shape[0]
    m = hyp_ids.shape[0]
    dist = np.empty((n + 1, m + 1), dtype=np.int32)
    offsets = np.arange(m + 1, dtype=np.int32)
    dist[0] = offsets
    for i in range(1, n + 1):
        prev = dist[i - 1]
        diag = prev[:-1] + (hyp_ids != ref_ids[i - 1])
        up = prev[1:] + 1
        partial = np.minimum(diag, up)
        # Left-to-right insertion propagation row[j] = min(partial[j],
        # row[j-1] + 1) via the prefix-min of (value - column) trick.
        row = np.empty(m + 1, dtype=np.int32)
        row[0] = i
        row[1:] = partial
        dist[i] = np.minimum.accumulate(row - offsets) + offsets
    return dist


def default_backend() -> str:
    env = os.environ.get("BIASFORGE_BACKEND", "").strip().lower()
    if env in ("numba", "numpy"):
        return env
    if env:
        raise ValueError(f"BIASFORGE_BACKEND must be 'numba' or 'numpy', got {env!r}")
    return "numba" if HAS_NUMBA else "numpy"


def dp_fill(ref_ids: np.ndarray, hyp_ids: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Full edit-distance cost matrix for two int id sequences."""
    if backend is None:
        backend = default_backend()
    if backend == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return _dp_fill_numba(ref_ids, hyp_ids)
    if backend == "numpy":
        return _dp_fill_numpy(ref_ids, hyp_ids)
    raise ValueError(f"unknown backend {backend!r}")
