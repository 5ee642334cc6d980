"""Compiled numeric kernels.

Everything here is numba-jitted and intentionally free of fastmath: each
output element is produced by the same sequential instruction stream no
matter how many threads run, so results are bit-identical across thread
counts.  Keep summation order fixed (plain left-to-right loops) -- the
public API promises exact reproducibility, not just tolerance-level.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

__all__ = ["iou_1d", "iou_matrix", "greedy_unique"]


@njit(cache=True)
def iou_1d(a, b):
    """Sum-min over sum-max of two non-negative 256-bin arrays."""
    smin = 0.0
    smax = 0.0
    for k in range(a.shape[0]):
        x = a[k]
        y = b[k]
        if x < y:
            smin += x
            smax += y
        else:
            smin += y
            smax += x
    if smax == 0.0:
        return -1.0  # undefined; callers reject all-zero inputs first
    return smin / smax


@njit(parallel=True, cache=True)
def iou_matrix(A, B):
    """Pairwise iou_1d between rows of A (n,256) and rows of B (m,256)."""
    n = A.shape[0]
    m = B.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    for i in prange(n):
        for j in range(m):
            smin = 0.0
            smax = 0.0
            for k in range(A.shape[1]):
                x = A[i, k]
                y = B[j, k]
                if x < y:
                    smin += x
                    smax += y
                else:
                    smin += y
                    smax += x
            out[i, j] = smin / smax
    return out


@njit(cache=True)
def greedy_unique(cf_idx, af_idx, n_cf, n_af):
    """Accept rows in the given order subject to per-side uniqueness.

    cf_idx/af_idx are parallel arrays already sorted by acceptance
    priority.  Returns positions of the accepted rows, in order.
    """
    used_cf = np.zeros(n_cf, dtype=np.bool_)
    used_af = np.zeros(n_af, dtype=np.bool_)
    cap = min(n_cf, n_af)
    out = np.empty(cap, dtype=np.int64)
    taken = 0
    for p in range(cf_idx.shape[0]):
        ci = cf_idx[p]
        ai = af_idx[p]
        if used_cf[ci] or used_af[ai]:
            continue
        used_cf[ci] = True
        used_af[ai] = True
        out[taken] = p
        taken += 1
        if taken == cap:
            break
    return out[:taken]
