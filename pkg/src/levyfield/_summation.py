"""Deterministic reductions.

numpy's ``add.reduce`` over a contiguous float64 axis uses blocked pairwise
summation, so the result depends only on the element order. Callers fix the
order (lexicographic point order) before reducing.
"""

import numpy as np


def pairwise_sum(values, axis=-1):
    """Pairwise sum of ``values`` along ``axis`` (contiguous copy first)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        return float(arr)
    arr = np.ascontiguousarray(np.moveaxis(arr, axis, -1))
    out = np.add.reduce(arr, axis=-1)
    return float(out) if out.ndim == 0 else out


def lexsort_points(points):
    """Indices that sort an ``(N, d)`` integer array lexicographically (first axis major)."""
    points = np.asarray(points)
    if points.shape[0] == 0:
        return np.zeros(0, dtype=np.intp)
    return np.lexsort(points.T[::-1])
