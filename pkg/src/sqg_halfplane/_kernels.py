"""Pair-scan kernels for Hoelder quotients.

Set ``SQG_HALFPLANE_PURE_NUMPY=1`` to force the numpy path; otherwise the
numba versions are used when numba imports.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

PURE_NUMPY = os.environ.get("SQG_HALFPLANE_PURE_NUMPY", "").lower() in ("1", "true", "yes")
USE_NUMBA = numba is not None and not PURE_NUMPY


# numpy path ------------------------------------------------------------------

def pair_quotient_max_numpy(values, i1, j1, i2, j2, dx1, dx2, L1, a):
    """max |v[p] - v[q]| / |p - q|^a over index pairs, x1 periodic."""
    if i1.size == 0:
        return 0.0
    d1 = np.abs(i1 - i2) * dx1
    d1 = np.minimum(d1, L1 - d1)
    d2 = np.abs(j1 - j2) * dx2
    dist = np.hypot(d1, d2)
    keep = dist > 0
    if not keep.any():
        return 0.0
    diff = np.abs(values[i1[keep], j1[keep]] - values[i2[keep], j2[keep]])
    return float(np.max(diff / dist[keep] ** a))


def neighbour_quotient_max_numpy(values, dx1, dx2, a):
    h = np.abs(np.roll(values, -1, axis=0) - values).max() / dx1**a
    v = np.abs(np.diff(values, axis=1)).max() / dx2**a if values.shape[1] > 1 else 0.0
    return float(max(h, v))


# numba path ------------------------------------------------------------------

def _pair_quotient_max_loop(values, i1, j1, i2, j2, dx1, dx2, L1, a):
    best = 0.0
    for p in range(i1.size):
        d1 = abs(i1[p] - i2[p]) * dx1
        if L1 - d1 < d1:
            d1 = L1 - d1
        d2 = abs(j1[p] - j2[p]) * dx2
        dist = (d1 * d1 + d2 * d2) ** 0.5
        if dist > 0.0:
            r = abs(values[i1[p], j1[p]] - values[i2[p], j2[p]]) / dist**a
            if r > best:
                best = r
    return best


def _neighbour_quotient_max_loop(values, dx1, dx2, a):
    n1, n2 = values.shape
    best = 0.0
    sh = dx1**a
    sv = dx2**a
    for i in range(n1):
        ip = i + 1 if i + 1 < n1 else 0
        for j in range(n2):
            r = abs(values[ip, j] - values[i, j]) / sh
            if r > best:
                best = r
            if j + 1 < n2:
                r = abs(values[i, j + 1] - values[i, j]) / sv
                if r > best:
                    best = r
    return best


if numba is not None:
    pair_quotient_max_numba = numba.njit(cache=False)(_pair_quotient_max_loop)
    neighbour_quotient_max_numba = numba.njit(cache=False)(_neighbour_quotient_max_loop)
else:  # pragma: no cover
    pair_quotient_max_numba = _pair_quotient_max_loop
    neighbour_quotient_max_numba = _neighbour_quotient_max_loop


def pair_quotient_max(values, i1, j1, i2, j2, dx1, dx2, L1, a):
    if USE_NUMBA:
        return float(pair_quotient_max_numba(values, i1, j1, i2, j2, dx1, dx2, L1, a))
    return pair_quotient_max_numpy(values, i1, j1, i2, j2, dx1, dx2, L1, a)


def neighbour_quotient_max(values, dx1, dx2, a):
    if USE_NUMBA:
        return float(neighbour_quotient_max_numba(np.ascontiguousarray(values), dx1, dx2, a))
    return neighbour_quotient_max_numpy(values, dx1, dx2, a)
