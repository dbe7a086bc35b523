"""Hot loops over the 2^n cube points.

Each kernel has a numba ``@njit`` version and a pure-numpy version with the
same contract.  Set ``SIGNDEG_PURE_NUMPY=1`` (or run without numba installed)
to force the numpy path.  Only machine-integer tables pass through here; the
callers guarantee the int64 range is never exceeded (see ``INT64_SAFE``).

Cube indexing: point index ``i`` has coordinate ``x_{j+1} = (i >> j) & 1``;
subset bitmasks use the same bit order.
"""

from __future__ import annotations

import os

import numpy as np

INT64_SAFE = 1 << 62

_want_numba = os.environ.get("SIGNDEG_PURE_NUMPY", "").strip() not in ("1", "true", "yes")

try:
    if not _want_numba:
        raise ImportError
    from numba import njit
except ImportError:  # pragma: no cover - exercised via the env flag
    njit = None

USE_NUMBA = njit is not None


# -- pure numpy ------------------------------------------------------------


def _fwht_numpy(a: np.ndarray) -> np.ndarray:
    n = a.shape[0].bit_length() - 1
    out = a.copy()
    h = 1
    for _ in range(n):
        v = out.reshape(-1, 2, h)
        lo = v[:, 0, :].copy()
        hi = v[:, 1, :]
        v[:, 0, :] = lo + hi
        v[:, 1, :] = lo - hi
        h *= 2
    return out


def _subset_sums_numpy(weights: np.ndarray, modulus: int) -> np.ndarray:
    n = weights.shape[0]
    out = np.zeros(1 << n, dtype=np.int64)
    for j in range(n):
        half = 1 << j
        out[half : 2 * half] = out[:half] + weights[j]
        if modulus:
            out[half : 2 * half] %= modulus
    return out


def _popcount_parity_numpy(indices: np.ndarray, mask: int) -> np.ndarray:
    v = indices & mask
    parity = np.zeros(v.shape, dtype=np.int64)
    while np.any(v):
        parity ^= v & 1
        v = v >> 1
    return parity


# -- numba -----------------------------------------------------------------

if USE_NUMBA:

    @njit(cache=True)
    def _fwht_numba(a):
        out = a.copy()
        size = out.shape[0]
        h = 1
        while h < size:
            for start in range(0, size, 2 * h):
                for i in range(start, start + h):
                    x = out[i]
                    y = out[i + h]
                    out[i] = x + y
                    out[i + h] = x - y
            h *= 2
        return out

    @njit(cache=True)
    def _subset_sums_numba(weights, modulus):
        n = weights.shape[0]
        out = np.zeros(1 << n, dtype=np.int64)
        for j in range(n):
            half = 1 << j
            w = weights[j]
            for i in range(half):
                v = out[i] + w
                if modulus:
                    v %= modulus
                out[half + i] = v
        return out

    @njit(cache=True)
    def _popcount_parity_numba(indices, mask):
        out = np.empty(indices.shape[0], dtype=np.int64)
        for t in range(indices.shape[0]):
            v = indices[t] & mask
            p = 0
            while v:
                v &= v - 1
                p ^= 1
            out[t] = p
        return out


# -- public dispatch -------------------------------------------------------


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform: ``out[S] = sum_x a[x] chi_S(x)``.

    int64 input uses the accelerated path; object arrays (Python ints) always
    use numpy.
    """
    if a.shape[0] & (a.shape[0] - 1):
        raise ValueError("length must be a power of two")
    if a.dtype == np.int64 and USE_NUMBA:
        return _fwht_numba(a)
    return _fwht_numpy(a)


def subset_sums(weights, modulus: int = 0) -> np.ndarray:
    """``out[x] = sum_j weights[j] * x_j`` (reduced mod ``modulus`` if nonzero)."""
    w = np.asarray(weights, dtype=np.int64)
    if USE_NUMBA:
        return _subset_sums_numba(w, np.int64(modulus))
    return _subset_sums_numpy(w, modulus)


def parity_of_masked(indices: np.ndarray, mask: int) -> np.ndarray:
    """``popcount(indices & mask) mod 2`` elementwise."""
    idx = np.asarray(indices, dtype=np.int64)
    if USE_NUMBA:
        return _popcount_parity_numba(idx, np.int64(mask))
    return _popcount_parity_numpy(idx, mask)


def character_table(n: int, mask: int) -> np.ndarray:
    """chi_S over the whole cube as an int64 array of +-1."""
    par = parity_of_masked(np.arange(1 << n, dtype=np.int64), mask)
    return 1 - 2 * par


def superset_sums(a: np.ndarray) -> np.ndarray:
    """``out[U] = sum_{x superset of U} a[x]`` over the cube (zeta transform).

    For a weight table ``a`` this gives all multilinear monomial sums
    ``sum_x a[x] prod_{j in U} x_j`` at once.  Works on int64 and object arrays.
    """
    size = a.shape[0]
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    out = a.copy()
    h = 1
    while h < size:
        v = out.reshape(-1, 2, h)
        v[:, 0, :] += v[:, 1, :]
        h *= 2
    return out
