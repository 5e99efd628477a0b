"""Simplex pivoting kernels.

Two interchangeable implementations of the same Bland-rule loop over a dense
tableau are provided: a numba ``@njit`` version with explicit loops, and a
vectorised pure-numpy fallback. ``DEA_RESEARCH_KERNEL`` selects the default
(``numba`` or ``numpy``); when numba is not importable the numpy path is used.

Tableau layout: rows ``0..m-1`` are constraints, row ``m`` holds reduced costs
with ``-objective`` in the last column; the last column is the rhs. Only the
first ``n_enter`` columns may enter the basis.
"""

from __future__ import annotations

import logging
import os

import numpy as np

logger = logging.getLogger(__name__)

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2

# ratios closer than this are ties, broken by lowest basic index
RATIO_TIE_TOL = 1e-12

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    NUMBA_AVAILABLE = False


def simplex_numpy(T, basis, n_enter, pivot_tol, opt_tol, max_iter):
    m = T.shape[0] - 1
    rows = np.arange(m)
    it = 0
    while True:
        neg = np.flatnonzero(T[m, :n_enter] < -opt_tol)
        if neg.size == 0:
            return OPTIMAL, it
        if it >= max_iter:
            return ITERATION_LIMIT, it
        e = neg[0]
        col = T[:m, e]
        ok = col > pivot_tol
        if not ok.any():
            return UNBOUNDED, it
        ratios = np.full(m, np.inf)
        ratios[ok] = T[:m, -1][ok] / col[ok]
        best = ratios.min()
        tied = rows[ratios <= best + RATIO_TIE_TOL]
        r = tied[np.argmin(basis[tied])]
        T[r] /= T[r, e]
        factors = T[:, e].copy()
        factors[r] = 0.0
        T -= np.outer(factors, T[r])
        basis[r] = e
        it += 1


def _simplex_loops(T, basis, n_enter, pivot_tol, opt_tol, max_iter):
    m = T.shape[0] - 1
    ncol = T.shape[1]
    it = 0
    while True:
        e = -1
        for j in range(n_enter):
            if T[m, j] < -opt_tol:
                e = j
                break
        if e < 0:
            return OPTIMAL, it
        if it >= max_iter:
            return ITERATION_LIMIT, it
        best = np.inf
        found = False
        for i in range(m):
            if T[i, e] > pivot_tol:
                found = True
                ratio = T[i, ncol - 1] / T[i, e]
                if ratio < best:
                    best = ratio
        if not found:
            return UNBOUNDED, it
        r = -1
        for i in range(m):
            if T[i, e] > pivot_tol and T[i, ncol - 1] / T[i, e] <= best + RATIO_TIE_TOL:
                if r < 0 or basis[i] < basis[r]:
                    r = i
        p = T[r, e]
        for j in range(ncol):
            T[r, j] /= p
        for i in range(m + 1):
            if i != r:
                f = T[i, e]
                if f != 0.0:
                    for j in range(ncol):
                        T[i, j] -= f * T[r, j]
        basis[r] = e
        it += 1


if NUMBA_AVAILABLE:
    simplex_numba = numba.njit(cache=True)(_simplex_loops)
else:  # pragma: no cover
    simplex_numba = _simplex_loops

KERNELS = {"numpy": simplex_numpy, "numba": simplex_numba}


def default_backend() -> str:
    choice = os.environ.get("DEA_RESEARCH_KERNEL", "numba").strip().lower()
    if choice not in KERNELS:
        logger.warning("unknown DEA_RESEARCH_KERNEL=%r, using numpy", choice)
        return "numpy"
    if choice == "numba" and not NUMBA_AVAILABLE:
        return "numpy"
    return choice


def get_kernel(backend: str | None = None):
    return KERNELS[backend or default_backend()]
