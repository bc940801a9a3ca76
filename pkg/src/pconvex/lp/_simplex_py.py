"""Pure-Python/numpy two-phase dense tableau simplex (fallback kernel).

Solves ``min c.x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub`` with every
component of ``x`` free. Free variables are split as ``x = x+ - x-``; each
inequality gets a slack; rows whose right-hand side is negative are negated
and, like equality rows, start on an artificial variable.

Pivoting follows Bland's rule (lowest-index entering column, ties in the
ratio test broken by lowest basic-variable index). The compiled kernel in
``_simplex_ext.pyx`` performs the same floating-point operations in the same
order, so both kernels take identical pivot sequences.
"""

from __future__ import annotations

import numpy as np

OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
NUMERICAL_FAILURE = 3

_STEP_OPTIMAL = 0
_STEP_UNBOUNDED = 1
_STEP_CAP = 2


def _pivot(T, basis, r, j):
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, j] = 0.0
    T[r, j] = 1.0
    basis[r] = j


def _iterate(T, basis, m, n_enter, piv_tol, budget):
    """Run Bland pivots until optimal/unbounded; returns (code, pivots used)."""
    used = 0
    obj = T[m]
    while True:
        j = -1
        for k in range(n_enter):
            if obj[k] < -piv_tol:
                j = k
                break
        if j < 0:
            return _STEP_OPTIMAL, used
        if used >= budget:
            return _STEP_CAP, used
        r = -1
        best = 0.0
        for i in range(m):
            a = T[i, j]
            if a > piv_tol:
                rhs = T[i, -1]
                ratio = (rhs if rhs > 0.0 else 0.0) / a
                if r < 0 or ratio < best - 1e-12 * (1.0 + best):
                    r, best = i, ratio
                elif ratio <= best + 1e-12 * (1.0 + best) and basis[i] < basis[r]:
                    r, best = i, ratio
        if r < 0:
            return _STEP_UNBOUNDED, used
        _pivot(T, basis, r, j)
        used += 1


def solve_free(A_eq, b_eq, A_ub, b_ub, c, phase1_only=False,
               piv_tol=1e-9, feas_tol=1e-7, max_iter=-1):
    """Two-phase simplex; returns ``(status, x, value, pivots)``."""
    A_eq = np.asarray(A_eq, dtype=np.float64)
    A_ub = np.asarray(A_ub, dtype=np.float64)
    b_eq = np.asarray(b_eq, dtype=np.float64)
    b_ub = np.asarray(b_ub, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    m_eq, m_ub = b_eq.shape[0], b_ub.shape[0]
    n = c.shape[0]
    m = m_eq + m_ub
    n_struct = 2 * n + m_ub

    need_art = np.ones(m, dtype=bool)
    need_art[m_eq:] = b_ub < 0.0
    n_art = int(need_art.sum())
    ncols = n_struct + n_art
    if max_iter < 0:
        max_iter = 50 * (m + ncols)

    T = np.zeros((m + 1, ncols + 1))
    if m_eq:
        T[:m_eq, :n] = A_eq
        T[:m_eq, n:2 * n] = -A_eq
        T[:m_eq, -1] = b_eq
    if m_ub:
        T[m_eq:m, :n] = A_ub
        T[m_eq:m, n:2 * n] = -A_ub
        T[m_eq + np.arange(m_ub), 2 * n + np.arange(m_ub)] = 1.0
        T[m_eq:m, -1] = b_ub
    neg = T[:m, -1] < 0.0
    T[:m][neg] *= -1.0

    basis = np.empty(m, dtype=np.intp)
    art = n_struct
    for i in range(m):
        if need_art[i]:
            T[i, art] = 1.0
            basis[i] = art
            art += 1
        else:
            basis[i] = 2 * n + (i - m_eq)

    rhs_scale = 1.0 + (float(np.max(np.abs(T[:m, -1]))) if m else 0.0)
    T[m, n_struct:ncols] = 1.0
    for i in range(m):
        if need_art[i]:
            T[m] -= T[i]

    code, used = _iterate(T, basis, m, n_struct, piv_tol, max_iter)
    if code == _STEP_CAP:
        return NUMERICAL_FAILURE, None, float("nan"), used
    if -T[m, -1] > feas_tol * rhs_scale:
        return INFEASIBLE, None, float("nan"), used

    if phase1_only:
        return OPTIMAL, _extract(T, basis, m, n), 0.0, used

    # drive zero-level artificials out of the basis; redundant rows stay put
    for i in range(m):
        if basis[i] >= n_struct:
            for j in range(n_struct):
                if abs(T[i, j]) > piv_tol:
                    _pivot(T, basis, i, j)
                    break

    T[m] = 0.0
    T[m, :n] = c
    T[m, n:2 * n] = -c
    for i in range(m):
        bi = basis[i]
        if bi < 2 * n:
            cost = c[bi] if bi < n else -c[bi - n]
            if cost != 0.0:
                T[m] -= cost * T[i]
    T[m, n_struct:ncols] = 0.0

    code, used2 = _iterate(T, basis, m, n_struct, piv_tol, max_iter - used)
    used += used2
    if code == _STEP_CAP:
        return NUMERICAL_FAILURE, None, float("nan"), used
    if code == _STEP_UNBOUNDED:
        return UNBOUNDED, None, float("nan"), used
    x = _extract(T, basis, m, n)
    return OPTIMAL, x, float(c @ x), used


def _extract(T, basis, m, n):
    vals = np.zeros(T.shape[1] - 1)
    for i in range(m):
        vals[basis[i]] = T[i, -1]
    return vals[:n] - vals[n:2 * n]
