# cython: language_level=3
"""Compiled two-phase dense tableau simplex (Bland's rule).

Mirror of ``_simplex_py``: same tableau layout, same pivot rule, same
arithmetic order. The pivot loop runs without the GIL so concurrent solves
from a thread pool proceed in parallel.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

cdef enum:
    OPTIMAL = 0
    INFEASIBLE = 1
    UNBOUNDED = 2
    NUMERICAL_FAILURE = 3

cdef enum:
    STEP_OPTIMAL = 0
    STEP_UNBOUNDED = 1
    STEP_CAP = 2


cdef inline void _pivot(double[:, ::1] T, Py_ssize_t[::1] basis,
                        Py_ssize_t r, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t rows = T.shape[0], cols = T.shape[1]
    cdef Py_ssize_t i, l
    cdef double piv = T[r, j]
    cdef double f
    for l in range(cols):
        T[r, l] = T[r, l] / piv
    for i in range(rows):
        if i == r:
            continue
        f = T[i, j]
        if f != 0.0:
            for l in range(cols):
                T[i, l] = T[i, l] - f * T[r, l]
    for i in range(rows):
        T[i, j] = 0.0
    T[r, j] = 1.0
    basis[r] = j


cdef int _iterate(double[:, ::1] T, Py_ssize_t[::1] basis, Py_ssize_t m,
                  Py_ssize_t n_enter, double piv_tol, Py_ssize_t budget,
                  Py_ssize_t* used) noexcept nogil:
    cdef Py_ssize_t j, k, i, r
    cdef Py_ssize_t last = T.shape[1] - 1
    cdef double best, ratio, a, rhs
    used[0] = 0
    while True:
        j = -1
        for k in range(n_enter):
            if T[m, k] < -piv_tol:
                j = k
                break
        if j < 0:
            return STEP_OPTIMAL
        if used[0] >= budget:
            return STEP_CAP
        r = -1
        best = 0.0
        for i in range(m):
            a = T[i, j]
            if a > piv_tol:
                rhs = T[i, last]
                ratio = (rhs if rhs > 0.0 else 0.0) / a
                if r < 0 or ratio < best - 1e-12 * (1.0 + best):
                    r = i
                    best = ratio
                elif ratio <= best + 1e-12 * (1.0 + best) and basis[i] < basis[r]:
                    r = i
                    best = ratio
        if r < 0:
            return STEP_UNBOUNDED
        _pivot(T, basis, r, j)
        used[0] += 1


def solve_free(A_eq, b_eq, A_ub, b_ub, c, bint phase1_only=False,
               double piv_tol=1e-9, double feas_tol=1e-7, Py_ssize_t max_iter=-1):
    """Two-phase simplex; returns ``(status, x, value, pivots)``."""
    cdef double[:, ::1] Aeq = np.ascontiguousarray(A_eq, dtype=np.float64).reshape(-1, len(c)) if len(b_eq) else np.zeros((0, len(c)))
    cdef double[:, ::1] Aub = np.ascontiguousarray(A_ub, dtype=np.float64).reshape(-1, len(c)) if len(b_ub) else np.zeros((0, len(c)))
    cdef double[::1] beq = np.ascontiguousarray(b_eq, dtype=np.float64)
    cdef double[::1] bub = np.ascontiguousarray(b_ub, dtype=np.float64)
    cdef double[::1] cc = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t m_eq = beq.shape[0], m_ub = bub.shape[0], n = cc.shape[0]
    cdef Py_ssize_t m = m_eq + m_ub
    cdef Py_ssize_t n_struct = 2 * n + m_ub
    cdef Py_ssize_t n_art = m_eq, i, j, k, art, bi
    cdef double rhs_scale, cost, v
    cdef Py_ssize_t used = 0, used2 = 0
    cdef int code

    for k in range(m_ub):
        if bub[k] < 0.0:
            n_art += 1
    cdef Py_ssize_t ncols = n_struct + n_art
    if max_iter < 0:
        max_iter = 50 * (m + ncols)

    T_arr = np.zeros((m + 1, ncols + 1))
    cdef double[:, ::1] T = T_arr
    basis_arr = np.empty(m, dtype=np.intp)
    cdef Py_ssize_t[::1] basis = basis_arr
    cdef Py_ssize_t last = ncols

    with nogil:
        for i in range(m_eq):
            for j in range(n):
                T[i, j] = Aeq[i, j]
                T[i, n + j] = -Aeq[i, j]
            T[i, last] = beq[i]
        for k in range(m_ub):
            i = m_eq + k
            for j in range(n):
                T[i, j] = Aub[k, j]
                T[i, n + j] = -Aub[k, j]
            T[i, 2 * n + k] = 1.0
            T[i, last] = bub[k]
        for i in range(m):
            if T[i, last] < 0.0:
                for j in range(ncols + 1):
                    T[i, j] = T[i, j] * -1.0

        art = n_struct
        for i in range(m):
            if i < m_eq or bub[i - m_eq] < 0.0:
                T[i, art] = 1.0
                basis[i] = art
                art += 1
            else:
                basis[i] = 2 * n + (i - m_eq)

        rhs_scale = 0.0
        for i in range(m):
            v = fabs(T[i, last])
            if v > rhs_scale:
                rhs_scale = v
        rhs_scale = 1.0 + rhs_scale
        for j in range(n_struct, ncols):
            T[m, j] = 1.0
        for i in range(m):
            if basis[i] >= n_struct:
                for j in range(ncols + 1):
                    T[m, j] = T[m, j] - T[i, j]

        code = _iterate(T, basis, m, n_struct, piv_tol, max_iter, &used)

    if code == STEP_CAP:
        return NUMERICAL_FAILURE, None, float("nan"), used
    if -T[m, last] > feas_tol * rhs_scale:
        return INFEASIBLE, None, float("nan"), used
    if phase1_only:
        return OPTIMAL, _extract(T, basis, m, n), 0.0, used

    with nogil:
        for i in range(m):
            if basis[i] >= n_struct:
                for j in range(n_struct):
                    if fabs(T[i, j]) > piv_tol:
                        _pivot(T, basis, i, j)
                        break

        for j in range(ncols + 1):
            T[m, j] = 0.0
        for j in range(n):
            T[m, j] = cc[j]
            T[m, n + j] = -cc[j]
        for i in range(m):
            bi = basis[i]
            if bi < 2 * n:
                cost = cc[bi] if bi < n else -cc[bi - n]
                if cost != 0.0:
                    for j in range(ncols + 1):
                        T[m, j] = T[m, j] - cost * T[i, j]
        for j in range(n_struct, ncols):
            T[m, j] = 0.0

        code = _iterate(T, basis, m, n_struct, piv_tol, max_iter - used, &used2)

    used += used2
    if code == STEP_CAP:
        return NUMERICAL_FAILURE, None, float("nan"), used
    if code == STEP_UNBOUNDED:
        return UNBOUNDED, None, float("nan"), used
    x = _extract(T, basis, m, n)
    return OPTIMAL, x, float(np.dot(np.asarray(cc), x)), used


cdef _extract(double[:, ::1] T, Py_ssize_t[::1] basis, Py_ssize_t m, Py_ssize_t n):
    cdef Py_ssize_t i, last = T.shape[1] - 1
    vals = np.zeros(last)
    cdef double[::1] v = vals
    for i in range(m):
        v[basis[i]] = T[i, last]
    return vals[:n] - vals[n:2 * n]
