# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled p-variation kernels (hot twin of _pvar_py).

The O(n^2) dynamic program over local extrema is the one scalar inner
loop in the package that numpy cannot vectorize; everything else stays
in Python.  Contracts match _pvar_py exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()


def local_extrema_indices(values):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    if n <= 2:
        return np.arange(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] keep = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t m = 0
    cdef Py_ssize_t i, prev = 0
    cdef int direction = 0, d
    cdef double last = v[0], x
    keep[m] = 0
    m += 1
    for i in range(1, n):
        x = v[i]
        if x == last:
            continue
        d = 1 if x > last else -1
        if d != direction and direction != 0:
            keep[m] = prev
            m += 1
        direction = d
        last = x
        prev = i
    if keep[m - 1] != n - 1:
        keep[m] = n - 1
        m += 1
    return np.asarray(keep[:m])


def pvar_p1(values):
    idx = local_extrema_indices(values)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(
        np.asarray(values, dtype=np.float64)[idx])
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    cdef double total = 0.0
    if n < 2:
        return 0.0, idx[:1]
    for i in range(1, n):
        total += fabs(v[i] - v[i - 1])
    return total, idx


def pvar_dp(values, double p):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    if n < 2:
        return 0.0, np.arange(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best = np.zeros(n)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] link = np.full(n, -1, dtype=np.int64)
    cdef Py_ssize_t i, j, end, k, m
    cdef double bj, cand, vj
    cdef Py_ssize_t lj
    for j in range(1, n):
        bj = 0.0
        lj = -1
        vj = v[j]
        for i in range(j):
            cand = best[i] + pow(fabs(vj - v[i]), p)
            if cand > bj:
                bj = cand
                lj = i
        best[j] = bj
        link[j] = lj
    end = 0
    for j in range(1, n):
        if best[j] > best[end]:
            end = j
    if best[end] <= 0.0:
        return 0.0, np.zeros(1, dtype=np.int64)
    m = 0
    k = end
    while k >= 0:
        m += 1
        k = link[k]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] chain = np.empty(m, dtype=np.int64)
    k = end
    for i in range(m - 1, -1, -1):
        chain[i] = k
        k = link[k]
    return float(best[end]), chain
