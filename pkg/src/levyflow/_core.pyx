# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Semantics must match ``levyflow._fallback`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


cdef inline Py_ssize_t _bin_index(double d, double width, Py_ssize_t nbins) noexcept nogil:
    cdef Py_ssize_t k = <Py_ssize_t>floor(d / width)
    # repair rounding in d / width against the float edges k * width
    if k * width > d:
        k -= 1
    elif (k + 1) * width <= d:
        k += 1
    if k < 0:
        k = 0
    if k >= nbins:
        k = nbins - 1
    return k


def bin_accumulate(const double[:, ::1] flow, const double[:, ::1] dist,
                   double width, Py_ssize_t nbins):
    cdef Py_ssize_t n = flow.shape[0]
    cdef Py_ssize_t i, j
    out = np.zeros(nbins, dtype=np.float64)
    cdef double[::1] acc = out
    with nogil:
        for i in range(n):
            for j in range(n):
                if i != j:
                    acc[_bin_index(dist[i, j], width, nbins)] += flow[i, j]
    return out


def bin_indices(const double[::1] d, double width, Py_ssize_t nbins):
    cdef Py_ssize_t m = d.shape[0]
    cdef Py_ssize_t t
    out = np.empty(m, dtype=np.intp)
    cdef Py_ssize_t[::1] k = out
    with nogil:
        for t in range(m):
            k[t] = _bin_index(d[t], width, nbins)
    return out


def local_poly_density(const double[::1] d_sorted, const double[::1] f_sorted,
                       const double[::1] grid, double h, const double[::1] coeffs):
    cdef Py_ssize_t m = d_sorted.shape[0]
    cdef Py_ssize_t G = grid.shape[0]
    cdef Py_ssize_t p = coeffs.shape[0]
    cdef Py_ssize_t g, i, lo, hi, mid, c
    cdef double x, u, k, poly, upow, s
    cdef Py_ssize_t cnt
    sums = np.zeros(G, dtype=np.float64)
    counts = np.zeros(G, dtype=np.intp)
    cdef double[::1] S = sums
    cdef Py_ssize_t[::1] C = counts
    with nogil:
        for g in range(G):
            x = grid[g]
            # first index with d > x - h
            lo = 0
            hi = m
            while lo < hi:
                mid = (lo + hi) >> 1
                if d_sorted[mid] <= x - h:
                    lo = mid + 1
                else:
                    hi = mid
            s = 0.0
            cnt = 0
            i = lo
            while i < m and d_sorted[i] < x + h:
                u = (d_sorted[i] - x) / h
                if -1.0 < u < 1.0:
                    k = 0.75 * (1.0 - u * u)
                    poly = 0.0
                    upow = 1.0
                    for c in range(p):
                        poly += coeffs[c] * upow
                        upow *= u
                    s += f_sorted[i] * k * poly
                    cnt += 1
                i += 1
            S[g] = s
            C[g] = cnt
    return sums, counts
