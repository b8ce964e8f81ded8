# cython: boundscheck=False, wraparound=False, cdivision=True
"""Jacobi-preconditioned conjugate gradients over CSR arrays.

Compiled twin of _pcg_python.pcg: identical iteration schedule,
convergence test and flags.  Single-threaded and sequential, so results
are reproducible bit for bit for a given matrix and right-hand side.

Flags: 0 converged, 1 iteration cap reached, 2 non-positive curvature.
"""

import numpy as np

cimport numpy as cnp

BACKEND = "cython"


def pcg(cnp.int32_t[::1] indptr, cnp.int32_t[::1] indices, double[::1] data,
        double[::1] diag, double[::1] b, double tol, long max_iter):
    cdef Py_ssize_t n = b.shape[0]
    cdef cnp.ndarray[double, ndim=1] x_arr = np.zeros(n)
    cdef double[::1] x = x_arr
    cdef double bnorm = 0.0
    cdef Py_ssize_t i, jj
    cdef long k

    for i in range(n):
        bnorm += b[i] * b[i]
    bnorm = bnorm ** 0.5
    if bnorm == 0.0:
        return x_arr, 0.0, 0, 0

    cdef cnp.ndarray[double, ndim=1] r_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] z_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] p_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] ap_arr = np.empty(n)
    cdef double[::1] r = r_arr
    cdef double[::1] z = z_arr
    cdef double[::1] p = p_arr
    cdef double[::1] ap = ap_arr

    cdef double rz = 0.0, rz_next, p_ap, alpha, beta, res, s, best
    for i in range(n):
        r[i] = b[i]
        z[i] = r[i] / diag[i]
        p[i] = z[i]
        rz += r[i] * z[i]
    best = 1.0  # ||r||/||b|| starts at exactly 1 for x = 0

    for k in range(1, max_iter + 1):
        p_ap = 0.0
        for i in range(n):
            s = 0.0
            for jj in range(indptr[i], indptr[i + 1]):
                s += data[jj] * p[indices[jj]]
            ap[i] = s
            p_ap += p[i] * s
        if p_ap <= 0.0:
            return x_arr, best, k - 1, 2
        alpha = rz / p_ap
        res = 0.0
        for i in range(n):
            x[i] += alpha * p[i]
            r[i] -= alpha * ap[i]
            res += r[i] * r[i]
        res = res ** 0.5 / bnorm
        if res < best:
            best = res
        if res <= tol:
            return x_arr, res, k, 0
        rz_next = 0.0
        for i in range(n):
            z[i] = r[i] / diag[i]
            rz_next += r[i] * z[i]
        beta = rz_next / rz
        for i in range(n):
            p[i] = z[i] + beta * p[i]
        rz = rz_next

    return x_arr, best, max_iter, 1
