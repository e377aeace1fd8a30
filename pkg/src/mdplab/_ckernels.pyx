# cython: language_level=3
"""Compiled versions of the inner loops in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

from ._pykernels import PIVOT_TOL, SingularSystemError

cnp.import_array()


def backup(const double[:, :, ::1] P, const double[:, ::1] C, double gamma, const double[::1] v):
    cdef Py_ssize_t n = P.shape[0], m = P.shape[1], i, k, j
    cdef double s, best
    q_arr = np.empty((n, m))
    out_arr = np.empty(n)
    cdef double[:, ::1] q = q_arr
    cdef double[::1] out = out_arr
    for i in range(n):
        for k in range(m):
            s = 0.0
            for j in range(n):
                s += P[i, k, j] * v[j]
            q[i, k] = C[i, k] + gamma * s
            if k == 0 or q[i, k] < best:
                best = q[i, k]
        out[i] = best
    return out_arr, q_arr


def policy_sweeps(const double[:, ::1] P_pi, const double[::1] c_pi, double gamma, v, int sweeps):
    cdef Py_ssize_t n = P_pi.shape[0], i, j, t
    cdef double s
    cur_arr = np.array(v, dtype=float)
    nxt_arr = np.empty(n)
    cdef double[::1] cur = cur_arr
    cdef double[::1] nxt = nxt_arr
    for t in range(sweeps):
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += P_pi[i, j] * cur[j]
            nxt[i] = c_pi[i] + gamma * s
        cur[:] = nxt
    return cur_arr


def gauss_solve(A, b):
    a_arr = np.array(A, dtype=float, order="C")
    x_arr = np.array(b, dtype=float)
    cdef double[:, ::1] a = a_arr
    cdef double[::1] x = x_arr
    cdef Py_ssize_t n = a.shape[0], i, j, k, p
    cdef double big, f, tmp, tol = PIVOT_TOL
    for k in range(n):
        p = k
        big = fabs(a[k, k])
        for i in range(k + 1, n):
            if fabs(a[i, k]) > big:
                big = fabs(a[i, k])
                p = i
        if big < tol:
            raise SingularSystemError(f"pivot {a[p, k]:.3g} in column {k}")
        if p != k:
            for j in range(k, n):
                tmp = a[k, j]; a[k, j] = a[p, j]; a[p, j] = tmp
            tmp = x[k]; x[k] = x[p]; x[p] = tmp
        for i in range(k + 1, n):
            f = a[i, k] / a[k, k]
            if f != 0.0:
                for j in range(k, n):
                    a[i, j] -= f * a[k, j]
                x[i] -= f * x[k]
    for k in range(n - 1, -1, -1):
        tmp = x[k]
        for j in range(k + 1, n):
            tmp -= a[k, j] * x[j]
        x[k] = tmp / a[k, k]
    return x_arr


def pivot(double[:, ::1] T, Py_ssize_t r, Py_ssize_t c):
    cdef Py_ssize_t rows = T.shape[0], cols = T.shape[1], i, j
    cdef double p = T[r, c], f
    for j in range(cols):
        T[r, j] /= p
    for i in range(rows):
        if i == r:
            continue
        f = T[i, c]
        if f != 0.0:
            for j in range(cols):
                T[i, j] -= f * T[r, j]
