# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the kernels in ``psido._kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, atan2, M_PI, fabs

cnp.import_array()


def phase_sum(t, xi, table, coef):
    cdef const double[:, ::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[:, ::1] xv = np.ascontiguousarray(xi, dtype=np.float64)
    cdef const double complex[:, ::1] sv = np.ascontiguousarray(table, dtype=np.complex128)
    cdef const double complex[::1] cv = np.ascontiguousarray(coef, dtype=np.complex128)
    cdef Py_ssize_t p = tv.shape[0], q = xv.shape[0], n = tv.shape[1]
    cdef Py_ssize_t j, k, d
    cdef double arg
    cdef double complex acc, w
    out = np.empty(p, dtype=np.complex128)
    cdef double complex[::1] ov = out
    for j in range(p):
        acc = 0
        for k in range(q):
            arg = 0.0
            for d in range(n):
                arg += tv[j, d] * xv[k, d]
            arg *= 2.0 * M_PI
            w = cos(arg) + 1j * sin(arg)
            acc += w * sv[j, k] * cv[k]
        ov[j] = acc
    return out


def pv_hilbert(f):
    cdef const double complex[::1] fv = np.ascontiguousarray(f, dtype=np.complex128)
    cdef Py_ssize_t m = fv.shape[0]
    cdef Py_ssize_t j, l, d
    cdef double complex acc
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] ov = out
    for j in range(m):
        acc = 0
        # l = j - d with d odd, both directions
        d = 1
        while d < m:
            if j - d >= 0:
                acc += fv[j - d] / d
            if j + d < m:
                acc -= fv[j + d] / d
            d += 2
        ov[j] = acc * (2.0 / M_PI)
    return out


def unwrap_phase_total(values):
    cdef const double complex[::1] v = np.ascontiguousarray(values, dtype=np.complex128)
    cdef Py_ssize_t m = v.shape[0], i
    cdef double complex r
    cdef double total = 0.0, step, worst = 0.0
    for i in range(m):
        r = v[(i + 1) % m] / v[i]
        step = atan2(r.imag, r.real)
        total += step
        if fabs(step) > worst:
            worst = fabs(step)
    return total, worst
