# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled raking kernels; semantics mirror ``_raking_py`` exactly."""
from libc.math cimport fabs

import numpy as np

NAME = "compiled"


cdef double _rake_inplace(double[:, ::1] f, const double[::1] r,
                          const double[::1] c, double tol, int max_iter,
                          int* sweeps_out) noexcept nogil:
    cdef Py_ssize_t J = f.shape[0]
    cdef Py_ssize_t i, j
    cdef int sweep
    cdef double s, scale, dev
    dev = 1e308
    sweep = 0
    while sweep < max_iter:
        sweep += 1
        for i in range(J):
            s = 0.0
            for j in range(J):
                s += f[i, j]
            scale = r[i] / s
            for j in range(J):
                f[i, j] *= scale
        for j in range(J):
            s = 0.0
            for i in range(J):
                s += f[i, j]
            scale = c[j] / s
            for i in range(J):
                f[i, j] *= scale
        dev = 0.0
        for i in range(J):
            s = 0.0
            for j in range(J):
                s += f[i, j]
            if fabs(s - r[i]) > dev:
                dev = fabs(s - r[i])
        for j in range(J):
            s = 0.0
            for i in range(J):
                s += f[i, j]
            if fabs(s - c[j]) > dev:
                dev = fabs(s - c[j])
        if dev <= tol:
            break
    sweeps_out[0] = sweep
    return dev


def rake(seed, row_targets, col_targets, double tol, int max_iter):
    """Adjust one table.  Returns (table, deviation, sweeps)."""
    f = np.array(seed, dtype=np.float64, order="C")
    r = np.ascontiguousarray(row_targets, dtype=np.float64)
    c = np.ascontiguousarray(col_targets, dtype=np.float64)
    cdef double[:, ::1] fv = f
    cdef double[::1] rv = r
    cdef double[::1] cv = c
    cdef int sweeps = 0
    cdef double dev
    with nogil:
        dev = _rake_inplace(fv, rv, cv, tol, max_iter, &sweeps)
    return f, dev, sweeps


def rake_batch(seed, row_targets, col_targets, double tol, int max_iter):
    """Adjust one seed against a batch of margin pairs."""
    r = np.ascontiguousarray(row_targets, dtype=np.float64)
    c = np.ascontiguousarray(col_targets, dtype=np.float64)
    cdef Py_ssize_t m = r.shape[0]
    cdef Py_ssize_t J = r.shape[1]
    seed_arr = np.ascontiguousarray(seed, dtype=np.float64)
    f = np.empty((m, J, J), dtype=np.float64)
    f[:] = seed_arr[None, :, :]
    devs = np.empty(m, dtype=np.float64)
    sweeps = np.zeros(m, dtype=np.intc)
    cdef double[:, :, ::1] fv = f
    cdef double[:, ::1] rv = r
    cdef double[:, ::1] cv = c
    cdef double[::1] dv = devs
    cdef int[::1] sv = sweeps
    cdef Py_ssize_t k
    cdef int sw
    with nogil:
        for k in range(m):
            sw = 0
            dv[k] = _rake_inplace(fv[k], rv[k], cv[k], tol, max_iter, &sw)
            sv[k] = sw
    return f, devs, sweeps.astype(np.intp)
