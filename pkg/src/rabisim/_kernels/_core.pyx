# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fixed-step time stepper; semantics match numpy_backend.advance.

The elementwise coherence update works on raw (re, im) double pairs so
the C compiler can vectorize it instead of routing every product through
the IEEE-edge-case complex multiply helper, and the population transfer
is a BLAS matrix-vector product.
"""

import numpy as np

from scipy.linalg.cython_blas cimport dgemv


def advance(double complex[:, ::1] rho,
            double complex[:, ::1] coh,
            double[:, ::1] pop,
            Py_ssize_t steps):
    cdef Py_ssize_t d = rho.shape[0]
    cdef Py_ssize_t n2 = 2 * d * d
    cdef double[::1] diag = np.empty(2 * d, dtype=np.float64)
    cdef double *r = <double *> &rho[0, 0]
    cdef double *c = <double *> &coh[0, 0]
    cdef double *a = &pop[0, 0]
    cdef double *q = &diag[0]
    cdef int n = <int> d
    cdef int two = 2
    cdef int incy = <int> (2 * (d + 1))
    cdef double one = 1.0
    cdef double zero = 0.0
    cdef char trans = b"T"
    cdef Py_ssize_t s, i, k
    cdef double ar, ai
    with nogil:
        for s in range(steps):
            for i in range(d):
                k = 2 * i * (d + 1)
                q[2 * i] = r[k]
                q[2 * i + 1] = r[k + 1]
            for k in range(0, n2, 2):
                ar = r[k]
                ai = r[k + 1]
                r[k] = ar * c[k] - ai * c[k + 1]
                r[k + 1] = ar * c[k + 1] + ai * c[k]
            # row-major pop seen column-major is its transpose; "T" undoes it
            dgemv(&trans, &n, &n, &one, a, &n, q, &two, &zero, r, &incy)
            dgemv(&trans, &n, &n, &one, a, &n, q + 1, &two, &zero, r + 1, &incy)
