# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the splitting iteration (BLAS-backed inner loop).

Mirrors ``_admm_np.run_epoch`` exactly; only the per-iteration bookkeeping is
moved out of Python.  The Cholesky factor must be Fortran-ordered lower
triangular; A is the usual C-ordered (m, n) constraint matrix.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemv, dtrsv

cnp.import_array()

BACKEND = "cython"


def run_epoch(cnp.ndarray[double, ndim=2, mode="fortran"] L,
              cnp.ndarray[double, ndim=2, mode="c"] A,
              cnp.ndarray[double, ndim=1] q,
              cnp.ndarray[double, ndim=1] l,
              cnp.ndarray[double, ndim=1] u,
              cnp.ndarray[double, ndim=1] R,
              double sigma, double alpha,
              cnp.ndarray[double, ndim=1] x,
              cnp.ndarray[double, ndim=1] z,
              cnp.ndarray[double, ndim=1] y,
              int niters):
    cdef int n = x.shape[0]
    cdef int m = z.shape[0]
    cdef int inc = 1
    cdef double one = 1.0, zero = 0.0
    cdef cnp.ndarray[double, ndim=1] rhs = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] w = np.empty(m)
    cdef cnp.ndarray[double, ndim=1] zt = np.empty(m)
    cdef double *Lp = &L[0, 0]
    cdef double *Ap = &A[0, 0]
    cdef double *rhsp = &rhs[0]
    cdef double *wp = &w[0]
    cdef double *ztp = &zt[0]
    cdef double *xp = &x[0]
    cdef double *zp = &z[0]
    cdef double *yp = &y[0]
    cdef double *qp = &q[0]
    cdef double *lp = &l[0]
    cdef double *up = &u[0]
    cdef double *Rp = &R[0]
    cdef int it, i
    cdef double zr, v

    for it in range(niters):
        # rhs = sigma*x - q + A^T (R*z - y)
        for i in range(m):
            wp[i] = Rp[i] * zp[i] - yp[i]
        for i in range(n):
            rhsp[i] = sigma * xp[i] - qp[i]
        # A is C-ordered (m, n): Fortran view is (n, m) = A^T, so trans='N'
        # computes A^T w.
        dgemv("N", &n, &m, &one, Ap, &n, wp, &inc, &one, rhsp, &inc)
        # solve L L^T xt = rhs in place
        dtrsv("L", "N", "N", &n, Lp, &n, rhsp, &inc)
        dtrsv("L", "T", "N", &n, Lp, &n, rhsp, &inc)
        # zt = A xt  (trans='T' on the Fortran view)
        dgemv("T", &n, &m, &one, Ap, &n, rhsp, &inc, &zero, ztp, &inc)
        for i in range(n):
            xp[i] = alpha * rhsp[i] + (1.0 - alpha) * xp[i]
        for i in range(m):
            zr = alpha * ztp[i] + (1.0 - alpha) * zp[i]
            v = zr + yp[i] / Rp[i]
            if v < lp[i]:
                v = lp[i]
            elif v > up[i]:
                v = up[i]
            yp[i] = yp[i] + Rp[i] * (zr - v)
            zp[i] = v
