# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Lanczos step kernels (dense / CSR / rectangular-block matvec).

Each function advances the iteration from step ``m_start`` to ``m_stop`` on a
preallocated Fortran-ordered basis, with two-pass full reorthogonalization
via BLAS dgemv. Returns (steps_done, breakdown_flag); the Python driver owns
convergence checks and restarts.
"""

import numpy as np

from scipy.linalg.cython_blas cimport daxpy, ddot, dgemv, dnrm2


cdef inline void _reorth(double* qp, int n, int ncols, double* up, double* wp) noexcept nogil:
    cdef char tt = b'T'
    cdef char tn = b'N'
    cdef int one = 1
    cdef double pone = 1.0
    cdef double mone = -1.0
    cdef double zero = 0.0
    cdef int pass_idx
    for pass_idx in range(2):
        dgemv(&tt, &n, &ncols, &pone, qp, &n, up, &one, &zero, wp, &one)
        dgemv(&tn, &n, &ncols, &mone, qp, &n, wp, &one, &pone, up, &one)


cdef inline int _finish_step(double* qp, double[::1] alphas, double[::1] betas,
                             double* up, double* wp, int n, int j,
                             double btol) noexcept nogil:
    """Common tail of one step after u = A q_j: returns 1 on breakdown."""
    cdef int one = 1
    cdef int ncols = j + 1
    cdef double a
    cdef double nb
    cdef double inv
    cdef int i
    a = ddot(&n, qp + <size_t> j * n, &one, up, &one)
    alphas[j] = a
    a = -a
    daxpy(&n, &a, qp + <size_t> j * n, &one, up, &one)
    if j > 0:
        a = -betas[j - 1]
        daxpy(&n, &a, qp + <size_t> (j - 1) * n, &one, up, &one)
    _reorth(qp, n, ncols, up, wp)
    nb = dnrm2(&n, up, &one)
    betas[j] = nb
    if nb <= btol:
        return 1
    inv = 1.0 / nb
    for i in range(n):
        qp[<size_t> (j + 1) * n + i] = up[i] * inv
    return 0


def steps_dense(double[:, ::1] a, double[::1, :] q, double[::1] alphas,
                double[::1] betas, int m_start, int m_stop, double btol):
    cdef int n = a.shape[0]
    cdef double[::1] u = np.empty(n)
    cdef double[::1] w = np.empty(q.shape[1])
    cdef double* qp = &q[0, 0]
    cdef double* up = &u[0]
    cdef double* wp = &w[0]
    cdef double* ap = &a[0, 0]
    cdef char tn = b'N'
    cdef int one = 1
    cdef double pone = 1.0
    cdef double zero = 0.0
    cdef int j
    cdef int broke = 0
    with nogil:
        for j in range(m_start, m_stop):
            # C-order symmetric matrix equals its Fortran transpose.
            dgemv(&tn, &n, &n, &pone, ap, &n, qp + <size_t> j * n, &one, &zero, up, &one)
            if _finish_step(qp, alphas, betas, up, wp, n, j, btol):
                broke = 1
                break
    if broke:
        return j + 1, True
    return m_stop, False


def steps_csr(double[::1] data, int[::1] indices, int[::1] indptr,
              double[::1, :] q, double[::1] alphas, double[::1] betas,
              int m_start, int m_stop, double btol):
    cdef int n = indptr.shape[0] - 1
    cdef double[::1] u = np.empty(n)
    cdef double[::1] w = np.empty(q.shape[1])
    cdef double* qp = &q[0, 0]
    cdef double* up = &u[0]
    cdef double* wp = &w[0]
    cdef int j
    cdef int i
    cdef int t
    cdef double acc
    cdef double* xp
    cdef int broke = 0
    with nogil:
        for j in range(m_start, m_stop):
            xp = qp + <size_t> j * n
            for i in range(n):
                acc = 0.0
                for t in range(indptr[i], indptr[i + 1]):
                    acc += data[t] * xp[indices[t]]
                up[i] = acc
            if _finish_step(qp, alphas, betas, up, wp, n, j, btol):
                broke = 1
                break
    if broke:
        return j + 1, True
    return m_stop, False


def steps_rect(double[:, ::1] s, double scale, double[::1, :] q,
               double[::1] alphas, double[::1] betas,
               int m_start, int m_stop, double btol):
    cdef int lrow = s.shape[0]
    cdef int mcol = s.shape[1]
    cdef int n = lrow + mcol
    cdef double[::1] u = np.empty(n)
    cdef double[::1] w = np.empty(q.shape[1])
    cdef double* qp = &q[0, 0]
    cdef double* up = &u[0]
    cdef double* wp = &w[0]
    cdef double* sp = &s[0, 0]
    cdef char tt = b'T'
    cdef char tn = b'N'
    cdef int one = 1
    cdef double zero = 0.0
    cdef int j
    cdef int broke = 0
    with nogil:
        for j in range(m_start, m_stop):
            # C-order S (L x M) is the Fortran-order M x L matrix S^T.
            dgemv(&tt, &mcol, &lrow, &scale, sp, &mcol,
                  qp + <size_t> j * n + lrow, &one, &zero, up, &one)
            dgemv(&tn, &mcol, &lrow, &scale, sp, &mcol,
                  qp + <size_t> j * n, &one, &zero, up + lrow, &one)
            if _finish_step(qp, alphas, betas, up, wp, n, j, btol):
                broke = 1
                break
    if broke:
        return j + 1, True
    return m_stop, False
