# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled low-rank exponential-update matvec kernel.

Computes out = v + q @ (em1 * (q^T v)) with two BLAS gemv calls and no
temporary allocations beyond the caller-provided work buffer. This is the
inner loop of every operator application inside the Krylov solvers.
"""

from scipy.linalg.cython_blas cimport dgemv


def lowrank_expm_apply(double[::1, :] q, double[::1] em1, double[::1] v,
                       double[::1] out, double[::1] work):
    """out <- v + q (em1 * (q^T v)); q must be Fortran-ordered, d x m.

    ``em1`` holds exp(diag) - 1 for the active diagonal. ``work`` must have
    length m and ``out`` length d; ``out`` may not alias ``v``.
    """
    cdef int d = q.shape[0]
    cdef int m = q.shape[1]
    cdef int inc = 1
    cdef double one = 1.0
    cdef double zero = 0.0
    cdef char trans_t = b'T'
    cdef char trans_n = b'N'
    cdef Py_ssize_t i

    if m == 0:
        for i in range(d):
            out[i] = v[i]
        return

    with nogil:
        # work <- q^T v
        dgemv(&trans_t, &d, &m, &one, &q[0, 0], &d, &v[0], &inc,
              &zero, &work[0], &inc)
        for i in range(m):
            work[i] *= em1[i]
        for i in range(d):
            out[i] = v[i]
        # out <- q work + out
        dgemv(&trans_n, &d, &m, &one, &q[0, 0], &d, &work[0], &inc,
              &one, &out[0], &inc)
