# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled step-application kernel.

Applies a sequence of precomputed one-step propagators to a state vector
with a norm check per step.  Contract identical to ``_steppy``; the matrix
product is a single BLAS zgemv per step.
"""

import numpy as np

from scipy.linalg.cython_blas cimport zgemv, dznrm2

from libc.math cimport fabs


def apply_step_sequence(steps, schedule, snap_after, psi, double norm_tol):
    steps = np.ascontiguousarray(steps, dtype=np.complex128)
    cdef double complex[:, :, ::1] s = steps
    cdef int[::1] sched = np.ascontiguousarray(schedule, dtype=np.int32)
    cdef long long[::1] snaps_at = np.ascontiguousarray(snap_after, dtype=np.int64)
    cur_arr = np.array(psi, dtype=np.complex128)
    nxt_arr = np.empty_like(cur_arr)
    cdef double complex[::1] cur = cur_arr
    cdef double complex[::1] nxt = nxt_arr
    cdef int d = cur.shape[0]
    cdef Py_ssize_t n = sched.shape[0]
    cdef Py_ssize_t m = snaps_at.shape[0]
    out_arr = np.zeros((m, d), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex alpha = 1.0
    cdef double complex beta = 0.0
    cdef int inc = 1
    # row-major matrix seen as column-major is its transpose, so ask BLAS
    # for the transposed product to get plain steps[k] @ cur
    cdef char trans = b'T'
    cdef Py_ssize_t j, ptr = 0
    cdef int k
    cdef double nrm
    cdef double complex *curp
    cdef double complex *nxtp
    cdef double complex *tmp

    curp = &cur[0]
    nxtp = &nxt[0]
    with nogil:
        for j in range(n):
            while ptr < m and snaps_at[ptr] == j:
                for k in range(d):
                    out[ptr, k] = curp[k]
                ptr += 1
            k = sched[j]
            zgemv(&trans, &d, &d, &alpha, <double complex *> &s[k, 0, 0], &d,
                  curp, &inc, &beta, nxtp, &inc)
            tmp = curp
            curp = nxtp
            nxtp = tmp
            nrm = dznrm2(&d, curp, &inc)
            if fabs(nrm - 1.0) > norm_tol:
                with gil:
                    return out_arr, int(j), float(nrm)
        while ptr < m and snaps_at[ptr] == n:
            for k in range(d):
                out[ptr, k] = curp[k]
            ptr += 1
    return out_arr, -1, 1.0
