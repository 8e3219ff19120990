# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loop: Euler stepping of the interacting-reserve system.

The coupling between banks runs only through the per-step ensemble mean,
so everything else (noise scaling, jump binning) is precomputed into a
single per-step increment array by the caller.  The pure-Python twin lives
in ``_kernels_py``; both must implement the same update expression in the
same order.
"""

import numpy as np


def step_network_batch(double[::1] x0, double[::1] a, double dt,
                       double[:, :, ::1] drive):
    """Advance a batch of reserve paths.

    x0    : (M,) initial reserves, shared by every path in the batch
    a     : (M,) mean-reversion (lending) rates
    drive : (B, steps, M) precomputed per-step increments
            (diffusion + jumps + systematic factor)

    Returns (B, steps+1, M) paths with ``out[:, 0] = x0``.
    """
    cdef Py_ssize_t B = drive.shape[0]
    cdef Py_ssize_t steps = drive.shape[1]
    cdef Py_ssize_t M = drive.shape[2]
    if x0.shape[0] != M or a.shape[0] != M:
        raise ValueError("x0/a length does not match drive's bank axis")

    out_arr = np.empty((B, steps + 1, M), dtype=np.float64)
    adt_arr = np.empty(M, dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef double[::1] adt = adt_arr
    cdef Py_ssize_t b, k, i
    cdef double m, xi

    for i in range(M):
        adt[i] = a[i] * dt

    with nogil:
        for b in range(B):
            for i in range(M):
                out[b, 0, i] = x0[i]
            for k in range(steps):
                m = 0.0
                for i in range(M):
                    m += out[b, k, i]
                m = m / M
                for i in range(M):
                    xi = out[b, k, i]
                    out[b, k + 1, i] = xi + adt[i] * (m - xi) + drive[b, k, i]
    return out_arr
