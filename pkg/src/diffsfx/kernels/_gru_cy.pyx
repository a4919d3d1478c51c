# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""BLAS-backed GRU recurrence.

Same contract as `_gru_np`: gate layout (r, z, n), caller precomputes the
input projections. The matrix products go through dgemv/dger on the BLAS that
scipy links; C-contiguous [H, 3H] weights are handed to Fortran BLAS as their
own transpose, which is exactly the operand both passes need.
"""

from libc.math cimport exp, tanh
from scipy.linalg.cython_blas cimport dgemv, dger

import numpy as np


cdef inline double _sig(double x) noexcept nogil:
    return 1.0 / (1.0 + exp(-x))


def gru_forward(xp, w_hh, b_hh, h0):
    xp = np.ascontiguousarray(xp, dtype=np.float64)
    w_hh = np.ascontiguousarray(w_hh, dtype=np.float64)
    b_hh = np.ascontiguousarray(b_hh, dtype=np.float64)
    h = np.array(h0, dtype=np.float64, copy=True)

    cdef double[:, ::1] xp_v = xp
    cdef double[:, ::1] w_v = w_hh
    cdef double[::1] b_v = b_hh
    cdef double[::1] h_v = h

    cdef int t_len = xp_v.shape[0]
    cdef int three_h = xp_v.shape[1]
    cdef int hidden = three_h // 3

    h_seq = np.empty((t_len, hidden), dtype=np.float64)
    r_all = np.empty((t_len, hidden), dtype=np.float64)
    z_all = np.empty((t_len, hidden), dtype=np.float64)
    n_all = np.empty((t_len, hidden), dtype=np.float64)
    un_all = np.empty((t_len, hidden), dtype=np.float64)
    u = np.empty(three_h, dtype=np.float64)

    cdef double[:, ::1] hs_v = h_seq
    cdef double[:, ::1] r_v = r_all
    cdef double[:, ::1] z_v = z_all
    cdef double[:, ::1] n_v = n_all
    cdef double[:, ::1] un_v = un_all
    cdef double[::1] u_v = u

    cdef char trans_n = b'N'
    cdef int one = 1
    cdef double f_one = 1.0
    cdef int t, j
    cdef double r, z, n, un, alpha = 1.0

    with nogil:
        for t in range(t_len):
            for j in range(three_h):
                u_v[j] = b_v[j]
            dgemv(&trans_n, &three_h, &hidden, &alpha, &w_v[0, 0], &three_h,
                  &h_v[0], &one, &f_one, &u_v[0], &one)
            for j in range(hidden):
                r = _sig(xp_v[t, j] + u_v[j])
                z = _sig(xp_v[t, hidden + j] + u_v[hidden + j])
                un = u_v[2 * hidden + j]
                n = tanh(xp_v[t, 2 * hidden + j] + r * un)
                r_v[t, j] = r
                z_v[t, j] = z
                n_v[t, j] = n
                un_v[t, j] = un
                h_v[j] = (1.0 - z) * n + z * h_v[j]
                hs_v[t, j] = h_v[j]
    return h_seq, (r_all, z_all, n_all, un_all)


def gru_backward(g_seq, xp, w_hh, h0, h_seq, stash):
    g_seq = np.ascontiguousarray(g_seq, dtype=np.float64)
    w_hh = np.ascontiguousarray(w_hh, dtype=np.float64)
    h0 = np.ascontiguousarray(h0, dtype=np.float64)
    h_seq = np.ascontiguousarray(h_seq, dtype=np.float64)
    r_all, z_all, n_all, un_all = stash

    cdef double[:, ::1] g_v = g_seq
    cdef double[:, ::1] w_v = w_hh
    cdef double[::1] h0_v = h0
    cdef double[:, ::1] hs_v = h_seq
    cdef double[:, ::1] r_v = np.ascontiguousarray(r_all)
    cdef double[:, ::1] z_v = np.ascontiguousarray(z_all)
    cdef double[:, ::1] n_v = np.ascontiguousarray(n_all)
    cdef double[:, ::1] un_v = np.ascontiguousarray(un_all)

    cdef int t_len = g_v.shape[0]
    cdef int hidden = g_v.shape[1]
    cdef int three_h = 3 * hidden

    g_xp = np.empty((t_len, three_h), dtype=np.float64)
    g_whh = np.zeros((hidden, three_h), dtype=np.float64)
    g_bhh = np.zeros(three_h, dtype=np.float64)
    carry = np.zeros(hidden, dtype=np.float64)
    du = np.empty(three_h, dtype=np.float64)

    cdef double[:, ::1] gxp_v = g_xp
    cdef double[:, ::1] gw_v = g_whh
    cdef double[::1] gb_v = g_bhh
    cdef double[::1] c_v = carry
    cdef double[::1] du_v = du

    cdef char trans_t = b'T'
    cdef int one = 1
    cdef double f_one = 1.0
    cdef int t, j
    cdef double dh, r, z, n, un, daz, dan, dar, hp
    cdef double *hp_ptr

    with nogil:
        for t in range(t_len - 1, -1, -1):
            hp_ptr = &hs_v[t - 1, 0] if t > 0 else &h0_v[0]
            for j in range(hidden):
                dh = g_v[t, j] + c_v[j]
                hp = hp_ptr[j]
                r = r_v[t, j]
                z = z_v[t, j]
                n = n_v[t, j]
                un = un_v[t, j]
                daz = dh * (hp - n) * z * (1.0 - z)
                dan = dh * (1.0 - z) * (1.0 - n * n)
                dar = dan * un * r * (1.0 - r)
                gxp_v[t, j] = dar
                gxp_v[t, hidden + j] = daz
                gxp_v[t, 2 * hidden + j] = dan
                du_v[j] = dar
                du_v[hidden + j] = daz
                du_v[2 * hidden + j] = dan * r
                c_v[j] = dh * z
            for j in range(three_h):
                gb_v[j] += du_v[j]
            dger(&three_h, &hidden, &f_one, &du_v[0], &one, hp_ptr, &one,
                 &gw_v[0, 0], &three_h)
            dgemv(&trans_t, &three_h, &hidden, &f_one, &w_v[0, 0], &three_h,
                  &du_v[0], &one, &f_one, &c_v[0], &one)
    return g_xp, g_whh, g_bhh, carry
