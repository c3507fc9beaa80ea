# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled LSTM kernels.

Same contract as the numpy reference in _lstm_py: the input projection and
the big weight-gradient matmuls go through BLAS, while the step recurrence
(the only part numpy cannot batch) runs as a C loop. Results match the
reference up to floating-point summation order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()


cdef inline double _sigmoid(double z) noexcept nogil:
    cdef double ez
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    ez = exp(z)
    return ez / (1.0 + ez)


cdef void _forward_loop(double[:, ::1] xp, double[:, ::1] wh,
                        double[:, ::1] h_seq, double[:, ::1] c_seq,
                        double[:, ::1] gates, double[::1] z) noexcept nogil:
    cdef Py_ssize_t T = xp.shape[0]
    cdef Py_ssize_t h4 = xp.shape[1]
    cdef Py_ssize_t h = h4 // 4
    cdef Py_ssize_t t, k, j
    cdef double acc, i_, f_, o_, g_, cp, c_
    for t in range(T):
        for k in range(h4):
            acc = xp[t, k]
            if t > 0:
                for j in range(h):
                    acc += wh[k, j] * h_seq[t - 1, j]
            z[k] = acc
        for j in range(h):
            i_ = _sigmoid(z[j])
            f_ = _sigmoid(z[h + j])
            o_ = _sigmoid(z[2 * h + j])
            g_ = tanh(z[3 * h + j])
            cp = c_seq[t - 1, j] if t > 0 else 0.0
            c_ = f_ * cp + i_ * g_
            gates[t, j] = i_
            gates[t, h + j] = f_
            gates[t, 2 * h + j] = o_
            gates[t, 3 * h + j] = g_
            c_seq[t, j] = c_
            h_seq[t, j] = o_ * tanh(c_)


cdef void _backward_loop(double[:, ::1] dh_out, double[:, ::1] wh,
                         double[:, ::1] c_seq, double[:, ::1] gates,
                         double[:, ::1] dz_seq, double[::1] dh_carry,
                         double[::1] dc) noexcept nogil:
    cdef Py_ssize_t T = dh_out.shape[0]
    cdef Py_ssize_t h = dh_out.shape[1]
    cdef Py_ssize_t t, j, k
    cdef double i_, f_, o_, g_, tc, dh, do, dcj, di, dg, df, cp, acc
    for t in range(T - 1, -1, -1):
        for j in range(h):
            i_ = gates[t, j]
            f_ = gates[t, h + j]
            o_ = gates[t, 2 * h + j]
            g_ = gates[t, 3 * h + j]
            tc = tanh(c_seq[t, j])
            dh = dh_out[t, j] + dh_carry[j]
            do = dh * tc
            dcj = dc[j] + dh * o_ * (1.0 - tc * tc)
            di = dcj * g_
            dg = dcj * i_
            cp = c_seq[t - 1, j] if t > 0 else 0.0
            df = dcj * cp
            dz_seq[t, j] = di * i_ * (1.0 - i_)
            dz_seq[t, h + j] = df * f_ * (1.0 - f_)
            dz_seq[t, 2 * h + j] = do * o_ * (1.0 - o_)
            dz_seq[t, 3 * h + j] = dg * (1.0 - g_ * g_)
            dc[j] = dcj * f_
        for j in range(h):
            acc = 0.0
            for k in range(4 * h):
                acc += wh[k, j] * dz_seq[t, k]
            dh_carry[j] = acc


def lstm_forward(x, wx, wh, b):
    """See _lstm_py.lstm_forward."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    wx = np.ascontiguousarray(wx, dtype=np.float64)
    wh_c = np.ascontiguousarray(wh, dtype=np.float64)
    cdef Py_ssize_t T = x.shape[0]
    cdef Py_ssize_t h = wh_c.shape[1]
    xp = np.ascontiguousarray(x @ wx.T + b)
    h_seq = np.zeros((T, h))
    c_seq = np.zeros((T, h))
    gates = np.zeros((T, 4 * h))
    z = np.zeros(4 * h)
    _forward_loop(xp, wh_c, h_seq, c_seq, gates, z)
    return h_seq, c_seq, gates


def lstm_backward(dh_out, x, wx, wh, h_seq, c_seq, gates):
    """See _lstm_py.lstm_backward."""
    dh_out = np.ascontiguousarray(dh_out, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    wx = np.ascontiguousarray(wx, dtype=np.float64)
    wh_c = np.ascontiguousarray(wh, dtype=np.float64)
    h_seq = np.ascontiguousarray(h_seq, dtype=np.float64)
    c_seq = np.ascontiguousarray(c_seq, dtype=np.float64)
    gates = np.ascontiguousarray(gates, dtype=np.float64)
    cdef Py_ssize_t T = dh_out.shape[0]
    cdef Py_ssize_t h = dh_out.shape[1]
    dz_seq = np.zeros((T, 4 * h))
    dh_carry = np.zeros(h)
    dc = np.zeros(h)
    _backward_loop(dh_out, wh_c, c_seq, gates, dz_seq, dh_carry, dc)
    h_prev_seq = np.zeros_like(h_seq)
    h_prev_seq[1:] = h_seq[:-1]
    dwx = dz_seq.T @ x
    dwh = dz_seq.T @ h_prev_seq
    db = dz_seq.sum(axis=0)
    dx = dz_seq @ wx
    return dwx, dwh, db, dx
