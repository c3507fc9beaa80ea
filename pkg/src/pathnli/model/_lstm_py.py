"""Reference LSTM kernels in plain numpy.

These define the numerical contract: `lstm_forward` runs a fused-gate LSTM
over one sequence and keeps every intermediate needed by `lstm_backward`,
which is the exact reverse-mode gradient (backpropagation through time),
not an approximation. The compiled backend must agree with these to within
accumulated rounding.
"""

from __future__ import annotations

import numpy as np


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_forward(x: np.ndarray, wx: np.ndarray, wh: np.ndarray,
                 b: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run the LSTM over x (T, d_in).

    Returns (h_seq, c_seq, gates): hidden states (T, h), cell states (T, h),
    and the post-nonlinearity gate activations (T, 4h) ordered input,
    forget, output, candidate. Gate rows of wx/wh/b use the same order.
    """
    T = x.shape[0]
    h = wh.shape[1]
    h_seq = np.zeros((T, h))
    c_seq = np.zeros((T, h))
    gates = np.zeros((T, 4 * h))
    xp = x @ wx.T + b
    h_prev = np.zeros(h)
    c_prev = np.zeros(h)
    for t in range(T):
        z = xp[t] + wh @ h_prev
        i = _sigmoid(z[:h])
        f = _sigmoid(z[h:2 * h])
        o = _sigmoid(z[2 * h:3 * h])
        g = np.tanh(z[3 * h:])
        c = f * c_prev + i * g
        ht = o * np.tanh(c)
        gates[t, :h] = i
        gates[t, h:2 * h] = f
        gates[t, 2 * h:3 * h] = o
        gates[t, 3 * h:] = g
        c_seq[t] = c
        h_seq[t] = ht
        h_prev, c_prev = ht, c
    return h_seq, c_seq, gates


def lstm_backward(dh_out: np.ndarray, x: np.ndarray, wx: np.ndarray,
                  wh: np.ndarray, h_seq: np.ndarray, c_seq: np.ndarray,
                  gates: np.ndarray
                  ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Exact gradients given d(loss)/d(h_t) for every step.

    dh_out is (T, h); rows for steps whose output is unused are zero.
    Returns (dwx, dwh, db, dx).
    """
    T, h = dh_out.shape
    dz_seq = np.zeros((T, 4 * h))
    dh_carry = np.zeros(h)
    dc = np.zeros(h)
    for t in range(T - 1, -1, -1):
        i = gates[t, :h]
        f = gates[t, h:2 * h]
        o = gates[t, 2 * h:3 * h]
        g = gates[t, 3 * h:]
        c = c_seq[t]
        c_prev = c_seq[t - 1] if t > 0 else np.zeros(h)
        tc = np.tanh(c)
        dh = dh_out[t] + dh_carry
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dz = dz_seq[t]
        dz[:h] = di * i * (1.0 - i)
        dz[h:2 * h] = df * f * (1.0 - f)
        dz[2 * h:3 * h] = do * o * (1.0 - o)
        dz[3 * h:] = dg * (1.0 - g * g)
        dh_carry = wh.T @ dz
        dc = dc * f
    h_prev_seq = np.zeros_like(h_seq)
    h_prev_seq[1:] = h_seq[:-1]
    dwx = dz_seq.T @ x
    dwh = dz_seq.T @ h_prev_seq
    db = dz_seq.sum(axis=0)
    dx = dz_seq @ wx
    return dwx, dwh, db, dx
