"""Pure-numpy GRU recurrence, the fallback when the compiled kernel is absent.

Gate layout along the last axis is (r, z, n):
    u   = h_prev @ W_hh + b_hh
    r   = sigmoid(xp_r + u_r)
    z   = sigmoid(xp_z + u_z)
    n   = tanh(xp_n + r * u_n)
    h_t = (1 - z) * n + z * h_prev

The input projections xp = x @ W_xh + b_xh are computed by the caller as one
large matmul; only the strictly sequential part lives here.
"""

from __future__ import annotations

import numpy as np


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def gru_forward(xp: np.ndarray, w_hh: np.ndarray, b_hh: np.ndarray, h0: np.ndarray):
    """Run the recurrence. Returns (h_seq [T,H], stash) for the backward pass."""
    t_len, three_h = xp.shape
    hidden = three_h // 3
    h_seq = np.empty((t_len, hidden), dtype=np.float64)
    r_all = np.empty((t_len, hidden), dtype=np.float64)
    z_all = np.empty((t_len, hidden), dtype=np.float64)
    n_all = np.empty((t_len, hidden), dtype=np.float64)
    un_all = np.empty((t_len, hidden), dtype=np.float64)

    h = h0
    for t in range(t_len):
        u = h @ w_hh + b_hh
        r = _sigmoid(xp[t, :hidden] + u[:hidden])
        z = _sigmoid(xp[t, hidden : 2 * hidden] + u[hidden : 2 * hidden])
        u_n = u[2 * hidden :]
        n = np.tanh(xp[t, 2 * hidden :] + r * u_n)
        h = (1.0 - z) * n + z * h
        h_seq[t] = h
        r_all[t], z_all[t], n_all[t], un_all[t] = r, z, n, u_n
    return h_seq, (r_all, z_all, n_all, un_all)


def gru_backward(
    g_seq: np.ndarray,
    xp: np.ndarray,
    w_hh: np.ndarray,
    h0: np.ndarray,
    h_seq: np.ndarray,
    stash,
):
    """Backpropagate through the recurrence.

    Returns (g_xp [T,3H], g_whh [H,3H], g_bhh [3H], g_h0 [H]).
    """
    r_all, z_all, n_all, un_all = stash
    t_len, hidden = h_seq.shape
    g_xp = np.empty((t_len, 3 * hidden), dtype=np.float64)
    g_whh = np.zeros_like(w_hh)
    g_bhh = np.zeros(3 * hidden, dtype=np.float64)
    du = np.empty(3 * hidden, dtype=np.float64)

    carry = np.zeros(hidden, dtype=np.float64)
    for t in range(t_len - 1, -1, -1):
        d_h = g_seq[t] + carry
        h_prev = h_seq[t - 1] if t > 0 else h0
        r, z, n, u_n = r_all[t], z_all[t], n_all[t], un_all[t]

        d_az = d_h * (h_prev - n) * z * (1.0 - z)
        d_an = d_h * (1.0 - z) * (1.0 - n * n)
        d_ar = d_an * u_n * r * (1.0 - r)

        g_xp[t, :hidden] = d_ar
        g_xp[t, hidden : 2 * hidden] = d_az
        g_xp[t, 2 * hidden :] = d_an

        du[:hidden] = d_ar
        du[hidden : 2 * hidden] = d_az
        du[2 * hidden :] = d_an * r

        g_whh += np.outer(h_prev, du)
        g_bhh += du
        carry = d_h * z + w_hh @ du
    return g_xp, g_whh, g_bhh, carry
