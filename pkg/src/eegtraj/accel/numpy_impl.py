"""Pure-numpy reference implementations of the hot kernels.

Feature layout conventions shared with the numba lane:
  sequences are [batch, time, channels]; conv kernels are [tap, in, out];
  LSTM gate order is (input, forget, cell, output) packed along the last axis.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

LANE = "numpy"


def lag_embed(v, t0, t1, lag):
    """Design-matrix block for sample times t0..t1 inclusive.

    v is [channels, samples]; the returned matrix is [t1-t0+1, channels*lag]
    with feature n*lag + l holding v[n, t-l] (l=0 is the current sample).
    """
    n_ch = v.shape[0]
    windows = sliding_window_view(v, lag, axis=1)  # [N, S-lag+1, lag]
    block = windows[:, t0 - lag + 1 : t1 - lag + 2, ::-1]
    rows = t1 - t0 + 1
    return np.ascontiguousarray(block.transpose(1, 0, 2).reshape(rows, n_ch * lag))


def conv1d_fwd(x, w, b):
    """Same-padded cross-correlation along time. x [B,T,Ci], w [K,Ci,Co]."""
    B, T, Ci = x.shape
    K, _, Co = w.shape
    pad = K // 2
    xp = np.zeros((B, T + 2 * pad, Ci), dtype=x.dtype)
    xp[:, pad : pad + T, :] = x
    cols = sliding_window_view(xp, K, axis=1)          # [B, T, Ci, K]
    cols = cols.transpose(0, 1, 3, 2).reshape(B * T, K * Ci)
    y = cols @ w.reshape(K * Ci, Co) + b
    return y.reshape(B, T, Co)


def conv1d_bwd(x, w, dy):
    B, T, Ci = x.shape
    K, _, Co = w.shape
    pad = K // 2
    xp = np.zeros((B, T + 2 * pad, Ci), dtype=x.dtype)
    xp[:, pad : pad + T, :] = x
    cols = sliding_window_view(xp, K, axis=1).transpose(0, 1, 3, 2).reshape(B * T, K * Ci)

    dy2 = dy.reshape(B * T, Co)
    dw = (cols.T @ dy2).reshape(K, Ci, Co)
    db = dy2.sum(axis=0)

    dcols = (dy2 @ w.reshape(K * Ci, Co).T).reshape(B, T, K, Ci)
    dxp = np.zeros_like(xp)
    for k in range(K):
        dxp[:, k : k + T, :] += dcols[:, :, k, :]
    dx = dxp[:, pad : pad + T, :]
    return dx, dw, db


def maxpool_fwd(x, window):
    """Non-overlapping max pooling (stride == window); trailing remainder dropped."""
    B, T, C = x.shape
    Tp = T // window
    blocks = x[:, : Tp * window, :].reshape(B, Tp, window, C)
    arg = blocks.argmax(axis=2)                        # [B, Tp, C]
    y = np.take_along_axis(blocks, arg[:, :, None, :], axis=2)[:, :, 0, :]
    idx = arg + (np.arange(Tp) * window)[None, :, None]
    return y, idx.astype(np.int64)


def maxpool_bwd(dy, idx, T):
    B, Tp, C = dy.shape
    dx = np.zeros((B, T, C), dtype=dy.dtype)
    bi = np.arange(B)[:, None, None]
    ci = np.arange(C)[None, None, :]
    np.add.at(dx, (bi, idx, ci), dy)
    return dx


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_fwd(x, wx, wh, b):
    """Run the gate recurrence over time; returns final hidden state plus caches.

    x [B,T,I], wx [I,4H], wh [H,4H], b [4H]. Caches: hs/cs [T+1,B,H] (index 0
    is the zero initial state), gates [T,B,4H] post-activation.
    """
    B, T, _ = x.shape
    H = wh.shape[0]
    hs = np.zeros((T + 1, B, H), dtype=x.dtype)
    cs = np.zeros((T + 1, B, H), dtype=x.dtype)
    gates = np.zeros((T, B, 4 * H), dtype=x.dtype)
    for t in range(T):
        z = x[:, t, :] @ wx + hs[t] @ wh + b
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H : 2 * H])
        g = np.tanh(z[:, 2 * H : 3 * H])
        o = _sigmoid(z[:, 3 * H :])
        cs[t + 1] = f * cs[t] + i * g
        hs[t + 1] = o * np.tanh(cs[t + 1])
        gates[t, :, :H] = i
        gates[t, :, H : 2 * H] = f
        gates[t, :, 2 * H : 3 * H] = g
        gates[t, :, 3 * H :] = o
    return hs[T].copy(), hs, cs, gates


def lstm_bwd(x, wx, wh, hs, cs, gates, dh_last):
    """Backprop through time seeded at the final hidden state only."""
    B, T, _ = x.shape
    H = wh.shape[0]
    dwx = np.zeros_like(wx)
    dwh = np.zeros_like(wh)
    db = np.zeros_like(wx[0])
    dx = np.zeros_like(x)
    dh = dh_last.copy()
    dc = np.zeros((B, H), dtype=x.dtype)
    dz = np.empty((B, 4 * H), dtype=x.dtype)
    for t in range(T - 1, -1, -1):
        i = gates[t, :, :H]
        f = gates[t, :, H : 2 * H]
        g = gates[t, :, 2 * H : 3 * H]
        o = gates[t, :, 3 * H :]
        tc = np.tanh(cs[t + 1])
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        dz[:, :H] = dc * g * i * (1.0 - i)
        dz[:, H : 2 * H] = dc * cs[t] * f * (1.0 - f)
        dz[:, 2 * H : 3 * H] = dc * i * (1.0 - g * g)
        dz[:, 3 * H :] = do * o * (1.0 - o)
        dwx += x[:, t, :].T @ dz
        dwh += hs[t].T @ dz
        db += dz.sum(axis=0)
        dh = dz @ wh.T
        dc = dc * f
        dx[:, t, :] = dz @ wx.T
    return dx, dwx, dwh, db
