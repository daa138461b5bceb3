"""Numba-compiled kernels; layouts match numpy_impl exactly.

Matrix products go through np.dot so BLAS still does the heavy lifting;
numba removes the gather/scatter and recurrence overhead around it.
"""
import numpy as np
from numba import njit

LANE = "numba"


@njit(cache=True)
def lag_embed(v, t0, t1, lag):
    n_ch = v.shape[0]
    rows = t1 - t0 + 1
    out = np.empty((rows, n_ch * lag), dtype=v.dtype)
    for r in range(rows):
        t = t0 + r
        for n in range(n_ch):
            base = n * lag
            for l in range(lag):
                out[r, base + l] = v[n, t - l]
    return out


@njit(cache=True)
def _im2col(x, K):
    B, T, Ci = x.shape
    pad = K // 2
    cols = np.zeros((B * T, K * Ci), dtype=x.dtype)
    for b in range(B):
        for t in range(T):
            row = b * T + t
            for k in range(K):
                s = t + k - pad
                if 0 <= s < T:
                    base = k * Ci
                    for c in range(Ci):
                        cols[row, base + c] = x[b, s, c]
    return cols


@njit(cache=True)
def conv1d_fwd(x, w, b):
    B, T, Ci = x.shape
    K = w.shape[0]
    Co = w.shape[2]
    cols = _im2col(x, K)
    w2 = np.ascontiguousarray(w).reshape(K * Ci, Co)
    y = np.dot(cols, w2)
    for r in range(B * T):
        for o in range(Co):
            y[r, o] += b[o]
    return y.reshape(B, T, Co)


@njit(cache=True)
def conv1d_bwd(x, w, dy):
    B, T, Ci = x.shape
    K = w.shape[0]
    Co = w.shape[2]
    pad = K // 2
    cols = _im2col(x, K)
    dy2 = np.ascontiguousarray(dy).reshape(B * T, Co)
    dw = np.dot(cols.T, dy2).reshape(K, Ci, Co)
    db = np.zeros(Co, dtype=x.dtype)
    for r in range(B * T):
        for o in range(Co):
            db[o] += dy2[r, o]
    w2 = np.ascontiguousarray(w).reshape(K * Ci, Co)
    dcols = np.dot(dy2, w2.T)
    dx = np.zeros_like(x)
    for b in range(B):
        for t in range(T):
            row = b * T + t
            for k in range(K):
                s = t + k - pad
                if 0 <= s < T:
                    base = k * Ci
                    for c in range(Ci):
                        dx[b, s, c] += dcols[row, base + c]
    return dx, dw, db


@njit(cache=True)
def maxpool_fwd(x, window):
    B, T, C = x.shape
    Tp = T // window
    y = np.empty((B, Tp, C), dtype=x.dtype)
    idx = np.empty((B, Tp, C), dtype=np.int64)
    for b in range(B):
        for p in range(Tp):
            start = p * window
            for c in range(C):
                best = x[b, start, c]
                besti = start
                for t in range(start + 1, start + window):
                    if x[b, t, c] > best:
                        best = x[b, t, c]
                        besti = t
                y[b, p, c] = best
                idx[b, p, c] = besti
    return y, idx


@njit(cache=True)
def maxpool_bwd(dy, idx, T):
    B, Tp, C = dy.shape
    dx = np.zeros((B, T, C), dtype=dy.dtype)
    for b in range(B):
        for p in range(Tp):
            for c in range(C):
                dx[b, idx[b, p, c], c] += dy[b, p, c]
    return dx


@njit(cache=True)
def _sigmoid(z):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        for j in range(z.shape[1]):
            v = z[i, j]
            if v >= 0.0:
                out[i, j] = 1.0 / (1.0 + np.exp(-v))
            else:
                e = np.exp(v)
                out[i, j] = e / (1.0 + e)
    return out


@njit(cache=True)
def lstm_fwd(x, wx, wh, b):
    B, T, _ = x.shape
    H = wh.shape[0]
    hs = np.zeros((T + 1, B, H), dtype=x.dtype)
    cs = np.zeros((T + 1, B, H), dtype=x.dtype)
    gates = np.zeros((T, B, 4 * H), dtype=x.dtype)
    for t in range(T):
        xt = np.ascontiguousarray(x[:, t, :])
        z = np.dot(xt, wx) + np.dot(hs[t], wh)
        for r in range(B):
            for j in range(4 * H):
                z[r, j] += b[j]
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


@njit(cache=True)
def lstm_bwd(x, wx, wh, hs, cs, gates, dh_last):
    B, T, _ = x.shape
    H = wh.shape[0]
    dwx = np.zeros_like(wx)
    dwh = np.zeros_like(wh)
    db = np.zeros(4 * H, dtype=x.dtype)
    dx = np.zeros_like(x)
    dh = dh_last.copy()
    dc = np.zeros((B, H), dtype=x.dtype)
    for t in range(T - 1, -1, -1):
        i = gates[t, :, :H]
        f = gates[t, :, H : 2 * H]
        g = gates[t, :, 2 * H : 3 * H]
        o = gates[t, :, 3 * H :]
        tc = np.tanh(cs[t + 1])
        dz = np.empty((B, 4 * H), dtype=x.dtype)
        for r in range(B):
            for j in range(H):
                dcv = dc[r, j] + dh[r, j] * o[r, j] * (1.0 - tc[r, j] * tc[r, j])
                dz[r, j] = dcv * g[r, j] * i[r, j] * (1.0 - i[r, j])
                dz[r, H + j] = dcv * cs[t, r, j] * f[r, j] * (1.0 - f[r, j])
                dz[r, 2 * H + j] = dcv * i[r, j] * (1.0 - g[r, j] * g[r, j])
                dz[r, 3 * H + j] = dh[r, j] * tc[r, j] * o[r, j] * (1.0 - o[r, j])
                dc[r, j] = dcv * f[r, j]
        xt = np.ascontiguousarray(x[:, t, :])
        dwx += np.dot(xt.T, dz)
        dwh += np.dot(hs[t].T, dz)
        for r in range(B):
            for j in range(4 * H):
                db[j] += dz[r, j]
        dh = np.dot(dz, wh.T)
        dx[:, t, :] = np.dot(dz, wx.T)
    return dx, dwx, dwh, db
