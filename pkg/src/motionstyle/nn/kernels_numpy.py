"""Pure-numpy conv1d kernels (fallback path).

Same contracts as kernels_numba: im2col via stride tricks + BLAS matmul for
the forward/weight-gradient, K strided slice-adds for the input-gradient
scatter. Numerically equivalent to the numba path (same matmuls, same
accumulation structure up to float addition order).
"""

import numpy as np


def _gather(xp, stride, k, t_out):
    n, c, _ = xp.shape
    win = np.lib.stride_tricks.sliding_window_view(xp, k, axis=2)
    win = win[:, :, ::stride, :][:, :, :t_out, :]         # (N, C, Tout, K)
    return np.ascontiguousarray(win.transpose(0, 2, 1, 3)).reshape(
        n * t_out, c * k)


def conv1d_fwd(xp, w2, stride, k, t_out):
    cols = _gather(xp, stride, k, t_out)
    return cols @ w2.T


def conv1d_bwd(xp, w2, gy2, stride, k, t_out):
    n, c, tp = xp.shape
    cols = _gather(xp, stride, k, t_out)
    gw2 = gy2.T @ cols
    gcols = (gy2 @ w2).reshape(n, t_out, c, k).transpose(0, 2, 3, 1)
    gxp = np.zeros((n, c, tp), dtype=xp.dtype)
    for kk in range(k):
        stop = kk + stride * t_out
        gxp[:, :, kk:stop:stride] += gcols[:, :, kk, :]
    return gxp, gw2
