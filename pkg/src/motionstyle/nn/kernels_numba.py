"""Numba-compiled conv1d kernels (the hot path).

The expensive parts of 1-D convolution are the im2col gather and the col2im
scatter-add; the matmul itself goes through BLAS (``np.dot`` inside nopython
mode dispatches to it). Kernels are serial on purpose: results are
bit-reproducible regardless of thread settings.

Shapes (all arrays contiguous):
    xp   (N, C, Tp)       zero-padded input
    w2   (Cout, C*K)      flattened weights
    y2   (N*Tout, Cout)   output, row = (sample, timestep)
    gy2  (N*Tout, Cout)   upstream gradient in the same layout
"""

import numpy as np
from numba import njit


@njit(cache=True, fastmath=False)
def _gather(xp, stride, k, t_out):
    n, c, _ = xp.shape
    cols = np.empty((n * t_out, c * k), dtype=xp.dtype)
    for i in range(n):
        for t in range(t_out):
            row = i * t_out + t
            base = t * stride
            for cc in range(c):
                off = cc * k
                for kk in range(k):
                    cols[row, off + kk] = xp[i, cc, base + kk]
    return cols


@njit(cache=True, fastmath=False)
def conv1d_fwd(xp, w2, stride, k, t_out):
    cols = _gather(xp, stride, k, t_out)
    return np.dot(cols, w2.T)


@njit(cache=True, fastmath=False)
def conv1d_bwd(xp, w2, gy2, stride, k, t_out):
    n, c, tp = xp.shape
    cols = _gather(xp, stride, k, t_out)
    gw2 = np.dot(np.ascontiguousarray(gy2.T), cols)       # (Cout, C*K)
    gcols = np.dot(gy2, w2)                               # (N*Tout, C*K)
    gxp = np.zeros((n, c, tp), dtype=xp.dtype)
    for i in range(n):
        for t in range(t_out):
            row = i * t_out + t
            base = t * stride
            for cc in range(c):
                off = cc * k
                for kk in range(k):
                    gxp[i, cc, base + kk] += gcols[row, off + kk]
    return gxp, gw2
