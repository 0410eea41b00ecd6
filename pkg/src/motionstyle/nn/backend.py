"""Kernel backend selection and the conv1d wrapper layer.

The env var ``MOTIONSTYLE_BACKEND`` picks the implementation:

* ``auto``  (default) -- numba kernels when numba imports, numpy otherwise
* ``numba`` -- require the compiled kernels, fail loudly if unavailable
* ``numpy`` -- force the pure-numpy fallback

``set_backend()`` overrides the env var at runtime (used by the benchmark
command to time both paths in one process).
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import OutOfRange
from . import kernels_numpy

try:
    from . import kernels_numba
    HAS_NUMBA = True
except ImportError:                                   # pragma: no cover
    kernels_numba = None
    HAS_NUMBA = False

_FORCED: str | None = None


def available_backends() -> list[str]:
    return ["numba", "numpy"] if HAS_NUMBA else ["numpy"]


def set_backend(name: str | None) -> None:
    """Force a backend ('numba' | 'numpy'), or None to re-read the env var."""
    global _FORCED
    if name is not None:
        if name not in ("numba", "numpy"):
            raise OutOfRange(f"unknown backend {name!r}")
        if name == "numba" and not HAS_NUMBA:
            raise OutOfRange("numba backend requested but numba is unavailable")
    _FORCED = name


def backend_name() -> str:
    if _FORCED is not None:
        return _FORCED
    env = os.environ.get("MOTIONSTYLE_BACKEND", "auto").lower()
    if env not in ("auto", "numba", "numpy"):
        raise OutOfRange(
            f"MOTIONSTYLE_BACKEND={env!r}, expected auto|numba|numpy")
    if env == "numpy":
        return "numpy"
    if env == "numba" and not HAS_NUMBA:
        raise OutOfRange("MOTIONSTYLE_BACKEND=numba but numba is unavailable")
    return "numba" if HAS_NUMBA else "numpy"


def _impl():
    return kernels_numba if backend_name() == "numba" else kernels_numpy


def conv_out_len(t: int, k: int, stride: int, pad: int) -> int:
    return (t + 2 * pad - k) // stride + 1


def conv1d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray | None,
                   stride: int, pad: int) -> np.ndarray:
    """x (N, Cin, T), w (Cout, Cin, K), b (Cout,) -> (N, Cout, Tout)."""
    n, cin, t = x.shape
    cout, _, k = w.shape
    t_out = conv_out_len(t, k, stride, pad)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad))) if pad else x
    xp = np.ascontiguousarray(xp)
    w2 = np.ascontiguousarray(w.reshape(cout, cin * k))
    y2 = _impl().conv1d_fwd(xp, w2, stride, k, t_out)
    y = np.ascontiguousarray(
        y2.reshape(n, t_out, cout).transpose(0, 2, 1))
    if b is not None:
        y += b.reshape(1, cout, 1)
    return y


def conv1d_backward(x: np.ndarray, w: np.ndarray, gy: np.ndarray,
                    stride: int, pad: int):
    """Gradients (gx, gw, gb) for conv1d_forward."""
    n, cin, t = x.shape
    cout, _, k = w.shape
    t_out = gy.shape[2]
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad))) if pad else x
    xp = np.ascontiguousarray(xp)
    w2 = np.ascontiguousarray(w.reshape(cout, cin * k))
    gy2 = np.ascontiguousarray(gy.transpose(0, 2, 1)).reshape(n * t_out, cout)
    gxp, gw2 = _impl().conv1d_bwd(xp, w2, gy2, stride, k, t_out)
    gx = gxp[:, :, pad:pad + t] if pad else gxp
    gw = gw2.reshape(cout, cin, k)
    gb = gy.sum(axis=(0, 2))
    return np.ascontiguousarray(gx), gw, gb
