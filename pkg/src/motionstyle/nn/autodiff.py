"""Reverse-mode automatic differentiation over numpy arrays.

A Tensor wraps an ndarray plus an optional backward closure; calling
``backward()`` on a scalar loss topologically sorts the graph and accumulates
gradients into ``.grad``. Graph edges are only recorded when a parent
requires grad, so frozen submodules cost nothing and computations with no
trainable inputs build no graph at all.

Dtype follows the data (float32 for training, float64 for gradient checks);
gradients share the data's dtype.
"""

from __future__ import annotations

import numpy as np

from . import backend


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = data if isinstance(data, np.ndarray) else np.asarray(data)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple = ()
        self._backward = None

    # -- graph plumbing -----------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def _add_grad(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def zero_grad(self):
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:                     # iterative DFS; graphs can be deep
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None:
                node._backward()

    # -- operators ----------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return mul(self, powc(other, -1.0))
        return mul(self, 1.0 / other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return narrow(self, key)

    # convenience
    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis, keepdims)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 else shape[0])

    def transpose(self, *axes):
        return transpose(self, axes)


def as_tensor(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    if isinstance(x, (bool, int, float)):
        # wrap python scalars as float32 so they never promote a float32
        # graph to float64 (0-d arrays are strongly typed under NEP 50);
        # float64 graphs win the promotion either way.
        return Tensor(np.asarray(x, dtype=np.float32))
    return Tensor(np.asarray(x))


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape` (reverse numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _needs_grad(*ts: Tensor) -> bool:
    return any(t.requires_grad for t in ts)


# ---------------------------------------------------------------------------
# elementwise / arithmetic


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data + b.data)
    if _needs_grad(a, b):
        out.requires_grad = True
        out._parents = (a, b)

        def _bw():
            if a.requires_grad:
                a._add_grad(_unbroadcast(out.grad, a.data.shape))
            if b.requires_grad:
                b._add_grad(_unbroadcast(out.grad, b.data.shape))
        out._backward = _bw
    return out


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data * b.data)
    if _needs_grad(a, b):
        out.requires_grad = True
        out._parents = (a, b)

        def _bw():
            if a.requires_grad:
                a._add_grad(_unbroadcast(out.grad * b.data, a.data.shape))
            if b.requires_grad:
                b._add_grad(_unbroadcast(out.grad * a.data, b.data.shape))
        out._backward = _bw
    return out


def powc(a, p: float) -> Tensor:
    """Elementwise power with a constant exponent."""
    a = as_tensor(a)
    out = Tensor(a.data ** p)
    if a.requires_grad:
        out.requires_grad = True
        out._parents = (a,)

        def _bw():
            a._add_grad(out.grad * p * a.data ** (p - 1.0))
        out._backward = _bw
    return out


def texp(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.exp(a.data))
    if a.requires_grad:
        out.requires_grad = True
        out._parents = (a,)

        def _bw():
            a._add_grad(out.grad * out.data)
        out._backward = _bw
    return out


def tlog(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.log(a.data))
    if a.requires_grad:
        out.requires_grad = True
        out._parents = (a,)

        def _bw():
            a._add_grad(out.grad / a.data)
        out._backward = _bw
    return out


def tsqrt(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.sqrt(a.data))
    if a.requires_grad:
        out.requires_grad = True
        out._parents = (a,)

        def _bw():
            a._add_grad(out.grad * 0.5 / out.data)
        out._backward = _bw
    return out


def tabs(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.abs(a.data))
    if a.requires_grad:
        out.requires_grad = True
        out._parents = (a,)

        def _bw():
            a._add_grad(out.grad * np.sign(a.data))
        out._backward = _bw
    return out


def leaky_relu(a, slope: float = 0.2) -> Tensor:
    a = as_tensor(a)
    mask = a.data >= 0
    out = Tensor(np.where(mask, a.data, slope * a.data))
    if a.requires_grad:
        out.requires_grad = True
        out._parents = (a,)

        def _bw():
            a._add_grad(out.grad * np.where(mask, 1.0, slope).astype(a.dtype))
        out._backward = _bw
    return out


# ---------------------------------------------------------------------------
# reductions


def tsum(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data.sum(axis=axis, keepdims=keepdims))
    if a.requires_grad:
        out.requires_grad = True
        out._parents = (a,)

        def _bw():
            g = out.grad
            if axis is not None and not keepdims:
                axes = axis if isinstance(axis, tuple) else (axis,)
                axes = tuple(ax % a.data.ndim for ax in axes)
                shape = [1 if i in axes else s
                         for i, s in enumerate(a.data.shape)]
                g = g.reshape(shape)
            a._add_grad(np.broadcast_to(g, a.data.shape).astype(a.dtype))
        out._backward = _bw
    return out


def tmean(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    if axis is None:
        count = a.data.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = 1
        for ax in axes:
            count *= a.data.shape[ax]
    return mul(tsum(a, axis, keepdims), 1.0 / count)


# ---------------------------------------------------------------------------
# shape ops


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data.reshape(shape))
    if a.requires_grad:
        out.requires_grad = True
        out._parents = (a,)

        def _bw():
            a._add_grad(out.grad.reshape(a.data.shape))
        out._backward = _bw
    return out


def transpose(a, axes) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.ascontiguousarray(a.data.transpose(axes)))
    if a.requires_grad:
        out.requires_grad = True
        out._parents = (a,)
        inv = np.argsort(axes)

        def _bw():
            a._add_grad(out.grad.transpose(inv))
        out._backward = _bw
    return out


def narrow(a, key) -> Tensor:
    """Basic slicing with gradient scatter (no fancy indexing)."""
    a = as_tensor(a)
    out = Tensor(np.ascontiguousarray(a.data[key]))
    if a.requires_grad:
        out.requires_grad = True
        out._parents = (a,)

        def _bw():
            g = np.zeros_like(a.data)
            g[key] += out.grad
            a._add_grad(g)
        out._backward = _bw
    return out


def concat(tensors, axis: int) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis))
    if any(t.requires_grad for t in tensors):
        out.requires_grad = True
        out._parents = tuple(tensors)
        sizes = [t.data.shape[axis] for t in tensors]

        def _bw():
            start = 0
            for t, size in zip(tensors, sizes):
                if t.requires_grad:
                    idx = [slice(None)] * out.data.ndim
                    idx[axis] = slice(start, start + size)
                    t._add_grad(out.grad[tuple(idx)])
                start += size
        out._backward = _bw
    return out


# ---------------------------------------------------------------------------
# linear algebra


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data @ b.data)
    if _needs_grad(a, b):
        out.requires_grad = True
        out._parents = (a, b)

        def _bw():
            if a.requires_grad:
                a._add_grad(out.grad @ b.data.T)
            if b.requires_grad:
                b._add_grad(a.data.T @ out.grad)
        out._backward = _bw
    return out


# ---------------------------------------------------------------------------
# network ops


def conv1d(x, w, b, stride: int = 1, pad: int | None = None) -> Tensor:
    """1-D convolution, x (N, Cin, T), w (Cout, Cin, K), b (Cout,) or None."""
    x, w = as_tensor(x), as_tensor(w)
    b = as_tensor(b) if b is not None else None
    k = w.data.shape[2]
    if pad is None:
        pad = (k - 1) // 2
    y = backend.conv1d_forward(x.data, w.data,
                               b.data if b is not None else None, stride, pad)
    out = Tensor(y)
    parents = (x, w) + ((b,) if b is not None else ())
    if _needs_grad(*parents):
        out.requires_grad = True
        out._parents = parents

        def _bw():
            gx, gw, gb = backend.conv1d_backward(
                x.data, w.data, out.grad, stride, pad)
            if x.requires_grad:
                x._add_grad(gx)
            if w.requires_grad:
                w._add_grad(gw)
            if b is not None and b.requires_grad:
                b._add_grad(gb)
        out._backward = _bw
    return out


def upsample_linear2(x) -> Tensor:
    """Double the time axis of (N, C, T) with linear interpolation.

    out[2i] = x[i], out[2i+1] = (x[i] + x[i+1]) / 2 (last repeats).
    """
    x = as_tensor(x)
    d = x.data
    n, c, t = d.shape
    out_d = np.empty((n, c, 2 * t), dtype=d.dtype)
    out_d[:, :, 0::2] = d
    out_d[:, :, 1:-1:2] = 0.5 * (d[:, :, :-1] + d[:, :, 1:])
    out_d[:, :, -1] = d[:, :, -1]
    out = Tensor(out_d)
    if x.requires_grad:
        out.requires_grad = True
        out._parents = (x,)

        def _bw():
            g = out.grad
            gx = g[:, :, 0::2].copy()
            mids = g[:, :, 1:-1:2]
            gx[:, :, :-1] += 0.5 * mids
            gx[:, :, 1:] += 0.5 * mids
            gx[:, :, -1] += g[:, :, -1]
            x._add_grad(gx)
        out._backward = _bw
    return out


def embedding(weight, indices) -> Tensor:
    """Row lookup, weight (V, D), indices int (N,) -> (N, D)."""
    weight = as_tensor(weight)
    idx = np.asarray(indices)
    out = Tensor(weight.data[idx])
    if weight.requires_grad:
        out.requires_grad = True
        out._parents = (weight,)

        def _bw():
            g = np.zeros_like(weight.data)
            np.add.at(g, idx, out.grad)
            weight._add_grad(g)
        out._backward = _bw
    return out


def softmax_cross_entropy(logits, labels) -> Tensor:
    """Mean cross-entropy, logits (N, K), integer labels (N,)."""
    logits = as_tensor(logits)
    lab = np.asarray(labels)
    z = logits.data
    zmax = z.max(axis=1, keepdims=True)
    ez = np.exp(z - zmax)
    denom = ez.sum(axis=1, keepdims=True)
    logp = (z - zmax) - np.log(denom)
    n = z.shape[0]
    out = Tensor(np.asarray(-logp[np.arange(n), lab].mean(), dtype=z.dtype))
    if logits.requires_grad:
        out.requires_grad = True
        out._parents = (logits,)
        softmax = ez / denom

        def _bw():
            g = softmax.copy()
            g[np.arange(n), lab] -= 1.0
            logits._add_grad(out.grad * g / n)
        out._backward = _bw
    return out


# ---------------------------------------------------------------------------
# normalization building blocks


def instance_norm(x, eps: float = 1e-6) -> Tensor:
    """Normalize (N, C, T) per sample and channel over time."""
    mu = tmean(x, axis=2, keepdims=True)
    centered = x - mu
    var = tmean(mul(centered, centered), axis=2, keepdims=True)
    return centered * powc(var + eps, -0.5)


def adain(x, gamma, beta, eps: float = 1e-6) -> Tensor:
    """Adaptive instance normalization.

    x (N, C, T); gamma/beta (N, C) or (N, C, 1): normalize per
    sample+channel over time, then scale by gamma and shift by beta.
    """
    gamma = as_tensor(gamma)
    beta = as_tensor(beta)
    if gamma.data.ndim == 2:
        gamma = reshape(gamma, gamma.data.shape + (1,))
    if beta.data.ndim == 2:
        beta = reshape(beta, beta.data.shape + (1,))
    return instance_norm(x, eps) * gamma + beta
