"""Module system and the layers the models are built from."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from . import autodiff as ad
from .autodiff import Tensor


class Module:
    """Base class: parameter discovery by attribute walking."""

    def _walk(self, prefix: str, trainable_only: bool):
        for name, value in vars(self).items():
            path = f"{prefix}{name}"
            if isinstance(value, Tensor):
                if value.requires_grad or not trainable_only:
                    yield path, value
            elif isinstance(value, Module):
                yield from value._walk(f"{path}.", trainable_only)
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item._walk(f"{path}.{i}.", trainable_only)
                    elif isinstance(item, Tensor):
                        if item.requires_grad or not trainable_only:
                            yield f"{path}.{i}", item

    def named_parameters(self, prefix: str = ""):
        """Trainable tensors only — what an optimizer should receive."""
        yield from self._walk(prefix, trainable_only=True)

    def named_tensors(self, prefix: str = ""):
        """Every weight tensor, trainable or frozen — what persistence uses."""
        yield from self._walk(prefix, trainable_only=False)

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def parameter_count(self) -> int:
        return sum(p.data.size for _, p in self.named_tensors())

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_tensors()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = dict(self.named_tensors())
        missing = set(params) - set(state)
        extra = set(state) - set(params)
        if missing or extra:
            raise ShapeMismatch(
                f"state dict mismatch: missing={sorted(missing)} "
                f"unexpected={sorted(extra)}")
        for name, p in params.items():
            arr = np.asarray(state[name], dtype=p.data.dtype)
            if arr.shape != p.data.shape:
                raise ShapeMismatch(
                    f"parameter {name}: shape {arr.shape} != {p.data.shape}")
            p.data = arr.copy()

    def freeze(self) -> None:
        for p in self.parameters():
            p.requires_grad = False

    def set_trainable(self, flag: bool) -> None:
        # walk all tensors, not just currently-trainable ones
        for name, value in vars(self).items():
            if isinstance(value, Tensor):
                value.requires_grad = flag
            elif isinstance(value, Module):
                value.set_trainable(flag)
            elif isinstance(value, (list, tuple)):
                for item in value:
                    if isinstance(item, Module):
                        item.set_trainable(flag)
                    elif isinstance(item, Tensor):
                        item.requires_grad = flag


def _uniform(rng: np.random.Generator, shape, bound: float) -> np.ndarray:
    return rng.uniform(-bound, bound, size=shape).astype(np.float32)


class Conv1d(Module):
    def __init__(self, cin: int, cout: int, k: int, rng: np.random.Generator,
                 stride: int = 1, pad: int | None = None, bias: bool = True):
        self.stride = stride
        self.pad = (k - 1) // 2 if pad is None else pad
        bound = float(np.sqrt(1.0 / (cin * k)))
        self.w = Tensor(_uniform(rng, (cout, cin, k), bound), requires_grad=True)
        self.b = Tensor(np.zeros(cout, dtype=np.float32),
                        requires_grad=True) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return ad.conv1d(x, self.w, self.b, stride=self.stride, pad=self.pad)


class Linear(Module):
    def __init__(self, fin: int, fout: int, rng: np.random.Generator,
                 bias: bool = True):
        bound = float(np.sqrt(1.0 / fin))
        self.w = Tensor(_uniform(rng, (fin, fout), bound), requires_grad=True)
        self.b = Tensor(np.zeros(fout, dtype=np.float32),
                        requires_grad=True) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        out = ad.matmul(x, self.w)
        if self.b is not None:
            out = out + self.b
        return out


class Embedding(Module):
    def __init__(self, count: int, dim: int, rng: np.random.Generator):
        self.w = Tensor(
            (0.1 * rng.standard_normal((count, dim))).astype(np.float32),
            requires_grad=True)

    def __call__(self, indices) -> Tensor:
        return ad.embedding(self.w, indices)
