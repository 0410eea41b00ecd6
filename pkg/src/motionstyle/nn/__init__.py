"""Minimal reverse-mode autodiff + layers used by all models in the package."""

from . import autodiff, backend, layers, optim
from .autodiff import Tensor

__all__ = ["autodiff", "backend", "layers", "optim", "Tensor"]
