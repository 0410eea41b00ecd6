"""Global-motion predictor: root trajectory channels from local pose channels.

Generated motion comes out of the decoder with plausible local poses but a
root trajectory that need not be consistent with them (nothing ties decoded
root velocities to decoded leg motion). This small temporal conv net predicts
the root channels (yaw velocity, planar velocity, height) from the local
channels (positions, velocities, rotations), trained on real clips where the
two are consistent by construction. At inference the predicted yaw/planar
velocities replace the decoded ones; the decoded height is kept since it is
itself a local, per-frame quantity.
"""

from __future__ import annotations

import numpy as np

from .errors import Diverged, OutOfRange, VariantMismatch
from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.layers import Conv1d, Module
from .nn.optim import Adam
from .codec import sample_windows


class GlobalMotionPredictor(Module):
    """(N, C_local, T) -> (N, 4, T) root channels, stride-1 convolutions."""

    def __init__(self, in_channels: int, hidden: int = 128,
                 rng: np.random.Generator | None = None):
        if rng is None:
            rng = np.random.default_rng(0)
        self.in_channels = int(in_channels)
        self.hidden = int(hidden)
        self.f1 = Conv1d(in_channels, hidden, 3, rng)
        self.f2 = Conv1d(hidden, hidden, 3, rng)
        self.f3 = Conv1d(hidden, 4, 3, rng)

    def __call__(self, x: Tensor) -> Tensor:
        h = ad.leaky_relu(self.f1(x))
        h = ad.leaky_relu(self.f2(h))
        return self.f3(h)

    def predict(self, local: np.ndarray) -> np.ndarray:
        """Array wrapper: (N, C_local, T) -> (N, 4, T), no gradient graph."""
        local = np.ascontiguousarray(local, dtype=np.float32)
        if local.shape[1] != self.in_channels:
            raise OutOfRange(
                f"expected {self.in_channels} local channels, got {local.shape[1]}")
        return self(Tensor(local)).data

    def meta(self) -> dict:
        return {"kind": "gmp", "in_channels": self.in_channels,
                "hidden": self.hidden}

    @classmethod
    def from_meta(cls, meta: dict) -> "GlobalMotionPredictor":
        if meta.get("kind") != "gmp":
            raise VariantMismatch(
                f"checkpoint is a {meta.get('kind')!r}, not a global-motion predictor")
        return cls(in_channels=meta["in_channels"], hidden=meta["hidden"])


def local_channel_slice(feature_dim: int) -> slice:
    """Positions + velocities + rotations: everything between root channels
    and contact flags."""
    return slice(4, feature_dim - 4)


def train_gmp(gmp: GlobalMotionPredictor, seqs, *, steps: int, batch: int = 16,
              window: int = 64, lr: float = 1e-3, warmup: int = 50,
              grad_clip: float | None = 5.0,
              rng: np.random.Generator | None = None,
              log_every: int = 50, log=None) -> list[dict]:
    """L1 regression of root channels from local channels on real clips."""
    if rng is None:
        rng = np.random.default_rng(0)
    feature_dim = seqs[0].frames.shape[1]
    local = local_channel_slice(feature_dim)
    opt = Adam(gmp.parameters(), lr=lr, warmup_steps=warmup, grad_clip=grad_clip)
    history: list[dict] = []
    for step in range(steps):
        x = sample_windows(seqs, window, batch, rng)
        pred = gmp(Tensor(np.ascontiguousarray(x[:, local])))
        target = Tensor(np.ascontiguousarray(x[:, 0:4]))
        loss = ad.tabs(pred - target).mean()
        val = float(loss.data)
        if not np.isfinite(val):
            raise Diverged(f"global-motion loss became non-finite at step {step}")
        opt.zero_grad()
        loss.backward()
        opt.step()
        if step % log_every == 0 or step == steps - 1:
            history.append({"step": step, "loss": val})
            if log is not None:
                log(f"gmp step {step:5d}  loss {val:.4f}")
    return history
