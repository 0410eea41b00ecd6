"""Motion codec: maps normalized pose features to a compact temporal latent.

Variants
--------
``vae``  : encoder emits a Gaussian (mu, logvar) per latent frame; training
           samples the latent and regularizes it toward N(0, I).
``ae``   : deterministic latent with an L2 norm penalty instead.
``none`` : identity pass-through (latent == features, no parameters); exists
           so the rest of the pipeline can run directly in feature space for
           ablations and speed comparisons.

Both trained variants compress time by 4x (two stride-2 convolutions) and are
fully convolutional, so any clip length works: inputs are edge-padded up to a
multiple of the compression factor and outputs cropped back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Diverged, OutOfRange, VariantMismatch
from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.layers import Conv1d, Module
from .nn.optim import Adam

VARIANTS = ("vae", "ae", "none")


@dataclass
class MotionCode:
    """Encoded motion: per-frame latent distribution at compressed rate."""
    mu: np.ndarray                 # (N, C, Tc) float32
    logvar: np.ndarray | None      # (N, C, Tc) for the vae variant, else None
    t_original: int                # frames before padding, at full rate

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        if self.logvar is None:
            return self.mu
        eps = rng.standard_normal(self.mu.shape).astype(self.mu.dtype)
        return self.mu + np.exp(0.5 * self.logvar) * eps


def pad_to_multiple(x: np.ndarray, multiple: int) -> np.ndarray:
    """Edge-replicate the time axis of (N, C, T) up to a multiple."""
    t = x.shape[-1]
    rem = (-t) % multiple
    if rem == 0:
        return x
    return np.concatenate([x, np.repeat(x[..., -1:], rem, axis=-1)], axis=-1)


class MotionCodec(Module):
    """Encoder/decoder pair over (N, feature_dim, T) arrays."""

    def __init__(self, feature_dim: int, latent_dim: int = 512,
                 hidden: int = 384, variant: str = "vae",
                 rng: np.random.Generator | None = None):
        if variant not in VARIANTS:
            raise VariantMismatch(f"unknown codec variant {variant!r}, "
                                  f"expected one of {VARIANTS}")
        self.feature_dim = int(feature_dim)
        self.variant = variant
        if variant == "none":
            self.latent_dim = self.feature_dim
            self.hidden = 0
            self.compression = 1
            return
        if rng is None:
            rng = np.random.default_rng(0)
        self.latent_dim = int(latent_dim)
        self.hidden = int(hidden)
        self.compression = 4
        d, h, c = self.feature_dim, self.hidden, self.latent_dim
        self.enc1 = Conv1d(d, h, 3, rng, stride=2)
        self.enc2 = Conv1d(h, h, 3, rng, stride=2)
        self.enc_mu = Conv1d(h, c, 1, rng)
        if variant == "vae":
            self.enc_logvar = Conv1d(h, c, 1, rng)
        self.dec1 = Conv1d(c, h, 3, rng)
        self.dec2 = Conv1d(h, h, 3, rng)
        self.dec_out = Conv1d(h, d, 1, rng)

    # -- graph-building halves (Tensor in, Tensor out) ----------------------

    def encode_t(self, x: Tensor) -> tuple[Tensor, Tensor | None]:
        """x (N, D, T) with T divisible by the compression factor."""
        if self.variant == "none":
            return x, None
        h = ad.leaky_relu(self.enc1(x))
        h = ad.leaky_relu(self.enc2(h))
        mu = self.enc_mu(h)
        logvar = self.enc_logvar(h) if self.variant == "vae" else None
        return mu, logvar

    def decode_t(self, z: Tensor, t_out: int | None = None) -> Tensor:
        """z (N, C, Tc) -> features (N, D, Tc * compression), cropped to t_out."""
        if self.variant == "none":
            y = z
        else:
            h = ad.leaky_relu(self.dec1(ad.upsample_linear2(z)))
            h = ad.leaky_relu(self.dec2(ad.upsample_linear2(h)))
            y = self.dec_out(h)
        if t_out is not None and t_out != y.shape[2]:
            if t_out > y.shape[2]:
                raise OutOfRange(f"cannot crop length {y.shape[2]} to {t_out}")
            y = y[:, :, :t_out]
        return y

    # -- array convenience wrappers ------------------------------------------

    def encode(self, x: np.ndarray) -> MotionCode:
        """x (N, D, T) float32 -> MotionCode (no gradient graph)."""
        x = np.ascontiguousarray(x, dtype=np.float32)
        t = x.shape[-1]
        xp = pad_to_multiple(x, self.compression)
        mu, logvar = self.encode_t(Tensor(xp))
        return MotionCode(mu=mu.data, t_original=t,
                          logvar=None if logvar is None else logvar.data)

    def decode(self, z: np.ndarray, t_out: int) -> np.ndarray:
        z = np.ascontiguousarray(z, dtype=np.float32)
        return self.decode_t(Tensor(z), t_out).data

    def reconstruct(self, x: np.ndarray) -> np.ndarray:
        code = self.encode(x)
        return self.decode(code.mu, code.t_original)

    # -- persistence ---------------------------------------------------------

    def meta(self) -> dict:
        return {"kind": "codec", "variant": self.variant,
                "feature_dim": self.feature_dim, "latent_dim": self.latent_dim,
                "hidden": self.hidden}

    @classmethod
    def from_meta(cls, meta: dict) -> "MotionCodec":
        if meta.get("kind") != "codec":
            raise VariantMismatch(f"checkpoint is a {meta.get('kind')!r}, not a codec")
        return cls(feature_dim=meta["feature_dim"], latent_dim=meta["latent_dim"],
                   hidden=meta["hidden"], variant=meta["variant"])


def latent_reg_loss(mu: Tensor, logvar: Tensor | None, variant: str, *,
                    kld_weight: float = 1e-3, l1_weight: float = 1e-3,
                    sms_weight: float = 1e-3) -> Tensor:
    """Weighted latent regularizer, each term averaged per element.

    vae : kld_weight * KL(N(mu, sigma) || N(0, I))
    ae  : l1_weight * |z| + sms_weight * |z_t - z_{t-1}|; the second term
          penalizes temporal roughness of the code, which is what keeps the
          decoded motion free of frame-rate jitter.
    none: 0 (nothing to regularize).
    """
    if variant == "vae":
        if logvar is None:
            raise VariantMismatch("vae regularizer needs a logvar tensor")
        kl = (mu * mu + ad.texp(logvar) - logvar - 1.0) * 0.5
        return kl.mean() * kld_weight
    if variant == "ae":
        reg = ad.tabs(mu).mean() * l1_weight
        if mu.shape[2] > 1:
            reg = reg + ad.tabs(mu[:, :, 1:] - mu[:, :, :-1]).mean() * sms_weight
        return reg
    return Tensor(np.zeros((), dtype=np.float32))


def sample_windows(seqs, window: int, batch: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Stack random windows from random sequences -> (B, D, window) float32."""
    out = np.empty((batch, seqs[0].frames.shape[1], window), dtype=np.float32)
    for i in range(batch):
        seq = seqs[rng.integers(len(seqs))]
        start = int(rng.integers(seq.length - window + 1))
        out[i] = seq.frames[start:start + window].T
    return out


def train_codec(codec: MotionCodec, seqs, *, steps: int, batch: int = 16,
                window: int = 64, lr: float = 1e-3, warmup: int = 50,
                grad_clip: float | None = 5.0, kld_weight: float = 1e-3,
                l1_weight: float = 1e-3, sms_weight: float = 1e-3,
                rng: np.random.Generator | None = None,
                log_every: int = 50, log=None) -> list[dict]:
    """L1 reconstruction training on normalized windows.

    Returns a history of {step, loss, rec, reg}. Raises Diverged on a
    non-finite loss. The ``none`` variant has nothing to train.
    """
    if codec.variant == "none":
        return []
    if rng is None:
        rng = np.random.default_rng(0)
    if window % codec.compression != 0:
        raise OutOfRange(f"window {window} not divisible by x{codec.compression}")
    short = [s.name or "?" for s in seqs if s.length < window]
    if short:
        raise OutOfRange(f"sequences shorter than window {window}: {short[:5]}")

    opt = Adam(codec.parameters(), lr=lr, warmup_steps=warmup, grad_clip=grad_clip)
    history: list[dict] = []
    for step in range(steps):
        x = Tensor(sample_windows(seqs, window, batch, rng))
        mu, logvar = codec.encode_t(x)
        if codec.variant == "vae":
            eps = rng.standard_normal(mu.shape).astype(np.float32)
            z = mu + ad.texp(logvar * 0.5) * eps
        else:
            z = mu
        y = codec.decode_t(z, window)
        rec = ad.tabs(y - x).mean()
        reg = latent_reg_loss(mu, logvar, codec.variant, kld_weight=kld_weight,
                              l1_weight=l1_weight, sms_weight=sms_weight)
        loss = rec + reg
        val = float(loss.data)
        if not np.isfinite(val):
            raise Diverged(f"codec loss became non-finite at step {step}")
        opt.zero_grad()
        loss.backward()
        opt.step()
        if step % log_every == 0 or step == steps - 1:
            entry = {"step": step, "loss": val, "rec": float(rec.data),
                     "reg": float(reg.data)}
            history.append(entry)
            if log is not None:
                log(f"codec step {step:5d}  loss {val:.4f}  "
                    f"rec {entry['rec']:.4f}  reg {entry['reg']:.4f}")
    return history
