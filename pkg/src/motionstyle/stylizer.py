"""Content/style disentangling stylizer over codec latents.

Three parts:

* **Content encoder** — instance-normalizes its input and every layer, which
  strips per-channel scale/offset (the statistics style lives in) and keeps
  only the normalized temporal structure. Fully convolutional, halves the
  temporal rate.
* **Style encoder** — temporal convolutions + global average pooling to a
  single vector per clip, then dense heads produce a Gaussian over style
  codes (a point estimate when ``prob_style`` is off). In supervised mode a
  style-label embedding is concatenated before the heads, so the posterior is
  conditioned on both the motion and its label.
* **Generator** — convolutions whose per-channel statistics are re-injected
  by AdaIN from the style code (plus the label embedding in supervised
  mode); a final un-normalized 1x1 projection returns to latent space. An
  upsample undoes the content encoder's stride so output length equals the
  content input's.

The same class covers supervised (``n_styles > 0``) and fully unsupervised
(``n_styles == 0``) operation; label arguments are then required/forbidden
respectively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LabelForbidden, LabelRequired, VariantMismatch
from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.layers import Conv1d, Embedding, Linear, Module


@dataclass
class StyleDistribution:
    """Gaussian over style codes; degenerates to a point when logvar is None."""
    mu: Tensor                    # (N, S)
    logvar: Tensor | None         # (N, S)

    def sample(self, rng: np.random.Generator) -> Tensor:
        if self.logvar is None:
            return self.mu
        eps = rng.standard_normal(self.mu.shape).astype(np.float32)
        return self.mu + ad.texp(self.logvar * 0.5) * eps

    def mean(self) -> Tensor:
        return self.mu

    def kl_to_standard(self) -> Tensor:
        """KL(self || N(0, I)), summed over dims, averaged over the batch."""
        if self.logvar is None:
            return Tensor(np.zeros((), dtype=np.float32))
        kl = (self.mu * self.mu + ad.texp(self.logvar) - self.logvar - 1.0) * 0.5
        return kl.sum(axis=1).mean()

    def kl_to(self, other: "StyleDistribution") -> Tensor:
        """KL(self || other); squared mean distance in the point-estimate case."""
        if self.logvar is None or other.logvar is None:
            d = self.mu - other.mu
            return (d * d).sum(axis=1).mean()
        var_ratio = ad.texp(self.logvar - other.logvar)
        d = self.mu - other.mu
        kl = (var_ratio + d * d * ad.texp(-other.logvar)
              - 1.0 + other.logvar - self.logvar) * 0.5
        return kl.sum(axis=1).mean()


class _AdaConv(Module):
    """Conv layer whose normalization statistics come from the style code."""

    def __init__(self, cin: int, cout: int, k: int, cond_dim: int,
                 rng: np.random.Generator):
        self.conv = Conv1d(cin, cout, k, rng)
        self.affine = Linear(cond_dim, 2 * cout, rng)
        self.cout = cout

    def __call__(self, x: Tensor, cond: Tensor) -> Tensor:
        h = self.conv(x)
        gb = self.affine(cond)                       # (N, 2C)
        gamma = gb[:, :self.cout] + 1.0              # scale around identity
        beta = gb[:, self.cout:]
        return ad.adain(h, gamma, beta)


class Stylizer(Module):
    """Content/style factorization of codec latents.

    ``n_styles > 0`` builds the supervised variant (label embedding feeds both
    the style posterior and the generator); ``n_styles == 0`` the unsupervised
    one. ``prob_style=False`` makes the style space deterministic.
    """

    def __init__(self, latent_dim: int, content_dim: int = 512,
                 style_dim: int = 512, hidden: int = 512, n_styles: int = 0,
                 label_dim: int = 64, prob_style: bool = True,
                 prob_content: bool = False,
                 rng: np.random.Generator | None = None):
        if rng is None:
            rng = np.random.default_rng(0)
        self.latent_dim = int(latent_dim)
        self.content_dim = int(content_dim)
        self.style_dim = int(style_dim)
        self.hidden = int(hidden)
        self.n_styles = int(n_styles)
        self.label_dim = int(label_dim) if n_styles > 0 else 0
        self.prob_style = bool(prob_style)
        self.prob_content = bool(prob_content)

        # content encoder (normalized at every stage, stride 2 in the middle)
        self.c1 = Conv1d(latent_dim, content_dim, 3, rng)
        self.c2 = Conv1d(content_dim, content_dim, 3, rng, stride=2)
        if prob_content:
            self.c_logvar = Conv1d(content_dim, content_dim, 3, rng, stride=2)

        # style encoder
        self.s1 = Conv1d(latent_dim, hidden, 3, rng, stride=2)
        self.s2 = Conv1d(hidden, hidden, 3, rng, stride=2)
        if self.supervised:
            self.label_emb = Embedding(n_styles, self.label_dim, rng)
        pooled = hidden + self.label_dim
        self.s_mu = Linear(pooled, style_dim, rng)
        if prob_style:
            self.s_logvar = Linear(pooled, style_dim, rng)

        # generator
        cond = style_dim + self.label_dim
        self.g1 = _AdaConv(content_dim, hidden, 3, cond, rng)
        self.g2 = _AdaConv(hidden, hidden, 3, cond, rng)
        self.g3 = _AdaConv(hidden, hidden, 3, cond, rng)
        self.g4 = Conv1d(hidden, latent_dim, 1, rng)

    @property
    def supervised(self) -> bool:
        return self.n_styles > 0

    # -- label plumbing -------------------------------------------------------

    def _check_label(self, label, batch: int) -> np.ndarray | None:
        if self.supervised:
            if label is None:
                raise LabelRequired(
                    "this model is label-conditioned; pass a style label")
            lab = np.atleast_1d(np.asarray(label, dtype=np.int64))
            if lab.shape[0] == 1 and batch > 1:
                lab = np.repeat(lab, batch)
            if lab.shape[0] != batch:
                raise LabelRequired(
                    f"got {lab.shape[0]} labels for a batch of {batch}")
            if lab.min() < 0 or lab.max() >= self.n_styles:
                raise LabelRequired(
                    f"label out of range [0, {self.n_styles}): {lab}")
            return lab
        if label is not None:
            raise LabelForbidden(
                "this model was trained without style labels; omit the label")
        return None

    # -- model halves ---------------------------------------------------------

    def encode_content(self, z: Tensor) -> Tensor:
        """(N, C_lat, Tc) -> (N, C_content, Tc/2), style statistics removed."""
        h = ad.instance_norm(z)
        h = ad.leaky_relu(ad.instance_norm(self.c1(h)))
        return ad.instance_norm(self.c2(h))

    def encode_content_dist(self, z: Tensor) -> tuple[Tensor, Tensor | None]:
        """Content code plus its logvar map for the probabilistic variant."""
        h = ad.instance_norm(z)
        h = ad.leaky_relu(ad.instance_norm(self.c1(h)))
        mu = ad.instance_norm(self.c2(h))
        logvar = self.c_logvar(h) if self.prob_content else None
        return mu, logvar

    def encode_style(self, z: Tensor, label=None) -> StyleDistribution:
        """(N, C_lat, Tc) [+ labels] -> Gaussian over style codes."""
        lab = self._check_label(label, z.shape[0])
        h = ad.leaky_relu(self.s1(z))
        h = ad.leaky_relu(self.s2(h))
        pooled = h.mean(axis=2)                      # (N, hidden)
        if lab is not None:
            pooled = ad.concat([pooled, self.label_emb(lab)], axis=1)
        mu = self.s_mu(pooled)
        logvar = self.s_logvar(pooled) if self.prob_style else None
        return StyleDistribution(mu=mu, logvar=logvar)

    def prior(self, batch: int, dtype=np.float32) -> StyleDistribution:
        """Standard-normal style prior, for label-free style sampling."""
        zeros = np.zeros((batch, self.style_dim), dtype=dtype)
        return StyleDistribution(mu=Tensor(zeros), logvar=Tensor(zeros.copy()))

    def generate(self, content: Tensor, style_code: Tensor,
                 label=None, label_vec: Tensor | None = None) -> Tensor:
        """(N, C_content, Tc/2) + (N, S) [+ labels] -> (N, C_lat, Tc).

        `label_vec` supplies a (N, label_dim) conditioning vector directly,
        bypassing the embedding lookup — used to blend between two labels.
        """
        cond = style_code
        if label_vec is not None:
            if not self.supervised:
                raise LabelForbidden(
                    "this model was trained without style labels; omit the label")
            cond = ad.concat([cond, label_vec], axis=1)
        else:
            lab = self._check_label(label, content.shape[0])
            if lab is not None:
                cond = ad.concat([cond, self.label_emb(lab)], axis=1)
        h = ad.leaky_relu(self.g1(content, cond))
        h = ad.upsample_linear2(h)
        h = ad.leaky_relu(self.g2(h, cond))
        h = ad.leaky_relu(self.g3(h, cond))
        return self.g4(h)

    def stylize_latent(self, z_content: Tensor, z_style: Tensor, label=None,
                       rng: np.random.Generator | None = None,
                       use_mean: bool = True) -> Tensor:
        """Recombine: content of one latent with the style of another."""
        dist = self.encode_style(z_style, label)
        code = dist.mean() if use_mean or rng is None else dist.sample(rng)
        return self.generate(self.encode_content(z_content), code, label)

    # -- persistence ----------------------------------------------------------

    def meta(self) -> dict:
        return {"kind": "stylizer", "latent_dim": self.latent_dim,
                "content_dim": self.content_dim, "style_dim": self.style_dim,
                "hidden": self.hidden, "n_styles": self.n_styles,
                "label_dim": self.label_dim or 64,
                "prob_style": self.prob_style,
                "prob_content": self.prob_content}

    @classmethod
    def from_meta(cls, meta: dict) -> "Stylizer":
        if meta.get("kind") != "stylizer":
            raise VariantMismatch(
                f"checkpoint is a {meta.get('kind')!r}, not a stylizer")
        return cls(latent_dim=meta["latent_dim"], content_dim=meta["content_dim"],
                   style_dim=meta["style_dim"], hidden=meta["hidden"],
                   n_styles=meta["n_styles"], label_dim=meta["label_dim"],
                   prob_style=meta["prob_style"],
                   prob_content=meta.get("prob_content", False))
