"""Stylizer training: triplet sampling, the four-term objective, ablations.

Each optimization step consumes a batch of triplets (m1, m2, m3): m1 and m2
are two windows of one sequence (same style by construction), m3 a window of
a different sequence. All are encoded by the (normally frozen) codec, and the
losses operate on the latents plus their decoded motions:

* reconstruction — regenerating each clip from its own content and style must
  reproduce it, in latent space and after decoding;
* homo-style alignment — the style posteriors of m1 and m2 are pulled
  together (KL);
* swap/cycle — restyling m2's content with m3's style gives a translation t;
  restoring t's content with m2's style must recover m2, and restyling m3's
  content with t's style must recover m3;
* prior regularization — every style posterior used (m1, m2, m3, t) is pulled
  toward N(0, I).

Ablation flags reshape the objective the way the corresponding model
variants do; terms removed from the gradient are still evaluated and
reported so curves stay comparable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codec import MotionCodec
from .errors import (DatasetTooSmall, DimMismatch, Diverged, MissingCodec,
                     NonFiniteLoss, TooShort, VariantMismatch)
from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.optim import Adam
from .pose import PoseSequence, homo_pair, mirror
from .stylizer import StyleDistribution, Stylizer


@dataclass(frozen=True)
class LossWeights:
    """Multipliers on the alignment, cycle, and prior terms."""
    hsa: float
    cyc: float
    kl: float

    @classmethod
    def defaults(cls, mode: str) -> "LossWeights":
        if mode == "supervised":
            return cls(hsa=1.0, cyc=0.1, kl=0.1)
        if mode == "unsupervised":
            return cls(hsa=0.1, cyc=1.0, kl=0.01)
        raise VariantMismatch(f"unknown training mode {mode!r}")


@dataclass
class LossReport:
    """Per-term loss values for one batch; total is the optimized scalar."""
    rec: float
    hsa: float
    cyc: float
    kl: float
    total: float
    finite: dict = field(default_factory=dict)   # term name -> bool
    kl_space_count: int = 0                      # style spaces feeding the kl term

    def all_finite(self) -> bool:
        return all(self.finite.values())


@dataclass
class TrainConfig:
    mode: str = "supervised"          # or "unsupervised"
    steps: int = 20000
    batch: int = 32
    window: int = 64
    lr: float = 1e-4
    warmup: int = 100
    grad_clip: float | None = 5.0
    seed: int = 0
    log_every: int = 50
    weights: LossWeights | None = None        # None -> mode defaults
    # ablations
    no_latent: bool = False
    no_prob_style: bool = False
    no_homo_style: bool = False
    no_autoencoding: bool = False
    no_cycle: bool = False
    prob_content: bool = False
    end_to_end: bool = False

    def resolved_weights(self) -> LossWeights:
        return self.weights if self.weights is not None else LossWeights.defaults(self.mode)


@dataclass
class TripletBatch:
    """Raw motion windows plus provenance; x* are (B, D, W) float32."""
    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    label12: np.ndarray | None      # style labels of the m1/m2 source, (B,)
    label3: np.ndarray | None
    seq1: np.ndarray                # source sequence indices, (B,)
    seq3: np.ndarray


def augment_mirror(seqs: list[PoseSequence]) -> list[PoseSequence]:
    """Original sequences plus their left/right reflections (raw clips only)."""
    return list(seqs) + [mirror(s) for s in seqs]


def sample_triplets(seqs: list[PoseSequence], window: int, batch: int,
                    rng: np.random.Generator,
                    labeled: bool = True) -> TripletBatch:
    """Batch of (same-sequence pair, other-sequence window) triplets."""
    if len(seqs) < 2:
        raise DatasetTooSmall(
            f"triplet sampling needs >= 2 sequences, got {len(seqs)}")
    d = seqs[0].frames.shape[1]
    x1 = np.empty((batch, d, window), dtype=np.float32)
    x2 = np.empty_like(x1)
    x3 = np.empty_like(x1)
    seq1 = np.empty(batch, dtype=np.int64)
    seq3 = np.empty(batch, dtype=np.int64)
    lab12 = np.empty(batch, dtype=np.int64)
    lab3 = np.empty(batch, dtype=np.int64)
    for b in range(batch):
        i = int(rng.integers(len(seqs)))
        w1, w2 = homo_pair(seqs[i], window, rng)
        j = int(rng.integers(len(seqs) - 1))
        if j >= i:
            j += 1
        other = seqs[j]
        if other.length < window:
            raise TooShort(
                f"sequence {other.name or j} has {other.length} frames, "
                f"window needs {window}")
        start = int(rng.integers(other.length - window + 1))
        x1[b] = w1.frames.T
        x2[b] = w2.frames.T
        x3[b] = other.frames[start:start + window].T
        seq1[b], seq3[b] = i, j
        if labeled:
            if seqs[i].style_label is None or other.style_label is None:
                raise VariantMismatch(
                    "supervised training needs style labels on every sequence")
            lab12[b] = seqs[i].style_label
            lab3[b] = other.style_label
    return TripletBatch(x1=x1, x2=x2, x3=x3,
                        label12=lab12 if labeled else None,
                        label3=lab3 if labeled else None,
                        seq1=seq1, seq3=seq3)


def kl_gaussians(a: StyleDistribution, b: StyleDistribution) -> Tensor:
    """KL(a || b) for diagonal Gaussians, summed over dims, batch-averaged."""
    if a.mu.shape[-1] != b.mu.shape[-1]:
        raise DimMismatch(
            f"style dims differ: {a.mu.shape[-1]} vs {b.mu.shape[-1]}")
    return a.kl_to(b)


def _sample_content(model: Stylizer, z: Tensor,
                    rng: np.random.Generator) -> Tensor:
    if not model.prob_content:
        return model.encode_content(z)
    mu, logvar = model.encode_content_dist(z)
    eps = rng.standard_normal(mu.shape).astype(np.float32)
    return mu + ad.texp(logvar * 0.5) * eps


def compute_losses(batch: TripletBatch, model: Stylizer, codec: MotionCodec,
                   config: TrainConfig, rng: np.random.Generator
                   ) -> tuple[Tensor, LossReport]:
    """The combined objective on one triplet batch.

    Returns (total loss tensor for backward, detailed report). Terms ablated
    out of the gradient still appear in the report at their true values.
    Raises NonFiniteLoss if any term is non-finite.
    """
    w = config.resolved_weights()
    window = batch.x1.shape[-1]
    lab12, lab3 = batch.label12, batch.label3

    x = {1: Tensor(batch.x1), 2: Tensor(batch.x2), 3: Tensor(batch.x3)}
    z = {i: codec.encode_t(x[i])[0] for i in (1, 2, 3)}

    dist = {1: model.encode_style(z[1], lab12),
            2: model.encode_style(z[2], lab12),
            3: model.encode_style(z[3], lab3)}
    s = {i: dist[i].sample(rng) for i in (1, 2, 3)}
    c = {i: _sample_content(model, z[i], rng) for i in (1, 2, 3)}

    # reconstruction: each clip from its own content and style
    rec_terms = []
    for i, lab in ((1, lab12), (2, lab12)):
        z_hat = model.generate(c[i], s[i], lab)
        p_hat = codec.decode_t(z_hat, window)
        rec_terms.append(ad.tabs(z_hat - z[i]).mean()
                         + ad.tabs(p_hat - x[i]).mean())
    l_rec = rec_terms[0] + rec_terms[1]

    # homo-style alignment between the two same-sequence windows
    l_hsa = kl_gaussians(dist[1], dist[2])

    # swap + cycle, and the translated clip's style space
    kl_spaces = [dist[1], dist[2], dist[3]]
    if config.no_cycle:
        l_cyc = Tensor(np.zeros((), dtype=np.float32))
    else:
        z_t = model.generate(c[2], s[3], lab3)
        dist_t = model.encode_style(z_t, lab3)
        kl_spaces.append(dist_t)
        s_t = dist_t.sample(rng)
        c_t = _sample_content(model, z_t, rng)

        z_c2 = model.generate(c_t, s[2], lab12)
        p_c2 = codec.decode_t(z_c2, window)
        z_c3 = model.generate(c[3], s_t, lab3)
        p_c3 = codec.decode_t(z_c3, window)
        l_cyc = (ad.tabs(z_c2 - z[2]).mean() + ad.tabs(p_c2 - x[2]).mean()
                 + ad.tabs(z_c3 - z[3]).mean() + ad.tabs(p_c3 - x[3]).mean())

    l_kl = kl_spaces[0].kl_to_standard()
    for d in kl_spaces[1:]:
        l_kl = l_kl + d.kl_to_standard()

    # ablations: value stays in the report (and the total), gradient removed
    rec_term = Tensor(l_rec.data.copy()) if config.no_autoencoding else l_rec
    hsa_term = Tensor(l_hsa.data.copy()) if config.no_homo_style else l_hsa
    total = rec_term + w.hsa * hsa_term + w.cyc * l_cyc + w.kl * l_kl

    values = {"rec": float(l_rec.data), "hsa": float(l_hsa.data),
              "cyc": float(l_cyc.data), "kl": float(l_kl.data),
              "total": float(total.data)}
    report = LossReport(rec=values["rec"], hsa=values["hsa"],
                        cyc=values["cyc"], kl=values["kl"],
                        total=values["total"],
                        finite={k: bool(np.isfinite(v)) for k, v in values.items()},
                        kl_space_count=len(kl_spaces))
    if not report.all_finite():
        bad = [k for k, ok in report.finite.items() if not ok]
        raise NonFiniteLoss(f"non-finite loss terms: {bad}")
    return total, report


def train_stylizer(model: Stylizer, codec: MotionCodec | None,
                   seqs: list[PoseSequence], config: TrainConfig,
                   log=None) -> list[dict]:
    """Optimize the stylizer (and, with end_to_end, the codec) on triplets.

    `seqs` must be normalized sequences. Returns per-log-step history rows
    {step, rec, hsa, cyc, kl, total}. Raises MissingCodec / Diverged.
    """
    if codec is None:
        if not config.no_latent:
            raise MissingCodec(
                "stylizer training needs a codec (or the no_latent flag)")
        codec = MotionCodec(seqs[0].frames.shape[1], variant="none")
    if config.no_latent and codec.variant != "none":
        raise VariantMismatch(
            "no_latent requires the identity codec, got variant "
            f"{codec.variant!r}")
    if config.mode == "supervised" and not model.supervised:
        raise VariantMismatch("supervised training needs a label-conditioned model")
    if config.mode == "unsupervised" and model.supervised:
        raise VariantMismatch("unsupervised training needs an unlabeled model")
    if config.prob_content and not model.prob_content:
        raise VariantMismatch(
            "prob_content training needs a model built with prob_content=True")
    if config.no_prob_style and model.prob_style:
        raise VariantMismatch(
            "no_prob_style training needs a model built with prob_style=False")
    if config.window % codec.compression != 0:
        raise VariantMismatch(
            f"window {config.window} not divisible by the codec's "
            f"x{codec.compression} compression")

    if config.end_to_end:
        codec.set_trainable(True)
        params = model.parameters() + codec.parameters()
    else:
        codec.freeze()
        params = model.parameters()

    rng = np.random.default_rng(config.seed)
    opt = Adam(params, lr=config.lr, warmup_steps=config.warmup,
               grad_clip=config.grad_clip)
    labeled = config.mode == "supervised"
    history: list[dict] = []
    for step in range(config.steps):
        batch = sample_triplets(seqs, config.window, config.batch, rng,
                                labeled=labeled)
        try:
            total, report = compute_losses(batch, model, codec, config, rng)
        except NonFiniteLoss as exc:
            raise Diverged(f"stylizer training diverged at step {step}: {exc}") from exc
        opt.zero_grad()
        total.backward()
        opt.step()
        if step % config.log_every == 0 or step == config.steps - 1:
            row = {"step": step, "rec": report.rec, "hsa": report.hsa,
                   "cyc": report.cyc, "kl": report.kl, "total": report.total}
            history.append(row)
            if log is not None:
                log(f"stylizer step {step:5d}  total {report.total:.4f}  "
                    f"rec {report.rec:.4f}  hsa {report.hsa:.4f}  "
                    f"cyc {report.cyc:.4f}  kl {report.kl:.4f}")
    return history


def training_provenance(config: TrainConfig) -> dict:
    """JSON-safe record of how a stylizer was trained, stored in its checkpoint."""
    w = config.resolved_weights()
    return {"mode": config.mode, "steps": config.steps, "batch": config.batch,
            "window": config.window, "lr": config.lr, "seed": config.seed,
            "weights": {"hsa": w.hsa, "cyc": w.cyc, "kl": w.kl},
            "ablations": {k: getattr(config, k) for k in
                          ("no_latent", "no_prob_style", "no_homo_style",
                           "no_autoencoding", "no_cycle", "prob_content",
                           "end_to_end")}}
