"""Evaluation: oracle classifiers, distribution metrics, artifact metrics,
runtime benchmark, and the repeated-protocol harness.

The two classifiers (style-labeled and content-labeled) double as feature
extractors: their penultimate activations feed FID and the diversity metric,
so every number in a report is grounded in the same learned feature space.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bundle import ModelBundle
from .errors import (DegenerateFeatures, Diverged, LengthMismatch, TooFew,
                     VariantMismatch)
from .inference import stylize_label_based, stylize_motion_based, stylize_prior_based
from .kinematics import fk_positions
from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.layers import Conv1d, Linear, Module
from .nn.optim import Adam
from .pose import NormStats, PoseSequence, fit_norm_stats, znormalize
from .rotations import geodesic_angle, matrix_from_rot6d

PENULTIMATE_DIM = 256


class _ConvClassifier(Module):
    """3 strided temporal convs -> global pool -> 256-d features -> logits."""

    def __init__(self, in_dim: int, n_labels: int, hidden: int,
                 rng: np.random.Generator):
        self.conv1 = Conv1d(in_dim, hidden, 3, rng, stride=2)
        self.conv2 = Conv1d(hidden, hidden, 3, rng, stride=2)
        self.conv3 = Conv1d(hidden, hidden, 3, rng, stride=2)
        self.penult = Linear(hidden, PENULTIMATE_DIM, rng)
        self.head = Linear(PENULTIMATE_DIM, n_labels, rng)

    def features_t(self, x: Tensor) -> Tensor:
        h = ad.leaky_relu(self.conv1(x))
        h = ad.leaky_relu(self.conv2(h))
        h = ad.leaky_relu(self.conv3(h))
        pooled = h.mean(axis=2)
        return ad.leaky_relu(self.penult(pooled))

    def logits_t(self, x: Tensor) -> Tensor:
        return self.head(self.features_t(x))


@dataclass
class ClassifierBundle:
    """A trained label oracle plus the statistics to feed it raw clips."""
    target: str                      # "style" or "content"
    net: _ConvClassifier
    stats: NormStats
    n_labels: int
    heldout_accuracy: float = float("nan")

    def _batch(self, seqs: list[PoseSequence]) -> list[np.ndarray]:
        out = []
        for s in seqs:
            n = s if s.normalized else znormalize(s, self.stats)
            out.append(np.ascontiguousarray(n.frames.T[None], dtype=np.float32))
        return out

    def features(self, seqs: list[PoseSequence]) -> np.ndarray:
        """Penultimate activations, one row per clip."""
        rows = [self.net.features_t(Tensor(x)).data[0] for x in self._batch(seqs)]
        return np.stack(rows, axis=0)

    def predict(self, seqs: list[PoseSequence]) -> np.ndarray:
        rows = [self.net.logits_t(Tensor(x)).data[0] for x in self._batch(seqs)]
        return np.stack(rows, axis=0).argmax(axis=1)


def _label_of(seq: PoseSequence, target: str) -> int:
    lab = seq.style_label if target == "style" else seq.content_label
    if lab is None:
        raise VariantMismatch(
            f"sequence {seq.name or '?'} has no {target} label")
    return int(lab)


def train_classifier(train_seqs: list[PoseSequence], target: str, *,
                     heldout: list[PoseSequence] | None = None,
                     hidden: int = 64, steps: int = 600, batch: int = 32,
                     window: int = 48, lr: float = 2e-3, warmup: int = 30,
                     seed: int = 0, log=None) -> ClassifierBundle:
    """Fit a label oracle on raw clips; reports held-out clip accuracy."""
    if target not in ("style", "content"):
        raise VariantMismatch(f"classifier target must be style|content, got {target!r}")
    rng = np.random.default_rng(seed)
    labels = np.array([_label_of(s, target) for s in train_seqs])
    n_labels = int(labels.max()) + 1
    stats = fit_norm_stats(train_seqs)
    normed = [znormalize(s, stats) for s in train_seqs]
    feature_dim = normed[0].frames.shape[1]

    net = _ConvClassifier(feature_dim, n_labels, hidden, rng)
    opt = Adam(net.parameters(), lr=lr, warmup_steps=warmup)
    for step in range(steps):
        idx = rng.integers(len(normed), size=batch)
        x = np.empty((batch, feature_dim, window), dtype=np.float32)
        for row, i in enumerate(idx):
            seq = normed[i]
            start = int(rng.integers(seq.length - window + 1))
            x[row] = seq.frames[start:start + window].T
        logits = net.logits_t(Tensor(x))
        loss = ad.softmax_cross_entropy(logits, labels[idx])
        val = float(loss.data)
        if not np.isfinite(val):
            raise Diverged(f"classifier loss became non-finite at step {step}")
        opt.zero_grad()
        loss.backward()
        opt.step()
        if log is not None and (step % 100 == 0 or step == steps - 1):
            log(f"{target} classifier step {step:4d}  ce {val:.4f}")

    bundle = ClassifierBundle(target=target, net=net, stats=stats,
                              n_labels=n_labels)
    if heldout:
        truth = np.array([_label_of(s, target) for s in heldout])
        bundle.heldout_accuracy = float((bundle.predict(heldout) == truth).mean())
    return bundle


def accuracy(outputs: list[PoseSequence], target_labels,
             clf: ClassifierBundle) -> float:
    """Fraction of clips the oracle assigns to the intended label."""
    truth = np.asarray(target_labels, dtype=np.int64)
    if truth.shape[0] != len(outputs):
        raise LengthMismatch(
            f"{len(outputs)} outputs but {truth.shape[0]} target labels")
    return float((clf.predict(outputs) == truth).mean())


# ---------------------------------------------------------------------------
# distribution / geometry metrics


def _sqrtm_psd(m: np.ndarray, clamp: float = 1e-10) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition."""
    vals, vecs = np.linalg.eigh((m + m.T) * 0.5)
    vals = np.where(vals < clamp, 0.0, vals)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid(features_a: np.ndarray, features_b: np.ndarray) -> float:
    """Fréchet distance between Gaussian fits of two feature populations."""
    a = np.asarray(features_a, dtype=np.float64)
    b = np.asarray(features_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] == 0 or b.shape[1] == 0:
        raise DegenerateFeatures("feature matrices must be (n, d) with d > 0")
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise DegenerateFeatures("need at least 2 samples per population")
    if a.shape[1] != b.shape[1]:
        raise DegenerateFeatures(
            f"feature dims differ: {a.shape[1]} vs {b.shape[1]}")
    mu_a, mu_b = a.mean(axis=0), b.mean(axis=0)
    cov_a = np.cov(a, rowvar=False, ddof=1).reshape(a.shape[1], a.shape[1])
    cov_b = np.cov(b, rowvar=False, ddof=1).reshape(b.shape[1], b.shape[1])
    # tr sqrt(cov_a cov_b) computed on the symmetrized similar matrix
    root_a = _sqrtm_psd(cov_a)
    inner = _sqrtm_psd(root_a @ cov_b @ root_a)
    diff = mu_a - mu_b
    val = float(diff @ diff + np.trace(cov_a) + np.trace(cov_b)
                - 2.0 * np.trace(inner))
    return max(val, 0.0)


def geodesic_distance(a: PoseSequence, b: PoseSequence) -> float:
    """Mean joint-rotation angle (radians) between two equal-length clips."""
    if a.length != b.length:
        raise LengthMismatch(f"clip lengths differ: {a.length} vs {b.length}")
    if a.skeleton.joint_count != b.skeleton.joint_count:
        raise LengthMismatch("clips use different skeletons")
    lay = a.layout
    j = a.skeleton.joint_count
    ra = matrix_from_rot6d(a.frames[:, lay.rotations].reshape(a.length, j, 6).astype(np.float64))
    rb = matrix_from_rot6d(b.frames[:, lay.rotations].reshape(b.length, j, 6).astype(np.float64))
    return float(geodesic_angle(ra, rb).mean())


def diversity(outputs: list[PoseSequence], clf: ClassifierBundle) -> float:
    """Mean pairwise feature distance across k outputs of one content."""
    if len(outputs) < 2:
        raise TooFew(f"diversity needs >= 2 outputs, got {len(outputs)}")
    feats = clf.features(outputs)
    total, count = 0.0, 0
    for i in range(len(outputs)):
        for k in range(i + 1, len(outputs)):
            total += float(np.linalg.norm(feats[i] - feats[k]))
            count += 1
    return total / count


def foot_skating(seq: PoseSequence) -> float:
    """Mean planar foot speed (m/s) during frames flagged as ground contact."""
    world = fk_positions(seq)
    feet = world[:, seq.skeleton.foot_joints]          # (T, F, 3)
    contacts = seq.frames[:, seq.layout.contacts] > 0.5
    if feet.shape[0] < 2:
        return 0.0
    vel = feet[1:] - feet[:-1]                          # m/frame
    speed = np.sqrt(vel[:, :, 0] ** 2 + vel[:, :, 2] ** 2) * seq.fps
    mask = contacts[:-1]                                # diff t -> t+1
    if not mask.any():
        return 0.0
    return float(speed[mask].mean())


# ---------------------------------------------------------------------------
# runtime benchmark


def _constant_clip(bundle: ModelBundle, t: int, seed: int = 0) -> PoseSequence:
    """Plausible raw clip near the corpus mean, for timing only."""
    rng = np.random.default_rng(seed)
    noise = 0.05 * rng.standard_normal((t, bundle.stats.mean.shape[0]))
    frames = (bundle.stats.mean + noise * bundle.stats.std).astype(np.float32)
    return PoseSequence(frames=frames, fps=30.0, skeleton=bundle.skeleton)


def benchmark_forward(bundle: ModelBundle, t: int = 160, repeats: int = 20,
                      warmup: int = 3, seed: int = 0) -> dict:
    """Median/IQR wall time (ms) of one full stylization forward pass."""
    content = _constant_clip(bundle, t, seed)
    style = _constant_clip(bundle, t, seed + 1)
    label = 0 if bundle.supervised else None

    def run():
        stylize_motion_based(content, style, bundle, label=label)

    for _ in range(max(warmup, 0)):
        run()
    samples = []
    for _ in range(max(repeats, 1)):
        t0 = time.perf_counter()
        run()
        samples.append((time.perf_counter() - t0) * 1e3)
    arr = np.asarray(samples)
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    return {"median_ms": float(med), "iqr_ms": float(q3 - q1),
            "samples_ms": samples, "frames": t}


# ---------------------------------------------------------------------------
# repeated evaluation protocol


@dataclass
class MetricReport:
    """Per-metric mean and 95% confidence interval over protocol repeats."""
    repeats: int
    mean: dict = field(default_factory=dict)
    ci95: dict = field(default_factory=dict)      # metric -> half-width or None
    per_repeat: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"repeats": self.repeats, "mean": self.mean, "ci95": self.ci95,
                "per_repeat": self.per_repeat}


METRIC_NAMES = ("style_acc", "content_acc", "style_fid", "content_fid",
                "geo_dis", "diversity", "foot_skating")


def evaluate_protocol(bundle: ModelBundle, test_seqs: list[PoseSequence],
                      style_clf: ClassifierBundle,
                      content_clf: ClassifierBundle, *,
                      style_seqs: list[PoseSequence] | None = None,
                      repeats: int = 30, seed: int = 0,
                      diversity_samples: int = 6, use_gmp: bool = True,
                      log=None) -> MetricReport:
    """Random-assignment stylization metrics, repeated with fresh seeds.

    Each repeat draws, for every test clip, a style source of a *different*
    style label (from `style_seqs` when given, else from the test set), runs
    motion-based stylization, and scores the batch. The report carries mean
    and 95% CI (1.96 sigma / sqrt(n); None when repeats == 1).
    """
    if len(test_seqs) < 2:
        raise TooFew("protocol needs at least 2 test sequences")
    sources = style_seqs if style_seqs else test_seqs
    rng = np.random.default_rng(seed)
    styles = np.array([_label_of(s, "style") for s in test_seqs])
    contents = np.array([_label_of(s, "content") for s in test_seqs])
    source_styles = np.array([_label_of(s, "style") for s in sources])
    real_style_feats = style_clf.features(test_seqs)
    real_content_feats = content_clf.features(test_seqs)

    rows: dict[str, list[float]] = {name: [] for name in METRIC_NAMES}
    for rep in range(repeats):
        outputs, targets = [], []
        for i, content in enumerate(test_seqs):
            candidates = np.flatnonzero(source_styles != styles[i])
            if candidates.size == 0:
                raise TooFew(
                    "style corpus has no clip of a different style than "
                    f"label {int(styles[i])}")
            j = int(candidates[rng.integers(len(candidates))])
            label = int(source_styles[j]) if bundle.supervised else None
            out = stylize_motion_based(content, sources[j], bundle,
                                       label=label, use_gmp=use_gmp)
            out.content_label = int(contents[i])
            outputs.append(out)
            targets.append(int(source_styles[j]))

        out_style_feats = style_clf.features(outputs)
        out_content_feats = content_clf.features(outputs)
        rows["style_acc"].append(accuracy(outputs, targets, style_clf))
        rows["content_acc"].append(accuracy(outputs, contents, content_clf))
        rows["style_fid"].append(fid(out_style_feats, real_style_feats))
        rows["content_fid"].append(fid(out_content_feats, real_content_feats))
        rows["geo_dis"].append(float(np.mean(
            [geodesic_distance(test_seqs[i], outputs[i])
             for i in range(len(outputs))])))

        # stochastic-mode diversity on one random content clip
        i = int(rng.integers(len(test_seqs)))
        div_outputs = []
        for k in range(diversity_samples):
            s = int(rng.integers(2 ** 31))
            if bundle.supervised:
                lab = int(rng.integers(style_clf.n_labels))
                div_outputs.append(stylize_label_based(
                    test_seqs[i], lab, bundle, seed=s, use_gmp=use_gmp))
            else:
                div_outputs.append(stylize_prior_based(
                    test_seqs[i], bundle, seed=s, use_gmp=use_gmp))
        rows["diversity"].append(diversity(div_outputs, style_clf))
        rows["foot_skating"].append(float(np.mean(
            [foot_skating(o) for o in outputs])))
        if log is not None:
            log(f"protocol repeat {rep + 1}/{repeats}  "
                f"style_acc {rows['style_acc'][-1]:.3f}  "
                f"content_acc {rows['content_acc'][-1]:.3f}")

    report = MetricReport(repeats=repeats)
    for name, vals in rows.items():
        arr = np.asarray(vals, dtype=np.float64)
        report.mean[name] = float(arr.mean())
        report.ci95[name] = (float(1.96 * arr.std(ddof=1) / np.sqrt(len(arr)))
                             if len(arr) > 1 else None)
        report.per_repeat[name] = [float(v) for v in vals]
    return report
