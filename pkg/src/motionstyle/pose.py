"""Pose-sequence container, feature layout, and motion-domain operations.

Each frame is a flat feature vector. For a skeleton with J joints and F foot
joints the layout is (260 dims for the bundled 21-joint skeleton, F=4)::

    [0]               root yaw angular velocity, radians/frame
    [1:3]             root planar velocity (x, z) in the root's local yaw
                      frame, meters/frame
    [3]               root height (absolute), meters
    [4 : 4+3J]        local joint positions, (J, 3) row-major, meters.
                      Local = world position minus the root's planar
                      position, rotated into the root's yaw frame; heights
                      stay absolute, so the root's own entry is (0, h, 0).
    [4+3J : 4+6J]     local joint velocities: forward differences of the
                      local positions (last frame copies the previous one)
    [4+6J : 4+12J]    joint rotations, 6D per joint (first two matrix
                      columns, column-major), local to the parent; the
                      root's rotation excludes integrated yaw
    [4+12J : 4+12J+F] binary foot-contact flags, one per foot joint

Root trajectories are recovered by integration: with yaw(0) = 0 and
planar(0) = (0, 0),

    yaw(t)    = yaw(t-1)    + frames[t-1, 0]
    planar(t) = planar(t-1) + R_y(yaw(t-1)) @ frames[t-1, 1:3]

Velocity channels use forward differences (frames[t] holds the step from t
to t+1) with the final frame copying its predecessor.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import (
    MissingMirrorMap,
    NotNormalized,
    OutOfRange,
    ShapeMismatch,
    TooFew,
    TooShort,
    UpsamplingUnsupported,
)
from .rotations import mirror_rot6d
from .skeleton import Skeleton

# Per-frame foot displacement below this counts as ground contact; stated at
# 30 FPS and rescaled so the equivalent world-space speed is rate-independent.
CONTACT_SPEED_THRESHOLD = 0.002  # meters/frame at 30 FPS


@dataclass(frozen=True)
class FeatureLayout:
    """Channel slices of the flat feature vector for a J-joint skeleton."""

    joint_count: int
    foot_count: int

    @property
    def yaw_vel(self) -> int:
        return 0

    @property
    def planar_vel(self) -> slice:
        return slice(1, 3)

    @property
    def height(self) -> int:
        return 3

    @property
    def root(self) -> slice:
        return slice(0, 4)

    @property
    def positions(self) -> slice:
        return slice(4, 4 + 3 * self.joint_count)

    @property
    def velocities(self) -> slice:
        return slice(4 + 3 * self.joint_count, 4 + 6 * self.joint_count)

    @property
    def rotations(self) -> slice:
        return slice(4 + 6 * self.joint_count, 4 + 12 * self.joint_count)

    @property
    def contacts(self) -> slice:
        return slice(4 + 12 * self.joint_count,
                     4 + 12 * self.joint_count + self.foot_count)

    @property
    def dim(self) -> int:
        return 4 + 12 * self.joint_count + self.foot_count


@dataclass
class PoseSequence:
    frames: np.ndarray                  # (T, D) float32
    fps: float
    skeleton: Skeleton
    normalized: bool = False
    style_label: Optional[int] = None
    content_label: Optional[int] = None
    name: str = ""

    def __post_init__(self):
        self.frames = np.ascontiguousarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 2:
            raise ShapeMismatch(f"frames must be (T, D), got {self.frames.shape}")
        expected = self.skeleton.feature_dim
        if self.frames.shape[1] != expected:
            raise ShapeMismatch(
                f"feature dim {self.frames.shape[1]} != {expected} "
                f"for skeleton {self.skeleton.name!r}")

    @property
    def length(self) -> int:
        return int(self.frames.shape[0])

    @property
    def layout(self) -> FeatureLayout:
        return FeatureLayout(self.skeleton.joint_count,
                             len(self.skeleton.foot_joints))


@dataclass
class NormStats:
    """Per-channel z-normalization statistics."""

    mean: np.ndarray                    # (D,) float32
    std: np.ndarray                     # (D,) float32, floored

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float32)
        self.std = np.asarray(self.std, dtype=np.float32)
        if self.mean.shape != self.std.shape or self.mean.ndim != 1:
            raise ShapeMismatch("mean/std must be matching 1-D arrays")


STD_FLOOR = 1e-5


def fit_norm_stats(seqs: list[PoseSequence]) -> NormStats:
    """Per-channel mean/std over all frames of all sequences (raw units)."""
    if not seqs:
        raise TooFew("no sequences to fit normalization statistics on")
    if any(s.normalized for s in seqs):
        raise NotNormalized("fit_norm_stats expects raw (unnormalized) input")
    stacked = np.concatenate([s.frames for s in seqs], axis=0)
    if stacked.shape[0] < 2:
        raise TooFew("need at least 2 frames to fit normalization statistics")
    mean = stacked.mean(axis=0)
    std = np.maximum(stacked.std(axis=0), STD_FLOOR)
    return NormStats(mean=mean, std=std)


def znormalize(seq: PoseSequence, stats: NormStats) -> PoseSequence:
    if seq.normalized:
        raise ValueError("sequence is already normalized")
    if stats.mean.shape[0] != seq.frames.shape[1]:
        raise ShapeMismatch("normalization stats dim != feature dim")
    frames = (seq.frames - stats.mean) / stats.std
    return replace(seq, frames=frames, normalized=True)


def denormalize(seq: PoseSequence, stats: NormStats) -> PoseSequence:
    if not seq.normalized:
        raise NotNormalized("sequence is not normalized")
    if stats.mean.shape[0] != seq.frames.shape[1]:
        raise ShapeMismatch("normalization stats dim != feature dim")
    frames = seq.frames * stats.std + stats.mean
    return replace(seq, frames=frames, normalized=False)


# ---------------------------------------------------------------------------
# windows


def window(seq: PoseSequence, start: int, length: int) -> PoseSequence:
    """Contiguous sub-clip [start, start+length)."""
    if length < 1:
        raise OutOfRange(f"window length must be >= 1, got {length}")
    if seq.length < length:
        raise TooShort(f"sequence has {seq.length} frames, window needs {length}")
    if start < 0 or start + length > seq.length:
        raise OutOfRange(
            f"window [{start}, {start + length}) outside sequence of "
            f"length {seq.length}")
    return replace(seq, frames=seq.frames[start:start + length].copy())


def homo_pair(seq: PoseSequence, length: int, rng: np.random.Generator,
              return_starts: bool = False):
    """Two windows drawn independently and uniformly from one sequence.

    Both windows share the sequence's style by construction (same performer,
    same clip); they may overlap. Raises TooShort when the sequence is
    shorter than the window.
    """
    if seq.length < length:
        raise TooShort(
            f"sequence has {seq.length} frames, homo-pair needs >= {length}")
    hi = seq.length - length + 1
    s1 = int(rng.integers(0, hi))
    s2 = int(rng.integers(0, hi))
    w1, w2 = window(seq, s1, length), window(seq, s2, length)
    if return_starts:
        return (w1, s1), (w2, s2)
    return w1, w2


# ---------------------------------------------------------------------------
# mirroring


def mirror(seq: PoseSequence) -> PoseSequence:
    """Reflect the motion across the character's YZ plane (swap left/right).

    Pure sign flips and channel swaps -- applying it twice is a bit-exact
    identity. Operates on raw features; raises MissingMirrorMap if the
    skeleton declares no left/right pairs.
    """
    if seq.normalized:
        raise NotNormalized("mirror operates on raw (unnormalized) features")
    sk = seq.skeleton
    midx = sk.mirror_index()            # raises MissingMirrorMap
    lay = seq.layout
    f = seq.frames.copy()
    j = sk.joint_count

    f[:, lay.yaw_vel] = -f[:, lay.yaw_vel]
    f[:, 1] = -f[:, 1]                  # lateral (x) root velocity

    pos = f[:, lay.positions].reshape(-1, j, 3)[:, midx, :]
    pos[:, :, 0] = -pos[:, :, 0]
    f[:, lay.positions] = pos.reshape(-1, 3 * j)

    vel = f[:, lay.velocities].reshape(-1, j, 3)[:, midx, :]
    vel[:, :, 0] = -vel[:, :, 0]
    f[:, lay.velocities] = vel.reshape(-1, 3 * j)

    rot = f[:, lay.rotations].reshape(-1, j, 6)[:, midx, :]
    f[:, lay.rotations] = mirror_rot6d(rot).reshape(-1, 6 * j)

    foot_perm = _foot_mirror_permutation(sk)
    f[:, lay.contacts] = f[:, lay.contacts][:, foot_perm]

    return replace(seq, frames=f)


def _foot_mirror_permutation(sk: Skeleton) -> np.ndarray:
    midx = sk.mirror_index()
    perm = []
    for fj in sk.foot_joints:
        partner = int(midx[fj])
        if partner not in sk.foot_joints:
            raise MissingMirrorMap(
                f"foot joint {fj} has no mirrored foot joint")
        perm.append(sk.foot_joints.index(partner))
    return np.asarray(perm)


# ---------------------------------------------------------------------------
# frame-rate resampling


def resample_fps(seq: PoseSequence, new_fps: float) -> PoseSequence:
    """Integer-factor downsampling (e.g. 30 -> 15 fps).

    Velocity channels are re-accumulated across each dropped chunk so they
    stay meters-per-(new)frame; planar root velocity is re-expressed in the
    kept frame's yaw frame. Anything other than integer-factor downsampling
    raises UpsamplingUnsupported.
    """
    if seq.normalized:
        raise NotNormalized("resample_fps operates on raw features")
    if new_fps <= 0:
        raise OutOfRange(f"target fps must be positive, got {new_fps}")
    ratio = seq.fps / new_fps
    k = int(round(ratio))
    if k < 1 or abs(ratio - k) > 1e-9:
        raise UpsamplingUnsupported(
            f"resample {seq.fps} -> {new_fps} fps is not integer-factor "
            "downsampling")
    if k == 1:
        return replace(seq, frames=seq.frames.copy())

    lay = seq.layout
    f = seq.frames.astype(np.float64)
    t_old = f.shape[0]
    kept = np.arange(0, t_old, k)
    t_new = kept.shape[0]
    out = f[kept].copy()

    # root yaw velocity: total yaw change until the next kept frame
    yaw_vel = f[:, lay.yaw_vel]
    # root planar velocity: world displacement over the chunk, rotated into
    # the kept frame's yaw frame (yaw measured relative to the kept frame)
    for i, s in enumerate(kept):
        e = min(s + k, t_old)
        if i == t_new - 1 and e - s < k and t_new > 1:
            # tail shorter than a full chunk: copy the previous kept step
            out[i, lay.yaw_vel] = out[i - 1, lay.yaw_vel]
            out[i, lay.planar_vel] = out[i - 1, lay.planar_vel]
            continue
        out[i, lay.yaw_vel] = yaw_vel[s:e].sum()
        rel_yaw = 0.0
        disp = np.zeros(2)
        for m in range(s, e):
            c, sn = np.cos(rel_yaw), np.sin(rel_yaw)
            vx, vz = f[m, 1], f[m, 2]
            # R_y(rel_yaw) applied to (vx, 0, vz), planar components
            disp[0] += c * vx + sn * vz
            disp[1] += -sn * vx + c * vz
            rel_yaw += yaw_vel[m]
        out[i, lay.planar_vel] = disp

    # joint velocities: forward differences of the kept local positions
    pos = out[:, lay.positions]
    vel = np.empty_like(pos)
    if t_new > 1:
        vel[:-1] = pos[1:] - pos[:-1]
        vel[-1] = vel[-2]
    else:
        vel[:] = 0.0
    out[:, lay.velocities] = vel

    return replace(seq, frames=out.astype(np.float32), fps=float(new_fps))


# ---------------------------------------------------------------------------
# foot contacts


def detect_foot_contacts(positions: np.ndarray, skeleton: Skeleton,
                         fps: float = 30.0,
                         threshold: float | None = None) -> np.ndarray:
    """Binary contact flags from world joint positions.

    positions: (T, J, 3) world positions. A foot joint is in contact when its
    squared per-frame displacement is strictly below threshold² with
    threshold = 0.002 * (30 / fps) meters (override via `threshold`); the
    final frame copies the previous one. Returns (T, F) float32 in {0, 1}.
    """
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim != 3 or positions.shape[2] != 3:
        raise ShapeMismatch(f"positions must be (T, J, 3), got {positions.shape}")
    t = positions.shape[0]
    if t < 2:
        raise TooShort("need at least 2 frames to detect contacts")
    if threshold is None:
        threshold = CONTACT_SPEED_THRESHOLD * (30.0 / fps)
    feet = positions[:, skeleton.foot_joints, :]      # (T, F, 3)
    diff = feet[1:] - feet[:-1]
    sq_disp = (diff * diff).sum(axis=-1)
    flags = np.empty((t, len(skeleton.foot_joints)), dtype=np.float32)
    flags[:-1] = (sq_disp < threshold * threshold).astype(np.float32)
    flags[-1] = flags[-2]
    return flags
