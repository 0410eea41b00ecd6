"""Procedural stylized-gait corpus.

Clips are generated by forward kinematics from analytic joint-angle
schedules — no physics — but are constructed so the usual motion invariants
hold:

* Each leg cycle has a *plant phase* during which the foot is stationary in
  world space by construction: the hip-to-ankle chord sweeps with
  sin(theta) linear in time (the hip advances at the forward speed over a
  fixed pivot), the knee keeps a constant flex, the ankle counters the whole
  chain so the foot stays level, and the root height follows the compass
  arc of the planted leg. Contact detection therefore finds real,
  alternating stance phases at every amplitude.
* Every oscillation amplitude (including noise) scales linearly with the
  style's ``amplitude`` parameter, so two styles differing only in amplitude
  produce joint rotations whose geodesic magnitudes scale by (almost
  exactly) the same factor.
* Root channels are generated as local velocities and integrated exactly the
  way :func:`motionstyle.kinematics.integrate_root` does, so the stored
  position channels match FK world positions to float precision.

The grid is styles x contents; each (style, content) cell gets independently
jittered clips (phase, speed, cadence, smooth angle noise).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfRange
from .motionio import Corpus
from .pose import PoseSequence, detect_foot_contacts
from .rotations import rot6d_from_matrix, rotmat_x, rotmat_y, rotmat_z
from .skeleton import Skeleton, default_skeleton

THIGH = 0.40
SHIN = 0.40
ANKLE_REST_HEIGHT = 0.072   # ankle joint height when the foot is planted
GROUND_CLEARANCE = 0.002


@dataclass(frozen=True)
class StyleParams:
    name: str
    amplitude: float = 1.0       # global scale on every oscillation amplitude
    cadence: float = 1.0         # multiplies stride frequency (and speed)
    lean: float = 0.0            # constant forward torso pitch, radians
    arm_swing: float = 1.0       # scale on arm oscillation
    sway: float = 1.0            # scale on lateral pelvis sway / roll
    crouch: float = 0.0          # extra constant stance knee flex, radians
    posture: dict = field(default_factory=dict)  # joint -> (rx, ry, rz) offset


@dataclass(frozen=True)
class ContentParams:
    name: str
    freq: float                  # stride frequency, Hz (one full L+R cycle)
    speed: float                 # forward speed, m/s (before style scaling)
    plant: float                 # planted fraction of the cycle per leg
    knee_factor: float = 1.0     # swing knee flexion scale
    arm_factor: float = 1.0
    march_lift: float = 0.0      # extra swing hip lift every stride, rad
    kick_amp: float = 0.0        # extra left-leg hip bump on alternating strides


STYLES: dict[str, StyleParams] = {
    "neutral": StyleParams("neutral"),
    "exaggerated": StyleParams(
        "exaggerated", amplitude=1.45, cadence=1.0, arm_swing=1.5, sway=1.3),
    "stooped": StyleParams(
        "stooped", amplitude=0.85, cadence=0.9, lean=0.35, arm_swing=0.6,
        sway=0.8, crouch=0.25, posture={"neck": (0.22, 0.0, 0.0),
                                        "left_shoulder": (0.0, 0.0, -0.12),
                                        "right_shoulder": (0.0, 0.0, 0.12)}),
    "brisk": StyleParams(
        "brisk", amplitude=1.1, cadence=1.35, lean=-0.08, arm_swing=1.25,
        sway=0.9),
}

CONTENTS: dict[str, ContentParams] = {
    "walk": ContentParams("walk", freq=0.85, speed=1.0, plant=0.50,
                          knee_factor=1.0),
    "run": ContentParams("run", freq=1.30, speed=2.0, plant=0.38,
                         knee_factor=1.6, arm_factor=1.2),
    "march": ContentParams("march", freq=0.95, speed=0.9, plant=0.45,
                           knee_factor=2.1, march_lift=0.45),
    "kick_step": ContentParams("kick_step", freq=0.60, speed=0.7, plant=0.55,
                               knee_factor=1.2, kick_amp=0.85),
}


def _smooth_noise(rng: np.random.Generator, t_grid: np.ndarray,
                  scale: float, harmonics: int = 2) -> np.ndarray:
    """Sum of low-frequency sinusoids; amplitude proportional to `scale`."""
    out = np.zeros_like(t_grid)
    for _ in range(harmonics):
        amp = scale * rng.uniform(0.4, 1.0)
        freq = rng.uniform(0.15, 0.7)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        out += amp * np.sin(2.0 * np.pi * freq * t_grid + phase)
    return out


def _leg_schedule(phi: np.ndarray, content: ContentParams, amp: float,
                  sin_ap: float, k_plant: float, root_pitch: float,
                  kick_leg: bool):
    """Leg pitch angles plus plant bookkeeping along phase `phi`.

    Plant phase: the hip->ankle chord angle theta satisfies
    sin(theta) = sin_ap * (2s - 1) (hip advances uniformly over the pivot),
    knee holds `k_plant`, the hip pitch is the chord angle minus half the
    knee flex, and the ankle counters the whole chain (level foot).

    Returns (hip, knee, ankle, toe, chord_cos) where chord_cos is NaN
    outside the plant phase.
    """
    u = (phi / (2.0 * np.pi)) % 1.0
    p = content.plant
    planted = u < p
    s_pl = np.clip(u / p, 0.0, 1.0)
    s_sw = np.clip((u - p) / (1.0 - p), 0.0, 1.0)
    bump = np.sin(np.pi * s_sw)
    a_p = np.arcsin(sin_ap)

    # positive pitch moves the foot backward: the chord sweeps -A -> +A
    # while planted (foot ahead, body passes over), and returns in swing.
    # The chord is a world-space angle, so the hip undoes the root pitch.
    chord = np.where(planted, np.arcsin(sin_ap * (2.0 * s_pl - 1.0)),
                     a_p * np.cos(np.pi * s_sw))
    hip = chord - 0.5 * k_plant - root_pitch
    if content.march_lift:
        hip = hip - np.where(planted, 0.0, content.march_lift * amp * bump)
    gate = 0.0
    if kick_leg and content.kick_amp:
        stride_index = np.floor(phi / (2.0 * np.pi)).astype(np.int64)
        gate = (stride_index % 2 == 0).astype(np.float64)
        hip = hip - np.where(planted, 0.0, content.kick_amp * amp * bump * gate)

    knee_bump = 0.55 * amp * content.knee_factor * bump
    if kick_leg and content.kick_amp:
        knee_bump = knee_bump * (1.0 - 0.7 * gate)
    knee = k_plant + np.where(planted, 0.0, knee_bump)

    # level foot while planted; hangs progressively looser mid-swing
    ankle = -(hip + knee + root_pitch) * (1.0 - 0.45 * np.where(planted, 0.0, bump))
    toe = 0.15 * (knee - k_plant)

    chord_cos = np.where(planted, np.cos(chord), np.nan)
    return hip, knee, ankle, toe, chord_cos


def _bridge_gaps(support: np.ndarray, dip: float) -> np.ndarray:
    """Fill NaN runs with a smooth arc dipping below the endpoints."""
    out = support.copy()
    isnan = np.isnan(out)
    if not isnan.any():
        return out
    if isnan.all():
        raise ValueError("no planted frames at all")
    valid_idx = np.flatnonzero(~isnan)
    # leading / trailing runs: hold the nearest valid value
    out[:valid_idx[0]] = out[valid_idx[0]]
    out[valid_idx[-1] + 1:] = out[valid_idx[-1]]
    isnan = np.isnan(out)
    i = 0
    n = out.shape[0]
    while i < n:
        if not isnan[i]:
            i += 1
            continue
        j = i
        while j < n and isnan[j]:
            j += 1
        v0, v1 = out[i - 1], out[j]
        tau = np.arange(1, j - i + 1) / (j - i + 1)
        blend = 0.5 * (1.0 - np.cos(np.pi * tau))
        out[i:j] = v0 + (v1 - v0) * blend - dip * np.sin(np.pi * tau)
        i = j
    return out


def generate_clip(style: StyleParams, content: ContentParams,
                  rng: np.random.Generator,
                  skeleton: Skeleton | None = None,
                  n_frames: int = 160, fps: float = 30.0):
    """One jittered clip. Returns (PoseSequence, world positions (T, J, 3))."""
    sk = skeleton if skeleton is not None else default_skeleton()
    j = sk.joint_count
    t = n_frames
    names = {n: i for i, n in enumerate(sk.joint_names)}

    amp = style.amplitude
    freq = content.freq * style.cadence * (1.0 + 0.05 * rng.uniform(-1, 1))
    speed = content.speed * amp * style.cadence * (1.0 + 0.06 * rng.uniform(-1, 1))

    k_plant = 0.2 * amp + style.crouch        # constant stance knee flex
    leg_eff = (THIGH + SHIN) * np.cos(0.5 * k_plant)
    # the chord covers speed*plant/freq meters while the foot pivots under it
    sin_ap = min(0.93, speed * content.plant / (2.0 * leg_eff * freq))

    t_grid = np.arange(t) / fps
    t_grid1 = np.arange(t + 1) / fps            # one extra sample for diffs
    phi0 = rng.uniform(0.0, 2.0 * np.pi)
    phi_l = 2.0 * np.pi * freq * t_grid + phi0
    phi_r = phi_l + np.pi

    # ---- root planar channels (local velocities, integrated like FK) ----
    sway_amp = 0.002 * amp * style.sway * (1.0 + 0.1 * rng.uniform(-1, 1))
    sway1 = sway_amp * np.sin(2.0 * np.pi * freq * t_grid1 + phi0)
    turn_rate = 0.025 * rng.uniform(-1, 1)                      # rad/s
    weave = 0.02 * amp * np.sin(
        2.0 * np.pi * 0.3 * freq * t_grid1 + rng.uniform(0, 2 * np.pi))
    yaw1 = turn_rate * t_grid1 + weave

    vx = np.diff(sway1)                          # lateral, m/frame
    vz = np.full(t, speed / fps)                 # forward, m/frame
    yaw_vel = np.diff(yaw1)

    yaw = np.concatenate([[0.0], np.cumsum(yaw_vel[:-1])])
    planar = np.zeros((t, 2))
    if t > 1:
        c, s = np.cos(yaw[:-1]), np.sin(yaw[:-1])
        steps = np.stack([c * vx[:-1] + s * vz[:-1],
                          -s * vx[:-1] + c * vz[:-1]], axis=-1)
        planar[1:] = np.cumsum(steps, axis=0)

    # ---- legs ---------------------------------------------------------------
    root_pitch = 0.20 * style.lean
    hip_l, knee_l, ankle_l, toe_l, cos_l = _leg_schedule(
        phi_l, content, amp, sin_ap, k_plant, root_pitch, kick_leg=True)
    hip_r, knee_r, ankle_r, toe_r, cos_r = _leg_schedule(
        phi_r, content, amp, sin_ap, k_plant, root_pitch, kick_leg=False)

    # ---- root height: compass arc over whichever leg is planted ----------
    support = np.fmax(cos_l, cos_r) * leg_eff          # NaN only in flight
    dip = 0.25 * leg_eff * (1.0 - np.cos(np.arcsin(sin_ap)))
    support = _bridge_gaps(support, dip)
    height = (ANKLE_REST_HEIGHT + 0.05 + support
              + _smooth_noise(rng, t_grid, 0.0012 * amp))

    # ---- joint rotations --------------------------------------------------
    rx = np.zeros((t, j))
    ry = np.zeros((t, j))
    rz = np.zeros((t, j))

    def noisy(scale):
        return _smooth_noise(rng, t_grid, 0.02 * amp * scale)

    rx[:, names["left_up_leg"]] = hip_l + noisy(0.08)
    rx[:, names["left_leg"]] = knee_l + noisy(0.06)
    rx[:, names["left_foot"]] = ankle_l
    rx[:, names["left_toe"]] = toe_l
    rx[:, names["right_up_leg"]] = hip_r + noisy(0.08)
    rx[:, names["right_leg"]] = knee_r + noisy(0.06)
    rx[:, names["right_foot"]] = ankle_r
    rx[:, names["right_toe"]] = toe_r

    # torso: distribute the style lean, add stride-synced sway/twist; the
    # legs counter the pelvis roll so planted feet keep their ground point
    pelvis_roll = 0.015 * amp * style.sway * np.sin(phi_l)
    rz[:, names["hips"]] = pelvis_roll
    rz[:, names["left_up_leg"]] = -pelvis_roll
    rz[:, names["right_up_leg"]] = -pelvis_roll
    rx[:, names["hips"]] = root_pitch
    rx[:, names["spine"]] = 0.45 * style.lean + noisy(0.3)
    ry[:, names["spine"]] = 0.05 * amp * np.sin(phi_l)
    rz[:, names["spine"]] = 0.05 * amp * style.sway * np.sin(phi_l)
    rx[:, names["spine1"]] = 0.35 * style.lean
    rx[:, names["neck"]] = noisy(0.3)

    arm_amp = 0.30 * amp * style.arm_swing * content.arm_factor
    swing_l = arm_amp * np.sin(phi_r)            # left arm follows right leg
    swing_r = arm_amp * np.sin(phi_l)
    rx[:, names["left_arm"]] = swing_l + noisy(0.4)
    rx[:, names["right_arm"]] = swing_r + noisy(0.4)
    rx[:, names["left_fore_arm"]] = -(0.30 * amp + 0.5 * np.clip(-swing_l, 0, None))
    rx[:, names["right_fore_arm"]] = -(0.30 * amp + 0.5 * np.clip(-swing_r, 0, None))

    for joint, (ox, oy, oz) in style.posture.items():
        idx = names[joint]
        rx[:, idx] += ox
        ry[:, idx] += oy
        rz[:, idx] += oz

    local_rot = rotmat_x(rx) @ rotmat_y(ry) @ rotmat_z(rz)   # (T, J, 3, 3)

    # ---- forward kinematics ----------------------------------------------
    world_rot = np.empty((t, j, 3, 3))
    world_pos = np.empty((t, j, 3))
    world_rot[:, 0] = rotmat_y(yaw) @ local_rot[:, 0]
    world_pos[:, 0, 0] = planar[:, 0]
    world_pos[:, 0, 1] = height
    world_pos[:, 0, 2] = planar[:, 1]
    for jj in range(1, j):
        parent = int(sk.parents[jj])
        world_rot[:, jj] = world_rot[:, parent] @ local_rot[:, jj]
        world_pos[:, jj] = world_pos[:, parent] + np.einsum(
            "tab,b->ta", world_rot[:, parent], sk.offsets[jj])

    # ground alignment: shift everything so the lowest foot point grazes y=0
    dy = GROUND_CLEARANCE - world_pos[:, sk.foot_joints, 1].min()
    world_pos[:, :, 1] += dy
    height = height + dy

    # ---- feature assembly ---------------------------------------------------
    local_pos = world_pos.copy()
    local_pos[:, :, 0] -= planar[:, 0:1]
    local_pos[:, :, 2] -= planar[:, 1:2]
    inv_yaw = rotmat_y(-yaw)
    local_pos = np.einsum("tab,tjb->tja", inv_yaw, local_pos)

    local_vel = np.empty_like(local_pos)
    local_vel[:-1] = local_pos[1:] - local_pos[:-1]
    local_vel[-1] = local_vel[-2]

    contacts = detect_foot_contacts(world_pos, sk, fps=fps)

    feat = np.empty((t, sk.feature_dim), dtype=np.float64)
    feat[:, 0] = yaw_vel
    feat[:, 1] = vx
    feat[:, 2] = vz
    feat[:, 3] = height
    feat[:, 4:4 + 3 * j] = local_pos.reshape(t, -1)
    feat[:, 4 + 3 * j:4 + 6 * j] = local_vel.reshape(t, -1)
    feat[:, 4 + 6 * j:4 + 12 * j] = rot6d_from_matrix(local_rot).reshape(t, -1)
    feat[:, 4 + 12 * j:] = contacts

    seq = PoseSequence(frames=feat.astype(np.float32), fps=fps, skeleton=sk)
    return seq, world_pos


def build_corpus(clips_per_cell: int = 25, n_frames: int = 160,
                 fps: float = 30.0, seed: int = 0,
                 skeleton: Skeleton | None = None,
                 n_styles: int | None = None,
                 n_contents: int | None = None) -> Corpus:
    """Styles x contents grid with a deterministic per-cell split.

    The last max(1, clips_per_cell // 10) clips of every cell go to the test
    split, so every (style, content) combination appears in both splits.
    n_styles / n_contents select a prefix of the defined factor sets.
    """
    sk = skeleton if skeleton is not None else default_skeleton()
    style_names = list(STYLES.keys())[:n_styles] if n_styles else list(STYLES)
    content_names = (list(CONTENTS.keys())[:n_contents] if n_contents
                     else list(CONTENTS))
    if not style_names or not content_names:
        raise OutOfRange("need at least one style and one content")
    if n_styles and n_styles > len(STYLES):
        raise OutOfRange(f"only {len(STYLES)} styles are defined")
    if n_contents and n_contents > len(CONTENTS):
        raise OutOfRange(f"only {len(CONTENTS)} contents are defined")
    rng = np.random.default_rng(seed)
    corpus = Corpus(skeleton=sk, style_names=style_names,
                    content_names=content_names)
    n_test = max(1, clips_per_cell // 10)
    for si, style in enumerate(STYLES[n] for n in style_names):
        for ci, content in enumerate(CONTENTS[n] for n in content_names):
            for k in range(clips_per_cell):
                seq, _ = generate_clip(style, content, rng, skeleton=sk,
                                       n_frames=n_frames, fps=fps)
                seq.style_label = si
                seq.content_label = ci
                seq.name = f"s{si}_c{ci}_{k:03d}"
                if k >= clips_per_cell - n_test:
                    corpus.test.append(seq)
                else:
                    corpus.train.append(seq)
    return corpus
