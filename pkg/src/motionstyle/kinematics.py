"""Forward kinematics and position-domain helpers.

Feature sequences are egocentric: the absolute start position/heading is not
stored, so all world-space reconstructions here start at the origin facing
+Z (yaw 0) unless told otherwise.
"""

from __future__ import annotations

import numpy as np

from .errors import NotNormalized
from .pose import PoseSequence
from .rotations import matrix_from_rot6d, rotmat_y


def integrate_root(seq: PoseSequence, initial_yaw: float = 0.0,
                   initial_xz: tuple[float, float] = (0.0, 0.0)):
    """Integrate root channels into absolute yaw and planar position.

    Returns (yaw (T,), planar (T, 2)) in world space. frames[t] holds the
    step from t to t+1, so frame 0 sits at the initial pose.
    """
    _require_raw(seq)
    f = seq.frames.astype(np.float64)
    t = f.shape[0]
    yaw = np.empty(t)
    planar = np.empty((t, 2))
    yaw[0] = initial_yaw
    planar[0] = initial_xz
    if t > 1:
        yaw[1:] = initial_yaw + np.cumsum(f[:-1, 0])
        c, s = np.cos(yaw[:-1]), np.sin(yaw[:-1])
        vx, vz = f[:-1, 1], f[:-1, 2]
        # R_y(yaw) @ (vx, 0, vz): x' = c*vx + s*vz, z' = -s*vx + c*vz
        steps = np.stack([c * vx + s * vz, -s * vx + c * vz], axis=-1)
        planar[1:] = initial_xz + np.cumsum(steps, axis=0)
    return yaw, planar


def fk_positions(seq: PoseSequence, initial_yaw: float = 0.0,
                 initial_xz: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """World joint positions from the local-position channels. (T, J, 3)."""
    _require_raw(seq)
    lay = seq.layout
    j = seq.skeleton.joint_count
    yaw, planar = integrate_root(seq, initial_yaw, initial_xz)
    local = seq.frames[:, lay.positions].astype(np.float64).reshape(-1, j, 3)
    rot = rotmat_y(yaw)                               # (T, 3, 3)
    world = np.einsum("tab,tjb->tja", rot, local)
    world[:, :, 0] += planar[:, 0:1]
    world[:, :, 2] += planar[:, 1:2]
    return world


def fk_from_rotations(seq: PoseSequence, initial_yaw: float = 0.0,
                      initial_xz: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """World joint positions through the joint tree. (T, J, 3).

    Uses the rotation channels and skeleton offsets; the root's world
    transform combines integrated yaw with its local (yaw-free) rotation and
    the height channel. For well-formed features this agrees with
    fk_positions.
    """
    _require_raw(seq)
    sk = seq.skeleton
    lay = seq.layout
    j = sk.joint_count
    t = seq.length
    yaw, planar = integrate_root(seq, initial_yaw, initial_xz)
    height = seq.frames[:, lay.height].astype(np.float64)
    local_rot = matrix_from_rot6d(
        seq.frames[:, lay.rotations].astype(np.float64).reshape(t, j, 6))

    world_rot = np.empty((t, j, 3, 3))
    world_pos = np.empty((t, j, 3))
    world_rot[:, 0] = rotmat_y(yaw) @ local_rot[:, 0]
    world_pos[:, 0, 0] = planar[:, 0]
    world_pos[:, 0, 1] = height
    world_pos[:, 0, 2] = planar[:, 1]
    for jj in range(1, j):
        p = int(sk.parents[jj])
        world_rot[:, jj] = world_rot[:, p] @ local_rot[:, jj]
        world_pos[:, jj] = world_pos[:, p] + np.einsum(
            "tab,b->ta", world_rot[:, p], sk.offsets[jj])
    return world_pos


def local_positions(world: np.ndarray, yaw: np.ndarray,
                    planar: np.ndarray) -> np.ndarray:
    """Inverse of the fk_positions transform: world -> root-local positions."""
    local = world.copy().astype(np.float64)
    local[:, :, 0] -= planar[:, 0:1]
    local[:, :, 2] -= planar[:, 1:2]
    inv = rotmat_y(-np.asarray(yaw))
    return np.einsum("tab,tjb->tja", inv, local)


def mpjpe_mm(a: PoseSequence, b: PoseSequence) -> float:
    """Root-relative mean per-joint position error, millimeters.

    Compares the local-position channels directly (translation- and
    heading-aligned at every frame, absolute heights kept), so integrated
    root drift does not contaminate the pose error.
    """
    _require_raw(a)
    _require_raw(b)
    if a.frames.shape != b.frames.shape:
        from .errors import LengthMismatch
        raise LengthMismatch(
            f"shape {a.frames.shape} vs {b.frames.shape}")
    lay = a.layout
    j = a.skeleton.joint_count
    pa = a.frames[:, lay.positions].astype(np.float64).reshape(-1, j, 3)
    pb = b.frames[:, lay.positions].astype(np.float64).reshape(-1, j, 3)
    return float(np.linalg.norm(pa - pb, axis=-1).mean() * 1000.0)


def _require_raw(seq: PoseSequence) -> None:
    if seq.normalized:
        raise NotNormalized("kinematics operate on raw (unnormalized) features")
