"""Rotation utilities: 6D representation, matrices, geodesic distance.

The 6D representation of a rotation matrix R is its first two columns in
column-major order::

    d = [R00, R10, R20, R01, R11, R21]

Reconstruction runs Gram-Schmidt on the two columns and completes the frame
with a cross product, so any pair of non-parallel, non-zero columns maps back
to a proper rotation. All functions accept stacked inputs: matrices are
``(..., 3, 3)``, 6D vectors are ``(..., 6)``.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateRotation, NotARotation

_EPS = 1e-8


def rot6d_from_matrix(matrices: np.ndarray) -> np.ndarray:
    """Extract the 6D representation (first two columns) of rotation matrices."""
    matrices = np.asarray(matrices)
    if matrices.shape[-2:] != (3, 3):
        raise NotARotation(f"expected (...,3,3) matrices, got {matrices.shape}")
    cols = matrices[..., :, :2]                       # (..., 3, 2)
    return np.swapaxes(cols, -1, -2).reshape(*matrices.shape[:-2], 6)


def matrix_from_rot6d(d6: np.ndarray) -> np.ndarray:
    """Reconstruct rotation matrices from 6D vectors via Gram-Schmidt.

    Raises DegenerateRotation if the first column is (near) zero or the two
    columns are (near) parallel.
    """
    d6 = np.asarray(d6, dtype=np.float64)
    if d6.shape[-1] != 6:
        raise DegenerateRotation(f"expected (...,6) input, got {d6.shape}")
    a = d6[..., 0:3]
    b = d6[..., 3:6]

    na = np.linalg.norm(a, axis=-1)
    if np.any(na < _EPS):
        raise DegenerateRotation("first 6D column has (near) zero norm")
    x = a / na[..., None]

    y = b - np.sum(x * b, axis=-1, keepdims=True) * x
    ny = np.linalg.norm(y, axis=-1)
    if np.any(ny < _EPS):
        raise DegenerateRotation("6D columns are (near) parallel")
    y = y / ny[..., None]

    z = np.cross(x, y)
    return np.stack([x, y, z], axis=-1)               # columns x, y, z


def geodesic_angle(ra: np.ndarray, rb: np.ndarray) -> np.ndarray:
    """Geodesic distance between rotations: arccos((tr(RaT Rb) - 1) / 2).

    Returns angles in radians, shape = broadcast batch shape.
    """
    ra = np.asarray(ra, dtype=np.float64)
    rb = np.asarray(rb, dtype=np.float64)
    # trace(Ra^T Rb) without forming the product
    tr = np.sum(ra * rb, axis=(-2, -1))
    cos = np.clip((tr - 1.0) * 0.5, -1.0, 1.0)
    return np.arccos(cos)


def assert_rotation(matrices: np.ndarray, tol: float = 1e-5) -> None:
    """Raise NotARotation unless every matrix is orthonormal with det +1."""
    m = np.asarray(matrices, dtype=np.float64)
    if m.shape[-2:] != (3, 3):
        raise NotARotation(f"expected (...,3,3) matrices, got {m.shape}")
    eye = np.eye(3)
    err = np.abs(np.swapaxes(m, -1, -2) @ m - eye).max()
    if err > tol:
        raise NotARotation(f"max |R^T R - I| = {err:.3g} exceeds {tol:.3g}")
    det = np.linalg.det(m)
    if np.any(det < 0.0):
        raise NotARotation("matrix has negative determinant (reflection)")


# ---------------------------------------------------------------------------
# elementary rotation constructors (used by FK and the synthetic generator)


def rotmat_x(angle):
    """Rotation about +X. `angle` may be scalar or an array (... -> ...,3,3)."""
    angle = np.asarray(angle, dtype=np.float64)
    c, s = np.cos(angle), np.sin(angle)
    out = np.zeros(angle.shape + (3, 3))
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = c
    out[..., 1, 2] = -s
    out[..., 2, 1] = s
    out[..., 2, 2] = c
    return out


def rotmat_y(angle):
    """Rotation about +Y (yaw)."""
    angle = np.asarray(angle, dtype=np.float64)
    c, s = np.cos(angle), np.sin(angle)
    out = np.zeros(angle.shape + (3, 3))
    out[..., 0, 0] = c
    out[..., 0, 2] = s
    out[..., 1, 1] = 1.0
    out[..., 2, 0] = -s
    out[..., 2, 2] = c
    return out


def rotmat_z(angle):
    """Rotation about +Z."""
    angle = np.asarray(angle, dtype=np.float64)
    c, s = np.cos(angle), np.sin(angle)
    out = np.zeros(angle.shape + (3, 3))
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    out[..., 2, 2] = 1.0
    return out


# sign pattern applied to a 6D vector under conjugation with diag(-1, 1, 1),
# i.e. mirroring across the YZ plane: R' = S R S.
MIRROR_6D_SIGNS = np.array([1.0, -1.0, -1.0, -1.0, 1.0, 1.0])


def mirror_rot6d(d6: np.ndarray) -> np.ndarray:
    """Mirror 6D rotations across the YZ plane (x -> -x). Exact involution."""
    d6 = np.asarray(d6)
    if d6.shape[-1] != 6:
        raise DegenerateRotation(f"expected (...,6) input, got {d6.shape}")
    return d6 * MIRROR_6D_SIGNS.astype(d6.dtype)
