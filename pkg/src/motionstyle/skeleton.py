"""Skeleton definition: joint tree, rest offsets, foot joints, mirror map.

A skeleton is stored as a small JSON document::

    {
      "format_version": 1,
      "name": "synthetic21",
      "joint_names": ["hips", ...],
      "parents": [-1, 0, ...],          # parent index per joint, root = -1
      "offsets": [[x, y, z], ...],      # rest offset from parent, meters
      "foot_joints": [3, 4, 7, 8],      # joints used for contact channels
      "mirror_pairs": [[1, 5], ...]     # left/right joint pairing
    }

Axes: +Y is up, +Z is forward, +X is the character's left. With all local
rotations at identity the character stands upright, arms hanging down.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IoError, MissingMirrorMap, ShapeMismatch, UnsupportedVersion

FORMAT_VERSION = 1


@dataclass
class Skeleton:
    name: str
    parents: np.ndarray                 # (J,) int
    offsets: np.ndarray                 # (J, 3) float64, meters
    joint_names: list[str]
    foot_joints: list[int]
    mirror_pairs: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        self.parents = np.asarray(self.parents, dtype=np.int64)
        self.offsets = np.asarray(self.offsets, dtype=np.float64)
        j = self.parents.shape[0]
        if self.offsets.shape != (j, 3):
            raise ShapeMismatch(
                f"offsets shape {self.offsets.shape} != ({j}, 3)")
        if len(self.joint_names) != j:
            raise ShapeMismatch("joint_names length != joint count")
        if self.parents[0] != -1 or np.any(self.parents[1:] >= np.arange(1, j)):
            raise ShapeMismatch(
                "parents must be topologically ordered with root first")

    @property
    def joint_count(self) -> int:
        return int(self.parents.shape[0])

    @property
    def feature_dim(self) -> int:
        # 4 root channels + 3J positions + 3J velocities + 6J rotations
        # + one contact channel per foot joint
        return 4 + 12 * self.joint_count + len(self.foot_joints)

    def mirror_index(self) -> np.ndarray:
        """Per-joint index of the mirrored joint (self for unpaired joints).

        Raises MissingMirrorMap when the skeleton declares no pairs.
        """
        if not self.mirror_pairs:
            raise MissingMirrorMap(f"skeleton {self.name!r} has no mirror_pairs")
        idx = np.arange(self.joint_count)
        for a, b in self.mirror_pairs:
            idx[a], idx[b] = b, a
        return idx

    def save(self, path: str | Path) -> None:
        doc = {
            "format_version": FORMAT_VERSION,
            "name": self.name,
            "joint_names": list(self.joint_names),
            "parents": self.parents.tolist(),
            "offsets": [[float(v) for v in row] for row in self.offsets],
            "foot_joints": list(map(int, self.foot_joints)),
            "mirror_pairs": [[int(a), int(b)] for a, b in self.mirror_pairs],
        }
        Path(path).write_text(json.dumps(doc, indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Skeleton":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise IoError(f"cannot read skeleton {path}: {exc}") from exc
        version = doc.get("format_version")
        if version != FORMAT_VERSION:
            raise UnsupportedVersion(
                f"skeleton format_version {version!r}, expected {FORMAT_VERSION}")
        return cls(
            name=doc["name"],
            parents=np.asarray(doc["parents"]),
            offsets=np.asarray(doc["offsets"]),
            joint_names=list(doc["joint_names"]),
            foot_joints=list(doc["foot_joints"]),
            mirror_pairs=[tuple(p) for p in doc.get("mirror_pairs", [])],
        )


# ---------------------------------------------------------------------------
# built-in 21-joint skeleton used by the synthetic corpus

_J21 = [
    # name,          parent, offset (x, y, z)
    ("hips",          -1, (0.0,   0.0,  0.0)),
    ("left_up_leg",    0, (0.09, -0.05, 0.0)),
    ("left_leg",       1, (0.0,  -0.40, 0.0)),
    ("left_foot",      2, (0.0,  -0.40, 0.0)),
    ("left_toe",       3, (0.0,  -0.07, 0.12)),
    ("right_up_leg",   0, (-0.09, -0.05, 0.0)),
    ("right_leg",      5, (0.0,  -0.40, 0.0)),
    ("right_foot",     6, (0.0,  -0.40, 0.0)),
    ("right_toe",      7, (0.0,  -0.07, 0.12)),
    ("spine",          0, (0.0,   0.12, 0.0)),
    ("spine1",         9, (0.0,   0.14, 0.0)),
    ("neck",          10, (0.0,   0.14, 0.0)),
    ("head",          11, (0.0,   0.10, 0.0)),
    ("left_shoulder", 10, (0.18,  0.08, 0.0)),
    ("left_arm",      13, (0.0,  -0.28, 0.0)),
    ("left_fore_arm", 14, (0.0,  -0.26, 0.0)),
    ("left_hand",     15, (0.0,  -0.08, 0.0)),
    ("right_shoulder", 10, (-0.18, 0.08, 0.0)),
    ("right_arm",     17, (0.0,  -0.28, 0.0)),
    ("right_fore_arm", 18, (0.0, -0.26, 0.0)),
    ("right_hand",    19, (0.0,  -0.08, 0.0)),
]


def default_skeleton() -> Skeleton:
    """The 21-joint humanoid used by the synthetic corpus (260-dim features)."""
    return Skeleton(
        name="synthetic21",
        parents=np.array([p for _, p, _ in _J21]),
        offsets=np.array([o for _, _, o in _J21]),
        joint_names=[n for n, _, _ in _J21],
        foot_joints=[3, 4, 7, 8],
        mirror_pairs=[(1, 5), (2, 6), (3, 7), (4, 8),
                      (13, 17), (14, 18), (15, 19), (16, 20)],
    )


# rest height of the hips when a toe touches the ground (see offsets above)
REST_HIPS_HEIGHT = 0.05 + 0.40 + 0.40 + 0.07
