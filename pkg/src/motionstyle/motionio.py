"""Motion clip and corpus file I/O.

A motion clip on disk is a pair of files sharing a base name::

    <name>.json   manifest (see below)
    <name>.f32    raw float32, little-endian, row-major (frame_count rows
                  of feature_dim values)

Manifest fields::

    {
      "format_version": 1,
      "fps": 30.0,
      "joint_count": 21,
      "feature_dim": 260,
      "frame_count": 160,
      "skeleton_id": "synthetic21",
      "normalized": false,
      "style_label": 2,        # optional
      "content_label": 0,      # optional
    }

A corpus directory holds clip pairs, one skeleton file
(``<skeleton_id>.skeleton.json``) and an index ``corpus.json`` with label
names and the train/test split.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyCorpus, IoError, ShapeMismatch, UnsupportedVersion
from .pose import PoseSequence
from .skeleton import Skeleton

MOTION_FORMAT_VERSION = 1
CORPUS_FORMAT_VERSION = 1


def _base(path: str | Path) -> Path:
    path = Path(path)
    if path.suffix in (".json", ".f32"):
        path = path.with_suffix("")
    return path


def save_motion(seq: PoseSequence, path: str | Path) -> None:
    """Write a clip as <base>.json + <base>.f32."""
    base = _base(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": MOTION_FORMAT_VERSION,
        "fps": float(seq.fps),
        "joint_count": seq.skeleton.joint_count,
        "feature_dim": int(seq.frames.shape[1]),
        "frame_count": int(seq.frames.shape[0]),
        "skeleton_id": seq.skeleton.name,
        "normalized": bool(seq.normalized),
    }
    if seq.style_label is not None:
        manifest["style_label"] = int(seq.style_label)
    if seq.content_label is not None:
        manifest["content_label"] = int(seq.content_label)
    base.with_suffix(".json").write_text(json.dumps(manifest, indent=2) + "\n")
    data = np.ascontiguousarray(seq.frames, dtype="<f4")
    base.with_suffix(".f32").write_bytes(data.tobytes())


def load_motion(path: str | Path, skeleton: Skeleton | None = None) -> PoseSequence:
    """Load a clip pair. The skeleton is resolved from ``skeleton_id`` by
    looking for ``<skeleton_id>.skeleton.json`` next to the clip unless one
    is passed in."""
    base = _base(path)
    mpath, dpath = base.with_suffix(".json"), base.with_suffix(".f32")
    try:
        manifest = json.loads(mpath.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IoError(f"cannot read manifest {mpath}: {exc}") from exc
    version = manifest.get("format_version")
    if version != MOTION_FORMAT_VERSION:
        raise UnsupportedVersion(
            f"motion format_version {version!r}, expected {MOTION_FORMAT_VERSION}")

    if skeleton is None:
        skel_path = base.parent / f"{manifest['skeleton_id']}.skeleton.json"
        if not skel_path.exists():
            raise IoError(
                f"skeleton file {skel_path} not found (pass skeleton= to "
                "load_motion to supply one)")
        skeleton = Skeleton.load(skel_path)
    if skeleton.name != manifest["skeleton_id"]:
        raise ShapeMismatch(
            f"clip was recorded on skeleton {manifest['skeleton_id']!r}, "
            f"got {skeleton.name!r}")
    if skeleton.joint_count != manifest["joint_count"]:
        raise ShapeMismatch(
            f"manifest joint_count {manifest['joint_count']} != skeleton "
            f"{skeleton.joint_count}")

    try:
        raw = dpath.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {dpath}: {exc}") from exc
    t, d = manifest["frame_count"], manifest["feature_dim"]
    expected = t * d * 4
    if len(raw) != expected:
        raise ShapeMismatch(
            f"{dpath} holds {len(raw)} bytes, manifest implies {expected} "
            f"({t} x {d} float32)")
    frames = np.frombuffer(raw, dtype="<f4").reshape(t, d)
    return PoseSequence(
        frames=frames,
        fps=float(manifest["fps"]),
        skeleton=skeleton,
        normalized=bool(manifest.get("normalized", False)),
        style_label=manifest.get("style_label"),
        content_label=manifest.get("content_label"),
        name=base.name,
    )


# ---------------------------------------------------------------------------
# corpora


@dataclass
class Corpus:
    skeleton: Skeleton
    style_names: list[str]
    content_names: list[str]
    train: list[PoseSequence] = field(default_factory=list)
    test: list[PoseSequence] = field(default_factory=list)

    @property
    def clips(self) -> list[PoseSequence]:
        return self.train + self.test

    @property
    def n_styles(self) -> int:
        return len(self.style_names)

    @property
    def n_contents(self) -> int:
        return len(self.content_names)


def save_corpus(corpus: Corpus, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    corpus.skeleton.save(directory / f"{corpus.skeleton.name}.skeleton.json")
    index = {
        "format_version": CORPUS_FORMAT_VERSION,
        "skeleton_id": corpus.skeleton.name,
        "style_names": corpus.style_names,
        "content_names": corpus.content_names,
        "clips": [],
    }
    for split, seqs in (("train", corpus.train), ("test", corpus.test)):
        for seq in seqs:
            if not seq.name:
                raise IoError("corpus clips need names before saving")
            save_motion(seq, directory / seq.name)
            index["clips"].append({
                "name": seq.name,
                "style": seq.style_label,
                "content": seq.content_label,
                "split": split,
            })
    (directory / "corpus.json").write_text(json.dumps(index, indent=2) + "\n")


def load_corpus(directory: str | Path) -> Corpus:
    directory = Path(directory)
    ipath = directory / "corpus.json"
    try:
        index = json.loads(ipath.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IoError(f"cannot read corpus index {ipath}: {exc}") from exc
    version = index.get("format_version")
    if version != CORPUS_FORMAT_VERSION:
        raise UnsupportedVersion(
            f"corpus format_version {version!r}, expected {CORPUS_FORMAT_VERSION}")
    skeleton = Skeleton.load(
        directory / f"{index['skeleton_id']}.skeleton.json")
    corpus = Corpus(
        skeleton=skeleton,
        style_names=list(index["style_names"]),
        content_names=list(index["content_names"]),
    )
    for row in index["clips"]:
        seq = load_motion(directory / row["name"], skeleton=skeleton)
        seq.style_label = row.get("style")
        seq.content_label = row.get("content")
        target = corpus.train if row.get("split", "train") == "train" else corpus.test
        target.append(seq)
    if not corpus.clips:
        raise EmptyCorpus(f"corpus at {directory} lists no clips")
    return corpus
