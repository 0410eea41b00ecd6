"""Model bundle: everything inference needs, persisted as one directory.

Layout::

    <dir>/bundle.json            index + provenance
    <dir>/codec.json / .bin      motion codec checkpoint
    <dir>/stylizer.json / .bin   stylizer checkpoint
    <dir>/gmp.json / .bin        global-motion predictor (optional)
    <dir>/norm_stats.json        per-channel feature mean/std
    <dir>/<name>.skeleton.json   skeleton definition
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .codec import MotionCodec
from .errors import IoError, MissingCodec, UnsupportedVersion
from .globalmotion import GlobalMotionPredictor
from .pose import NormStats
from .skeleton import Skeleton
from .stylizer import Stylizer

BUNDLE_FORMAT_VERSION = 1


def save_norm_stats(stats: NormStats, path: str | Path) -> None:
    doc = {"mean": [float(v) for v in stats.mean],
           "std": [float(v) for v in stats.std]}
    Path(path).write_text(json.dumps(doc))


def load_norm_stats(path: str | Path) -> NormStats:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IoError(f"cannot read normalization stats {path}: {exc}") from exc
    return NormStats(mean=np.asarray(doc["mean"], dtype=np.float32),
                     std=np.asarray(doc["std"], dtype=np.float32))


@dataclass
class ModelBundle:
    codec: MotionCodec
    stylizer: Stylizer
    stats: NormStats
    skeleton: Skeleton
    gmp: GlobalMotionPredictor | None = None
    style_names: list | None = None
    provenance: dict | None = None

    @property
    def supervised(self) -> bool:
        return self.stylizer.supervised

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        save_checkpoint(str(directory / "codec"), self.codec.meta(),
                        self.codec.state_dict())
        save_checkpoint(str(directory / "stylizer"), self.stylizer.meta(),
                        self.stylizer.state_dict())
        if self.gmp is not None:
            save_checkpoint(str(directory / "gmp"), self.gmp.meta(),
                            self.gmp.state_dict())
        save_norm_stats(self.stats, directory / "norm_stats.json")
        self.skeleton.save(directory / f"{self.skeleton.name}.skeleton.json")
        index = {"format_version": BUNDLE_FORMAT_VERSION,
                 "skeleton_id": self.skeleton.name,
                 "has_gmp": self.gmp is not None,
                 "style_names": self.style_names,
                 "provenance": self.provenance or {}}
        (directory / "bundle.json").write_text(json.dumps(index, indent=1))

    @classmethod
    def load(cls, directory: str | Path) -> "ModelBundle":
        directory = Path(directory)
        ipath = directory / "bundle.json"
        if not ipath.exists():
            raise MissingCodec(f"no bundle.json in {directory} — not a model directory")
        try:
            index = json.loads(ipath.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise IoError(f"cannot read bundle index {ipath}: {exc}") from exc
        version = index.get("format_version")
        if version != BUNDLE_FORMAT_VERSION:
            raise UnsupportedVersion(
                f"bundle format {version!r} not supported "
                f"(expected {BUNDLE_FORMAT_VERSION})")

        meta, tensors = load_checkpoint(str(directory / "codec"))
        codec = MotionCodec.from_meta(meta)
        codec.load_state_dict(tensors)
        meta, tensors = load_checkpoint(str(directory / "stylizer"))
        stylizer = Stylizer.from_meta(meta)
        stylizer.load_state_dict(tensors)
        gmp = None
        if index.get("has_gmp") and os.path.exists(directory / "gmp.json"):
            meta, tensors = load_checkpoint(str(directory / "gmp"))
            gmp = GlobalMotionPredictor.from_meta(meta)
            gmp.load_state_dict(tensors)
        stats = load_norm_stats(directory / "norm_stats.json")
        skeleton = Skeleton.load(
            directory / f"{index['skeleton_id']}.skeleton.json")
        bundle = cls(codec=codec, stylizer=stylizer, stats=stats,
                     skeleton=skeleton, gmp=gmp,
                     style_names=index.get("style_names"),
                     provenance=index.get("provenance") or {})
        bundle.codec.freeze()
        bundle.stylizer.freeze()
        if bundle.gmp is not None:
            bundle.gmp.freeze()
        return bundle
