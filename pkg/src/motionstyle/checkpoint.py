"""Checkpoint format: a JSON header plus a named-tensor binary blob.

One checkpoint = two files sharing a base path:

* ``<base>.json`` — model metadata (arbitrary JSON-safe dict) plus an ordered
  manifest of tensors: name, dtype, shape, byte offset into the blob.
* ``<base>.bin``  — magic ``b"MSTN\\x01"`` followed by the raw tensor bytes in
  manifest order, each little-endian, C-contiguous.

The split keeps the metadata human-inspectable while the weights stay compact.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import BadMagic, IoError, ShapeMismatch, UnsupportedVersion

MAGIC = b"MSTN\x01"
FORMAT_VERSION = 1

_DTYPES = {"float32": "<f4", "float64": "<f8", "int64": "<i8", "int32": "<i4"}


def save_checkpoint(base_path, meta: dict, tensors: dict[str, np.ndarray]) -> None:
    """Write ``<base>.json`` + ``<base>.bin``. `meta` must be JSON-safe."""
    base_path = str(base_path)
    manifest = []
    offset = len(MAGIC)
    chunks = []
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr)
        dtype_name = arr.dtype.name
        if dtype_name not in _DTYPES:
            raise IoError(f"tensor {name!r} has unsupported dtype {dtype_name}")
        raw = arr.astype(_DTYPES[dtype_name], copy=False).tobytes()
        manifest.append({"name": name, "dtype": dtype_name,
                         "shape": list(arr.shape), "offset": offset,
                         "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    header = {"format_version": FORMAT_VERSION, "meta": meta, "tensors": manifest}
    try:
        with open(base_path + ".json", "w", encoding="utf-8") as fh:
            json.dump(header, fh, indent=1)
        with open(base_path + ".bin", "wb") as fh:
            fh.write(MAGIC)
            for raw in chunks:
                fh.write(raw)
    except OSError as exc:
        raise IoError(f"cannot write checkpoint {base_path!r}: {exc}") from exc


def load_checkpoint(base_path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a checkpoint back. Returns (meta, tensors)."""
    base_path = str(base_path)
    json_path, bin_path = base_path + ".json", base_path + ".bin"
    for path in (json_path, bin_path):
        if not os.path.exists(path):
            raise IoError(f"checkpoint file not found: {path!r}")
    try:
        with open(json_path, "r", encoding="utf-8") as fh:
            header = json.load(fh)
        with open(bin_path, "rb") as fh:
            blob = fh.read()
    except (OSError, json.JSONDecodeError) as exc:
        raise IoError(f"cannot read checkpoint {base_path!r}: {exc}") from exc

    if not blob.startswith(MAGIC):
        raise BadMagic(f"{bin_path!r} does not start with {MAGIC!r}")
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(
            f"checkpoint format {version!r} not supported (expected {FORMAT_VERSION})")

    tensors: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        name, dtype_name = entry["name"], entry["dtype"]
        if dtype_name not in _DTYPES:
            raise UnsupportedVersion(f"tensor {name!r} has unknown dtype {dtype_name}")
        start, nbytes = entry["offset"], entry["nbytes"]
        raw = blob[start:start + nbytes]
        if len(raw) != nbytes:
            raise ShapeMismatch(
                f"blob truncated: tensor {name!r} wants {nbytes} bytes at "
                f"offset {start}, file has {len(blob)}")
        arr = np.frombuffer(raw, dtype=_DTYPES[dtype_name]).astype(dtype_name)
        shape = tuple(entry["shape"])
        if arr.size != int(np.prod(shape)):
            raise ShapeMismatch(
                f"tensor {name!r}: {arr.size} elements cannot fill shape {shape}")
        tensors[name] = arr.reshape(shape)
    return header["meta"], tensors
