"""NFGC feature-file writer.

This mirrors the consumer's binary wire format and is deliberately
self-contained: the two packages share the format, not code.

    magic   4 bytes  b"NFGC"
    version u32      1
    n       u32      sample count
    d       u32      feature dimension
    c       u32      class count
    names   c * (u32 length + UTF-8 bytes)
    payload n records of (u32 class index, d * float32)

All integers and floats are little-endian.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"NFGC"
VERSION = 1


def encode_feature_file(features: np.ndarray, labels: np.ndarray, class_names: list[str]) -> bytes:
    features = np.asarray(features, dtype=np.float32)
    labels = np.asarray(labels)
    if features.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {features.shape}")
    n, dim = features.shape
    if labels.shape != (n,):
        raise ValueError(f"labels shape {labels.shape} does not match {n} rows")
    if n > 0 and (labels.min() < 0 or labels.max() >= len(class_names)):
        raise ValueError("labels must index into class_names")
    if not np.all(np.isfinite(features)):
        raise ValueError("features must be finite")

    out = bytearray()
    out += struct.pack("<4s4I", MAGIC, VERSION, n, dim, len(class_names))
    for name in class_names:
        encoded = name.encode("utf-8")
        out += struct.pack("<I", len(encoded))
        out += encoded
    payload = np.empty(n, dtype=np.dtype([("label", "<u4"), ("values", "<f4", (dim,))]))
    payload["label"] = labels.astype("<u4")
    payload["values"] = features
    out += payload.tobytes()
    return bytes(out)


def write_feature_file(
    features: np.ndarray, labels: np.ndarray, class_names: list[str], path
) -> None:
    Path(path).write_bytes(encode_feature_file(features, labels, class_names))
