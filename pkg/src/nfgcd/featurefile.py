"""Feature-file codec.

Binary layout (little-endian throughout):

    magic   4 bytes  b"NFGC"
    version u32      1
    n       u32      sample count
    d       u32      feature dimension
    c       u32      class count
    names   c * (u32 length + UTF-8 bytes)
    payload n records of (u32 class index, d * float32)

Values are stored as float32 (what feature extractors emit); downstream
math upcasts to float64 after load, and the float32 payload is kept so a
read/write cycle is byte-exact. Files ending in ``.csv`` are parsed as a
text fallback instead: header row, label column first.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"NFGC"
VERSION = 1


class FeatureFileError(ValueError):
    """Malformed feature file."""


@dataclass
class FeatureSet:
    """In-memory feature table: one row per sample, labels as indices into class_names."""

    features: np.ndarray  # (n, d) float32
    labels: np.ndarray  # (n,) int64 indices < len(class_names)
    class_names: list[str]

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError(
                f"labels shape {self.labels.shape} does not match {self.features.shape[0]} rows"
            )
        if self.n > 0 and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise ValueError("labels must index into class_names")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


def _record_dtype(dim: int) -> np.dtype:
    return np.dtype([("label", "<u4"), ("values", "<f4", (dim,))])


def read_feature_file(path) -> FeatureSet:
    """Parse a feature file; dispatches to the CSV fallback by extension."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _read_csv(path)
    data = path.read_bytes()

    header = struct.calcsize("<4s4I")
    if len(data) < header:
        raise FeatureFileError(
            f"{path}: truncated header, expected at least {header} bytes, got {len(data)}"
        )
    magic, version, n, dim, n_classes = struct.unpack_from("<4s4I", data, 0)
    if magic != MAGIC:
        raise FeatureFileError(f"{path}: bad magic {magic!r} at byte 0, expected {MAGIC!r}")
    if version != VERSION:
        raise FeatureFileError(f"{path}: unsupported version {version} at byte 4")

    offset = header
    names = []
    for i in range(n_classes):
        if offset + 4 > len(data):
            raise FeatureFileError(
                f"{path}: truncated class-name table at byte {offset} (name {i} of {n_classes})"
            )
        (length,) = struct.unpack_from("<I", data, offset)
        offset += 4
        if offset + length > len(data):
            raise FeatureFileError(
                f"{path}: truncated class name {i} at byte {offset}, need {length} bytes"
            )
        try:
            names.append(data[offset : offset + length].decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise FeatureFileError(f"{path}: class name {i} at byte {offset} is not UTF-8") from exc
        offset += length

    expected = n * (4 + 4 * dim)
    actual = len(data) - offset
    if actual != expected:
        raise FeatureFileError(
            f"{path}: payload at byte {offset} has {actual} bytes, expected {expected} "
            f"(n={n}, d={dim})"
        )
    records = np.frombuffer(data, dtype=_record_dtype(dim), count=n, offset=offset)
    labels = records["label"].astype(np.int64)
    features = records["values"].reshape(n, dim).copy()

    bad_label = np.flatnonzero(labels >= n_classes)
    if bad_label.size:
        raise FeatureFileError(
            f"{path}: record {bad_label[0]} has class index {labels[bad_label[0]]} >= {n_classes}"
        )
    bad = np.flatnonzero(~np.all(np.isfinite(features), axis=1))
    if bad.size:
        raise FeatureFileError(f"{path}: record {bad[0]} contains a non-finite feature value")
    return FeatureSet(features=features, labels=labels, class_names=names)


def write_feature_file(records: FeatureSet, path) -> None:
    """Write the binary layout; values are stored as float32."""
    path = Path(path)
    n, dim = records.features.shape
    out = bytearray()
    out += struct.pack("<4s4I", MAGIC, VERSION, n, dim, records.n_classes)
    for name in records.class_names:
        encoded = name.encode("utf-8")
        out += struct.pack("<I", len(encoded))
        out += encoded
    payload = np.empty(n, dtype=_record_dtype(dim))
    payload["label"] = records.labels.astype("<u4")
    payload["values"] = records.features.astype("<f4", copy=False)
    out += payload.tobytes()
    path.write_bytes(bytes(out))


def _read_csv(path: Path) -> FeatureSet:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FeatureFileError(f"{path}: empty CSV, expected a header row") from None
        if len(header) < 2:
            raise FeatureFileError(f"{path}: CSV header needs a label column plus features")
        dim = len(header) - 1
        names: list[str] = []
        index: dict[str, int] = {}
        labels: list[int] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 1:
                raise FeatureFileError(
                    f"{path}: line {lineno} has {len(row)} columns, expected {dim + 1}"
                )
            label = row[0]
            if label not in index:
                index[label] = len(names)
                names.append(label)
            labels.append(index[label])
            try:
                values = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise FeatureFileError(f"{path}: line {lineno} has a non-numeric feature") from exc
            if not all(np.isfinite(values)):
                raise FeatureFileError(f"{path}: line {lineno} contains a non-finite feature value")
            rows.append(values)
    features = np.asarray(rows, dtype=np.float32).reshape(len(rows), dim)
    return FeatureSet(features=features, labels=np.asarray(labels, dtype=np.int64), class_names=names)
