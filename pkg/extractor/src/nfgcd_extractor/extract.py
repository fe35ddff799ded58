"""Extraction pipeline: dataset -> backbone -> NFGC file."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import open_dataset
from .spec import ExtractSpec
from .writer import write_feature_file


@dataclass(frozen=True)
class ExtractSummary:
    n: int
    dim: int
    n_classes: int
    output_path: str


def extract(spec: ExtractSpec, backbone=None) -> ExtractSummary:
    """Run one export job; ``backbone`` may be injected (anything mapping a
    list of PIL images to a (B, dim) float32 array)."""
    source = open_dataset(spec)
    if backbone is None:
        from .backbone import load_backbone

        backbone = load_backbone(spec)

    rows = []
    labels = []
    batch_images = []
    batch_labels = []

    def flush():
        if not batch_images:
            return
        feats = np.asarray(backbone(list(batch_images)), dtype=np.float32)
        if feats.ndim != 2 or feats.shape[0] != len(batch_images):
            raise RuntimeError(
                f"backbone returned shape {feats.shape} for {len(batch_images)} images"
            )
        rows.append(feats)
        labels.extend(batch_labels)
        batch_images.clear()
        batch_labels.clear()

    for image, label in source:
        batch_images.append(image)
        batch_labels.append(label)
        if len(batch_images) >= spec.batch_size:
            flush()
    flush()

    if rows:
        features = np.vstack(rows)
    else:
        dim = getattr(backbone, "dim", 0)
        features = np.empty((0, dim), dtype=np.float32)
    label_arr = np.asarray(labels, dtype=np.int64)
    write_feature_file(features, label_arr, source.class_names, spec.output_path)
    return ExtractSummary(
        n=features.shape[0],
        dim=features.shape[1],
        n_classes=len(source.class_names),
        output_path=str(spec.output_path),
    )
