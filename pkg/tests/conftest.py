"""Shared synthetic-data builders."""

from __future__ import annotations

import numpy as np
import pytest

from nfgcd.featurefile import FeatureSet

# Ten 4-D cluster centers: eight on the axes, two on the main diagonal.
# With unit scale the minimum pairwise center gap is ~2.28; callers scale
# this up so the raw gap clears whatever margin they need.
_AXIS = 1.67
_DIAG = 1.3


def cluster_centers(scale: float = 2.0) -> np.ndarray:
    centers = []
    for d in range(4):
        for sign in (1.0, -1.0):
            c = np.zeros(4)
            c[d] = sign * _AXIS
            centers.append(c)
    centers.append(np.full(4, _DIAG))
    centers.append(np.full(4, -_DIAG))
    return np.asarray(centers) * scale


def make_clustered_dataset(
    per_class: int = 30,
    radius: float = 0.5,
    scale: float = 2.0,
    seed: int = 0,
) -> FeatureSet:
    """Ten tight, well-separated 4-D clusters (raw min center gap ~2.28 * scale)."""
    rng = np.random.default_rng(seed)
    centers = cluster_centers(scale)
    features = []
    labels = []
    for k, center in enumerate(centers):
        direction = rng.normal(size=(per_class, 4))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        r = radius * rng.uniform(size=(per_class, 1)) ** 0.25
        features.append(center + direction * r)
        labels.extend([k] * per_class)
    return FeatureSet(
        features=np.vstack(features).astype(np.float32),
        labels=np.asarray(labels),
        class_names=[f"c{k}" for k in range(len(centers))],
    )


@pytest.fixture
def clustered_dataset() -> FeatureSet:
    return make_clustered_dataset()
