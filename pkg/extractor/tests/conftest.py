"""Fixtures: a tiny on-disk image tree and a deterministic stub backbone."""

from __future__ import annotations

import numpy as np
import pytest
from PIL import Image


class StubBackbone:
    """Deterministic stand-in: 4x4 grayscale downsample of each image."""

    dim = 16

    def __call__(self, images):
        rows = []
        for img in images:
            small = img.convert("L").resize((4, 4), Image.NEAREST)
            rows.append(np.asarray(small, dtype=np.float32).ravel() / 255.0)
        return np.stack(rows)


@pytest.fixture
def stub_backbone():
    return StubBackbone()


def _solid_image(color, size=(20, 16)):
    return Image.new("RGB", size, color)


@pytest.fixture
def image_tree(tmp_path):
    """Three classes, a few images each, plus one duplicated image."""
    rng = np.random.default_rng(0)
    root = tmp_path / "images"
    counts = {"ant": 3, "bee": 4, "cat": 2}
    for name, count in counts.items():
        d = root / name
        d.mkdir(parents=True)
        for i in range(count):
            color = tuple(int(v) for v in rng.integers(0, 255, 3))
            _solid_image(color).save(d / f"{name}-{i}.png")
    # exact duplicate of an existing image under a new file name
    first = root / "ant" / "ant-0.png"
    with Image.open(first) as img:
        img.save(root / "ant" / "ant-dup.png")
    return root
