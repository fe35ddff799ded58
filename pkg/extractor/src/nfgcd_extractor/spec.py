"""Extraction job description."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

DATASET_KINDS = (
    "cifar10",
    "cifar100",
    "imagenet100-dir",
    "cub200-dir",
    "cars-dir",
    "image-folder",
)

DEFAULT_BACKBONE = "google/vit-base-patch16-224-in21k"


@dataclass(frozen=True)
class ExtractSpec:
    """One export job: dataset + split through a backbone into an NFGC file.

    ``data_root`` is the dataset location: the torchvision cache root for the
    CIFAR datasets, or the class-subdirectory tree for the ``*-dir`` and
    ``image-folder`` kinds.
    """

    dataset: str
    output_path: str
    data_root: str = "data"
    split: str = "test"
    backbone: str = DEFAULT_BACKBONE
    batch_size: int = 64
    device: str = "cpu"
    limit: Optional[int] = None  # cap on images, for smoke runs

    def __post_init__(self):
        if self.dataset not in DATASET_KINDS:
            raise ValueError(
                f"unknown dataset {self.dataset!r}, expected one of {DATASET_KINDS}"
            )
        if self.split not in ("train", "test"):
            raise ValueError(f"split must be train or test, got {self.split!r}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.limit is not None and self.limit < 1:
            raise ValueError(f"limit must be >= 1, got {self.limit}")
