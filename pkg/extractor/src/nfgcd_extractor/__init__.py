"""Image-to-feature export through a pretrained vision transformer."""

from .extract import ExtractSummary, extract
from .spec import DATASET_KINDS, DEFAULT_BACKBONE, ExtractSpec
from .writer import encode_feature_file, write_feature_file

__version__ = "0.1.0"

__all__ = [
    "DATASET_KINDS",
    "DEFAULT_BACKBONE",
    "ExtractSpec",
    "ExtractSummary",
    "encode_feature_file",
    "extract",
    "write_feature_file",
]
