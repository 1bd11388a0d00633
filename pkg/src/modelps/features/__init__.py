"""Dataset registry and augmentation pipeline."""

from .augment import AugmentationSpec, apply_steps
from .registry import Batch, DatasetRecord, FeatureStore, Preview, default_splits, parse_csv, to_csv
from .synthetic import gaussian_blobs, generate, two_moons

__all__ = [
    "AugmentationSpec",
    "Batch",
    "DatasetRecord",
    "FeatureStore",
    "Preview",
    "apply_steps",
    "default_splits",
    "gaussian_blobs",
    "generate",
    "parse_csv",
    "to_csv",
    "two_moons",
]
