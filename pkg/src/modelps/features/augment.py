"""Vector-level augmentation pipeline.

Steps operate on flattened feature vectors in float64 and are bit
reproducible for a fixed seed. ``feature_dropout`` zeroes features without
rescaling; ``label_noise`` always flips to a *different* class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SchemaViolation


def _require_prob(step: dict, key: str, path: str) -> float:
    value = step.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not 0.0 <= value <= 1.0:
        raise SchemaViolation(f"{path}/{key}", "must lie in [0, 1]")
    return float(value)


def validate_step(step: dict, path: str = "/aug/steps") -> None:
    op = step.get("op")
    if op == "normalize":
        std = step.get("std")
        stds = np.asarray(std, dtype=float)
        if stds.size == 0 or np.any(stds <= 0):
            raise SchemaViolation(f"{path}/std", "std must be positive")
        if "mean" not in step:
            raise SchemaViolation(f"{path}/mean", "required field missing")
    elif op == "gaussian_noise":
        sigma = step.get("sigma")
        if not isinstance(sigma, (int, float)) or isinstance(sigma, bool) or sigma < 0:
            raise SchemaViolation(f"{path}/sigma", "sigma must be non-negative")
    elif op == "feature_dropout" or op == "label_noise":
        _require_prob(step, "p", path)
    else:
        raise SchemaViolation(f"{path}/op", f"unknown op {op!r}")


@dataclass(frozen=True)
class AugmentationSpec:
    steps: tuple = ()
    seed: int = 0

    def __post_init__(self):
        for i, step in enumerate(self.steps):
            validate_step(step, f"/aug/steps/{i}")

    @staticmethod
    def from_obj(obj: dict | None) -> "AugmentationSpec":
        if not obj:
            return AugmentationSpec()
        return AugmentationSpec(tuple(obj.get("steps", ())), int(obj.get("seed", 0)))

    def to_obj(self) -> dict:
        return {"steps": [dict(s) for s in self.steps], "seed": self.seed}


def apply_steps(
    features: np.ndarray,
    labels: np.ndarray,
    steps,
    num_classes: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Run the pipeline on flat (n, d) float64 features; returns new arrays."""
    x = np.array(features, dtype=np.float64)
    y = np.array(labels)
    n, d = x.shape
    for step in steps:
        op = step["op"]
        if op == "normalize":
            mean = np.asarray(step["mean"], dtype=np.float64)
            std = np.asarray(step["std"], dtype=np.float64)
            x = (x - mean) / std
        elif op == "gaussian_noise":
            x = x + rng.normal(0.0, 1.0, size=x.shape) * step["sigma"]
        elif op == "feature_dropout":
            keep = rng.random(size=x.shape) >= step["p"]
            x = x * keep
        elif op == "label_noise":
            flip = rng.random(size=n) < step["p"]
            offsets = rng.integers(1, num_classes, size=n)
            y = np.where(flip, (y + offsets) % num_classes, y)
    if not np.all(np.isfinite(x)):
        raise SchemaViolation("/aug", "augmentation produced non-finite features")
    return x, y
