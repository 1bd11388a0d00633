"""Rule table, augmentation presets, and response-surface constants.

All values are data, overridable by JSON files named in the service config,
so deployments can retune the recommendation behavior without code changes.
"""

from __future__ import annotations

import json
from pathlib import Path

# method selection rules, evaluated in order:
#   1. edge deployment OR a latency SLO at/below latency_slo_ms -> knowledge_distill
#   2. target train split under small_dataset_threshold with related source tags -> tradaboost
#   3. source tag overlap >= fine_tune_overlap -> fine_tune
#   4. otherwise -> mmd_adapt
DEFAULT_RULES = {
    "latency_slo_ms": 1.0,
    "small_dataset_threshold": 200,
    "fine_tune_overlap": 0.5,
    "insufficient_threshold": None,  # None: use the request's top_k
}

# surface: accuracy = clamp(base + overlap_coeff*overlap
#                           - lr_coeff*(log10(lr) - lr_center_log10)^2
#                           - frozen_coeff*|K - K*| + aug_bonus, 0, 1)
# with K* = floor(parameterized_layers / 2)
DEFAULT_SURFACE = {
    "lr_center_log10": -2.5,
    "lr_coeff": 0.04,
    "overlap_coeff": 0.1,
    "frozen_coeff": 0.02,
    "fallback_base_accuracy": 0.5,
    "latency_a": 1.0,
    "latency_b": 0.05,
    "train_time_per_epoch_param": 1e-7,
}

# named augmentation recipes; "normalize" is materialized with the target
# dataset's train statistics when a config is built
AUG_PRESETS: dict[str, list] = {
    "none": [],
    "normalize": [{"op": "normalize"}],
    "noise01": [{"op": "gaussian_noise", "sigma": 0.1}],
    "noise03": [{"op": "gaussian_noise", "sigma": 0.3}],
    "noise05": [{"op": "gaussian_noise", "sigma": 0.5}],
    "drop05": [{"op": "feature_dropout", "p": 0.05}],
    "drop10": [{"op": "feature_dropout", "p": 0.1}],
    "norm_noise": [{"op": "normalize"}, {"op": "gaussian_noise", "sigma": 0.1}],
    "norm_drop": [{"op": "normalize"}, {"op": "feature_dropout", "p": 0.05}],
    "label01": [{"op": "label_noise", "p": 0.01}],
}

# surface bonus per preset signature; "normalize" is the analytic best
AUG_BONUS = {
    "none": 0.0,
    "normalize": 0.02,
    "gaussian_noise:0.1": 0.01,
    "gaussian_noise:0.3": 0.005,
    "gaussian_noise:0.5": -0.01,
    "feature_dropout:0.05": 0.008,
    "feature_dropout:0.1": 0.004,
    "normalize+gaussian_noise:0.1": 0.015,
    "normalize+feature_dropout:0.05": 0.012,
    "label_noise:0.01": -0.005,
}


def step_signature(step: dict) -> str:
    op = step["op"]
    if op == "normalize":
        return "normalize"
    if op == "gaussian_noise":
        return f"gaussian_noise:{step['sigma']:g}"
    return f"{op}:{step['p']:g}"


def aug_signature(steps) -> str:
    if not steps:
        return "none"
    return "+".join(step_signature(s) for s in steps)


def load_config(path: str | Path | None, defaults: dict) -> dict:
    merged = dict(defaults)
    if path:
        merged.update(json.loads(Path(path).read_text(encoding="utf-8")))
    return merged
