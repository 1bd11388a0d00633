"""Deterministic response surface: the fast evaluator for non-executable
graphs and for exercising the search machinery without real training.

accuracy = clamp(base(model) + overlap_coeff * tag_overlap
                 - lr_coeff * (log10(lr) - lr_center)^2
                 - frozen_coeff * |K - K*| + aug_bonus, 0, 1)

with K* = floor(parameterized_layers / 2); the analytic maximum sits at
lr = 10^lr_center, K = K*, and the best-bonus augmentation preset.
"""

from __future__ import annotations

import math

from ..graph import count_params
from ..training.config import TrainConfig
from ..training.validator import ValidationReport
from .defaults import AUG_BONUS, DEFAULT_SURFACE, aug_signature
from .rules import tag_overlap


class SimulatedSurface:
    def __init__(self, repo, features, constants: dict | None = None, bonus: dict | None = None):
        self.repo = repo
        self.features = features
        self.constants = dict(constants or DEFAULT_SURFACE)
        self.bonus = dict(bonus or AUG_BONUS)

    def _base_accuracy(self, config: TrainConfig) -> float:
        if config.base_model_id:
            return self.repo.get(config.base_model_id).metadata.accuracy
        return self.constants["fallback_base_accuracy"]

    def _overlap(self, config: TrainConfig) -> float:
        try:
            target = self.features.get(config.dataset_id)
        except Exception:
            return 0.0
        if not config.base_model_id:
            return 0.0
        source_name = self.repo.get(config.base_model_id).metadata.pretrained_dataset
        source = self.features.find_by_name(source_name)
        if source is None:
            return 0.0
        return tag_overlap(target.similarity_tags, source.similarity_tags)

    def graph_for(self, config: TrainConfig):
        if config.graph is not None:
            return config.graph
        return self.repo.get(config.base_model_id).graph

    def accuracy(self, config: TrainConfig) -> float:
        c = self.constants
        graph = self.graph_for(config)
        layers = len(graph.parameterized_nodes())
        k_star = layers // 2
        value = (
            self._base_accuracy(config)
            + c["overlap_coeff"] * self._overlap(config)
            - c["lr_coeff"] * (math.log10(config.lr) - c["lr_center_log10"]) ** 2
            - c["frozen_coeff"] * abs(config.frozen_layers - k_star)
            + self.bonus.get(aug_signature(config.aug.steps), 0.0)
        )
        return min(max(value, 0.0), 1.0)

    def evaluate(self, config: TrainConfig) -> ValidationReport:
        c = self.constants
        graph = self.graph_for(config)
        n_params = count_params(graph)
        return ValidationReport(
            accuracy=self.accuracy(config),
            train_time_s=config.epochs * n_params * c["train_time_per_epoch_param"],
            inference_latency_ms=c["latency_a"] * n_params * 1e-6 + c["latency_b"],
            params=n_params,
            epochs_completed=config.epochs,
            config=config.to_obj(),
            evaluator="simulated",
        )

    __call__ = evaluate
