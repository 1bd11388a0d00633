"""Training run specification and its canonical JSON form."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

from ..errors import InvalidConfig, SchemaViolation
from ..features.augment import AugmentationSpec
from ..graph import ModelGraph
from ..graph.draft import CONFIG_KEYS, config_from_obj, config_to_obj, graph_from_obj, graph_to_obj

TL_METHODS = ("fine_tune", "knowledge_distill", "tradaboost", "mmd_adapt", "from_scratch")


@dataclass(frozen=True)
class TrainConfig:
    tl_method: str = "fine_tune"
    base_model_id: str | None = None
    dataset_id: str = ""
    source_dataset_id: str | None = None
    graph: ModelGraph | None = None  # architecture override (draft edits, KD students)
    aug: AugmentationSpec = field(default_factory=AugmentationSpec)
    lr: float = 0.05
    momentum: float = 0.0
    epochs: int = 5
    batch_size: int = 32
    frozen_layers: int = 0
    kd_temperature: float = 2.0
    kd_alpha: float = 0.5
    mmd_weight: float = 1.0
    boosting_rounds: int = 5
    seed: int = 0

    def validate(self) -> "TrainConfig":
        if self.tl_method not in TL_METHODS:
            raise InvalidConfig(f"unknown tl_method {self.tl_method!r}")
        if not self.dataset_id:
            raise InvalidConfig("dataset_id is required")
        if not self.lr > 0:
            raise InvalidConfig("lr must be > 0")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidConfig("momentum must lie in [0, 1)")
        if self.epochs < 1:
            raise InvalidConfig("epochs must be >= 1")
        if self.batch_size < 1:
            raise InvalidConfig("batch_size must be >= 1")
        if self.frozen_layers < 0:
            raise InvalidConfig("frozen_layers must be >= 0")
        if not self.kd_temperature > 0:
            raise InvalidConfig("kd_temperature must be > 0")
        if not 0.0 <= self.kd_alpha <= 1.0:
            raise InvalidConfig("kd_alpha must lie in [0, 1]")
        if self.mmd_weight < 0:
            raise InvalidConfig("mmd_weight must be >= 0")
        if self.boosting_rounds < 1:
            raise InvalidConfig("boosting_rounds must be >= 1")
        if self.tl_method != "from_scratch" and self.base_model_id is None:
            raise InvalidConfig(f"{self.tl_method} requires base_model_id")
        if self.tl_method == "from_scratch" and self.base_model_id is None and self.graph is None:
            raise InvalidConfig("from_scratch requires base_model_id or an explicit graph")
        return self

    def with_epochs(self, epochs: int) -> "TrainConfig":
        return replace(self, epochs=epochs)

    def to_obj(self) -> dict:
        obj: dict = {"tl_method": self.tl_method}
        if self.base_model_id is not None:
            obj["base_model_id"] = self.base_model_id
        obj["dataset_id"] = self.dataset_id
        if self.source_dataset_id is not None:
            obj["source_dataset_id"] = self.source_dataset_id
        obj["aug"] = self.aug.to_obj()
        obj.update(
            lr=self.lr, momentum=self.momentum, epochs=self.epochs,
            batch_size=self.batch_size, frozen_layers=self.frozen_layers,
            kd_temperature=self.kd_temperature, kd_alpha=self.kd_alpha,
            mmd_weight=self.mmd_weight, boosting_rounds=self.boosting_rounds,
            seed=self.seed,
        )
        ordered = config_to_obj(obj)
        if self.graph is not None:
            ordered["graph"] = graph_to_obj(self.graph)
        return ordered

    @staticmethod
    def from_obj(obj: dict, path: str = "/config") -> "TrainConfig":
        if not isinstance(obj, dict):
            raise SchemaViolation(path, "config must be an object")
        obj = dict(obj)
        graph_obj = obj.pop("graph", None)
        obj = config_from_obj(obj, path)
        defaults = TrainConfig()
        known = {k: obj[k] for k in CONFIG_KEYS if k in obj}
        if "aug" in known:
            known["aug"] = AugmentationSpec.from_obj(known["aug"])
        graph = graph_from_obj(graph_obj, f"{path}/graph") if graph_obj is not None else None
        return replace(defaults, graph=graph, **known)

    def hash(self) -> str:
        payload = json.dumps(self.to_obj(), separators=(",", ":"), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]
