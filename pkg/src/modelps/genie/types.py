"""Request/response types for the recommendation engine."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import SchemaViolation
from ..training.config import TrainConfig
from ..training.validator import ValidationReport

METRICS = ("accuracy", "latency_ms", "train_time_s", "params")
DIRECTIONS = ("maximize", "minimize")
OPS = (">=", "<=")

_METRIC_ATTRS = {
    "accuracy": "accuracy",
    "latency_ms": "inference_latency_ms",
    "train_time_s": "train_time_s",
    "params": "params",
}


def metric_value(report: ValidationReport, metric: str) -> float:
    if metric not in METRICS:
        raise SchemaViolation("/metric", f"unknown metric {metric!r}")
    return float(getattr(report, _METRIC_ATTRS[metric]))


@dataclass(frozen=True)
class Constraint:
    metric: str
    op: str  # ">=" | "<="
    value: float

    def __post_init__(self):
        if self.metric not in METRICS:
            raise SchemaViolation("/constraints/metric", f"unknown metric {self.metric!r}")
        if self.op not in OPS:
            raise SchemaViolation("/constraints/op", f"op must be one of {OPS}")

    def satisfied_by(self, report: ValidationReport) -> bool:
        value = metric_value(report, self.metric)
        return value >= self.value if self.op == ">=" else value <= self.value

    def to_obj(self) -> dict:
        return {"metric": self.metric, "op": self.op, "value": self.value}

    @staticmethod
    def from_obj(obj: dict) -> "Constraint":
        return Constraint(obj["metric"], obj["op"], obj["value"])


@dataclass(frozen=True)
class Target:
    metric: str
    direction: str  # maximize | minimize

    def __post_init__(self):
        if self.metric not in METRICS:
            raise SchemaViolation("/targets/metric", f"unknown metric {self.metric!r}")
        if self.direction not in DIRECTIONS:
            raise SchemaViolation("/targets/direction", f"direction must be one of {DIRECTIONS}")

    def to_obj(self) -> dict:
        return {"metric": self.metric, "direction": self.direction}

    @staticmethod
    def from_obj(obj: dict) -> "Target":
        return Target(obj["metric"], obj["direction"])


@dataclass(frozen=True)
class GenieRequest:
    task: str
    dataset_id: str
    deployment: str = "cloud"  # cloud | edge
    constraints: tuple = ()
    targets: tuple = ()  # ordered, primary first
    top_k: int = 5
    explore_budget: int = 50
    tl_method: str | None = None  # explicit choice overrides the rule table
    seed: int | None = None

    def __post_init__(self):
        if self.deployment not in ("cloud", "edge"):
            raise SchemaViolation("/deployment", "deployment must be cloud or edge")
        if self.top_k < 1:
            raise SchemaViolation("/top_k", "top_k must be >= 1")
        if not self.targets:
            raise SchemaViolation("/targets", "at least one target is required")
        if self.explore_budget < 1:
            raise SchemaViolation("/explore_budget", "explore_budget must be >= 1")

    def to_obj(self) -> dict:
        return {
            "task": self.task,
            "dataset_id": self.dataset_id,
            "deployment": self.deployment,
            "constraints": [c.to_obj() for c in self.constraints],
            "targets": [t.to_obj() for t in self.targets],
            "top_k": self.top_k,
            "explore_budget": self.explore_budget,
            "tl_method": self.tl_method,
            "seed": self.seed,
        }

    @staticmethod
    def from_obj(obj: dict) -> "GenieRequest":
        if not isinstance(obj, dict):
            raise SchemaViolation("/", "request must be an object")
        for required in ("task", "dataset_id"):
            if required not in obj:
                raise SchemaViolation(f"/{required}", "required field missing")
        return GenieRequest(
            task=obj["task"],
            dataset_id=obj["dataset_id"],
            deployment=obj.get("deployment", "cloud"),
            constraints=tuple(Constraint.from_obj(c) for c in obj.get("constraints", [])),
            targets=tuple(Target.from_obj(t) for t in obj.get("targets", [])),
            top_k=obj.get("top_k", 5),
            explore_budget=obj.get("explore_budget", 50),
            tl_method=obj.get("tl_method"),
            seed=obj.get("seed"),
        )


@dataclass(frozen=True)
class HistoryRecord:
    config: TrainConfig
    report: ValidationReport
    timestamp: float

    def to_obj(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "config": self.config.to_obj(),
            "report": self.report.to_obj(),
        }

    @staticmethod
    def from_obj(obj: dict) -> "HistoryRecord":
        return HistoryRecord(
            config=TrainConfig.from_obj(obj["config"]),
            report=ValidationReport.from_obj(obj["report"]),
            timestamp=obj["timestamp"],
        )


@dataclass(frozen=True)
class SearchSpace:
    base_model_ids: tuple
    dataset_ids: tuple
    aug_presets: tuple
    tl_method: str
    lr_range: tuple = (1e-4, 1e-1)
    frozen_layers_range: tuple = (0, 0)
    epochs_range: tuple = (1, 20)

    def to_obj(self) -> dict:
        return {
            "base_model_ids": list(self.base_model_ids),
            "dataset_ids": list(self.dataset_ids),
            "aug_presets": list(self.aug_presets),
            "tl_method": self.tl_method,
            "lr_range": list(self.lr_range),
            "frozen_layers_range": list(self.frozen_layers_range),
            "epochs_range": list(self.epochs_range),
        }


@dataclass(frozen=True)
class RecommendationEntry:
    config: TrainConfig
    report: ValidationReport
    provenance: str  # history | explored

    def to_obj(self) -> dict:
        return {
            "config": self.config.to_obj(),
            "report": self.report.to_obj(),
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class Recommendation:
    entries: tuple
    tl_method: str
    explored: bool

    def to_obj(self) -> dict:
        return {
            "entries": [e.to_obj() for e in self.entries],
            "tl_method": self.tl_method,
            "explored": self.explored,
        }


@dataclass
class Trial:
    index: int
    config: TrainConfig
    report: ValidationReport | None = None
    error: str | None = None
    stage_records: list = field(default_factory=list)  # extra (config, report) pairs
