"""Service configuration with JSON file + environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

from ..errors import InvalidConfig

ENV_STORE = "MODELPS_STORE"
ENV_PORT = "MODELPS_PORT"
ENV_WORKERS = "MODELPS_WORKERS"


@dataclass(frozen=True)
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 7151
    store_dir: str = "modelps-store"
    worker_count: int = 2
    default_validate_budget_s: float = 30.0
    genie_rules_path: str | None = None
    genie_surface_path: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.worker_count < 1:
            raise InvalidConfig("worker_count must be >= 1")

    @staticmethod
    def load(path: str | Path | None = None, **overrides) -> "ApiConfig":
        """File values < environment < explicit overrides."""
        values: dict = {}
        if path:
            values.update(json.loads(Path(path).read_text(encoding="utf-8")))
        if os.environ.get(ENV_STORE):
            values["store_dir"] = os.environ[ENV_STORE]
        if os.environ.get(ENV_PORT):
            values["port"] = int(os.environ[ENV_PORT])
        if os.environ.get(ENV_WORKERS):
            values["worker_count"] = int(os.environ[ENV_WORKERS])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return replace(ApiConfig(), **values)
