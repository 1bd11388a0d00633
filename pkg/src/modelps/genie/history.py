"""Append-only training history: one JSON line per (config, report) pair."""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path

from ..errors import StoreCorrupt
from ..training.config import TrainConfig
from ..training.validator import ValidationReport
from .types import HistoryRecord


class HistoryLog:
    """The relation the searcher queries. Appends are serialized; reads hand
    out an immutable snapshot list."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._records: list[HistoryRecord] = []
        if self.path.exists():
            for line_no, line in enumerate(self.path.read_text(encoding="utf-8").splitlines()):
                if not line.strip():
                    continue
                try:
                    self._records.append(HistoryRecord.from_obj(json.loads(line)))
                except Exception as exc:
                    raise StoreCorrupt(str(self.path), f"line {line_no}: {exc}") from exc

    def append(self, config: TrainConfig, report: ValidationReport, timestamp: float | None = None) -> HistoryRecord:
        record = HistoryRecord(config, report, timestamp if timestamp is not None else time.time())
        line = json.dumps(record.to_obj(), separators=(",", ":"), ensure_ascii=False)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
            self._records.append(record)
        return record

    def records(self) -> list[HistoryRecord]:
        with self._lock:
            return list(self._records)

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)
