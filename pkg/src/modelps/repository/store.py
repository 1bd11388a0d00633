"""Model repository: published records, drafts, lineage.

Documents are one JSON file each under the store directory:
``models/<id>.json``, ``drafts/<id>.json``. Writes go through a temp file +
rename, and every mutation is guarded by a lock, so a failed call never
leaves a half-written document behind.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass, replace
from pathlib import Path

from ..errors import (
    DanglingParent,
    InvalidGraph,
    LineageCycle,
    MissingMetadata,
    ModelPSError,
    SchemaViolation,
    StaleRevision,
    StoreCorrupt,
    UnknownDraft,
    UnknownModel,
)
from ..graph import Draft, ModelGraph, count_params
from ..graph.draft import draft_from_obj, draft_to_obj, graph_from_obj, graph_to_obj
from .blobs import BlobStore, sha256_hex

TASKS = ("image_classification", "text_classification", "tabular_classification")

METADATA_REQUIRED = ("pretrained_dataset", "accuracy", "latency_ms")


@dataclass(frozen=True)
class ModelMeta:
    pretrained_dataset: str
    accuracy: float
    latency_ms: float
    params: int
    parent_model_id: str | None = None

    def to_obj(self) -> dict:
        obj = {
            "pretrained_dataset": self.pretrained_dataset,
            "accuracy": self.accuracy,
            "latency_ms": self.latency_ms,
            "params": self.params,
        }
        if self.parent_model_id is not None:
            obj["parent_model_id"] = self.parent_model_id
        return obj


@dataclass(frozen=True)
class ModelRecord:
    model_id: str
    name: str
    task: str
    graph: ModelGraph
    weights_ref: str
    metadata: ModelMeta
    status: str = "published"
    created_at: str = ""
    updated_at: str = ""
    author: str = ""

    def to_obj(self) -> dict:
        return {
            "schema_version": "1",
            "model_id": self.model_id,
            "name": self.name,
            "task": self.task,
            "graph": graph_to_obj(self.graph),
            "weights_ref": self.weights_ref,
            "metadata": self.metadata.to_obj(),
            "status": self.status,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "author": self.author,
        }

    @staticmethod
    def from_obj(obj: dict) -> "ModelRecord":
        meta = obj["metadata"]
        return ModelRecord(
            model_id=obj["model_id"],
            name=obj["name"],
            task=obj["task"],
            graph=graph_from_obj(obj["graph"]),
            weights_ref=obj["weights_ref"],
            metadata=ModelMeta(
                pretrained_dataset=meta["pretrained_dataset"],
                accuracy=meta["accuracy"],
                latency_ms=meta["latency_ms"],
                params=meta["params"],
                parent_model_id=meta.get("parent_model_id"),
            ),
            status=obj.get("status", "published"),
            created_at=obj.get("created_at", ""),
            updated_at=obj.get("updated_at", ""),
            author=obj.get("author", ""),
        )


@dataclass(frozen=True)
class Query:
    task: str | None = None
    name_contains: str | None = None
    min_accuracy: float | None = None
    max_latency_ms: float | None = None
    parent_model_id: str | None = None
    sort: str = "created_at"
    descending: bool = False
    limit: int | None = None


_SORT_KEYS = {
    "created_at": lambda r: r.created_at,
    "updated_at": lambda r: r.updated_at,
    "accuracy": lambda r: r.metadata.accuracy,
    "latency_ms": lambda r: r.metadata.latency_ms,
    "params": lambda r: r.metadata.params,
    "name": lambda r: r.name,
    "model_id": lambda r: r.model_id,
}


def matches(record: ModelRecord, query: Query) -> bool:
    if query.task is not None and record.task != query.task:
        return False
    if query.name_contains is not None and query.name_contains not in record.name:
        return False
    if query.min_accuracy is not None and record.metadata.accuracy < query.min_accuracy:
        return False
    if query.max_latency_ms is not None and record.metadata.latency_ms > query.max_latency_ms:
        return False
    if query.parent_model_id is not None and record.metadata.parent_model_id != query.parent_model_id:
        return False
    return True


def run_query(records: list[ModelRecord], query: Query) -> list[ModelRecord]:
    """Filter + deterministic sort (sort key, then model_id) + limit."""
    if query.sort not in _SORT_KEYS:
        raise SchemaViolation("/sort", f"unknown sort key {query.sort!r}")
    hits = [r for r in records if matches(r, query)]
    hits.sort(key=lambda r: r.model_id)
    hits.sort(key=_SORT_KEYS[query.sort], reverse=query.descending)
    if query.limit is not None:
        hits = hits[: query.limit]
    return hits


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()) + f".{int(time.time_ns() % 1_000_000_000 // 1000):06d}Z"


def _write_json(path: Path, obj: dict) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, separators=(",", ":"), ensure_ascii=False)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise StoreCorrupt(str(path), str(exc)) from exc


class ModelRepository:
    """Shared store of published models and collaborative drafts."""

    def __init__(self, store_dir: str | Path):
        self.store_dir = Path(store_dir)
        self.models_dir = self.store_dir / "models"
        self.drafts_dir = self.store_dir / "drafts"
        for d in (self.models_dir, self.drafts_dir):
            d.mkdir(parents=True, exist_ok=True)
        self.blobs = BlobStore(self.store_dir / "blobs")
        self._lock = threading.RLock()
        self._records: dict[str, ModelRecord] | None = None

    # --- models ---

    def _load_records(self) -> dict[str, ModelRecord]:
        if self._records is None:
            records = {}
            for path in sorted(self.models_dir.glob("*.json")):
                obj = _read_json(path)
                try:
                    record = ModelRecord.from_obj(obj)
                except (KeyError, ModelPSError) as exc:
                    raise StoreCorrupt(str(path), str(exc)) from exc
                records[record.model_id] = record
            self._records = records
        return self._records

    @staticmethod
    def content_id(graph: ModelGraph, weights_ref: str, metadata: ModelMeta) -> str:
        payload = json.dumps(
            {"graph": graph_to_obj(graph), "weights": weights_ref, "metadata": metadata.to_obj()},
            separators=(",", ":"),
            sort_keys=True,
        ).encode("utf-8")
        return "m-" + sha256_hex(payload)[:12]

    def publish(
        self,
        *,
        name: str,
        task: str,
        graph: ModelGraph,
        metadata: dict,
        weights: bytes,
        author: str = "",
    ) -> str:
        if task not in TASKS:
            raise SchemaViolation("/task", f"unknown task {task!r}")
        try:
            graph.validate()
        except ModelPSError as exc:
            raise InvalidGraph(f"graph does not validate: {exc.message}") from exc
        for fieldname in METADATA_REQUIRED:
            if metadata.get(fieldname) is None:
                raise MissingMetadata(fieldname)
        accuracy = metadata["accuracy"]
        if not 0.0 <= accuracy <= 1.0:
            raise SchemaViolation("/metadata/accuracy", "accuracy must lie in [0, 1]")
        if metadata["latency_ms"] < 0:
            raise SchemaViolation("/metadata/latency_ms", "latency must be non-negative")
        meta = ModelMeta(
            pretrained_dataset=metadata["pretrained_dataset"],
            accuracy=float(accuracy),
            latency_ms=float(metadata["latency_ms"]),
            params=int(metadata.get("params", count_params(graph))),
            parent_model_id=metadata.get("parent_model_id"),
        )
        with self._lock:
            records = self._load_records()
            if meta.parent_model_id is not None and meta.parent_model_id not in records:
                raise DanglingParent(f"parent model {meta.parent_model_id!r} does not exist")
            weights_ref = self.blobs.put(weights)
            model_id = self.content_id(graph, weights_ref, meta)
            if model_id in records:
                return model_id  # idempotent re-publish of identical content
            now = _now()
            record = ModelRecord(
                model_id=model_id,
                name=name,
                task=task,
                graph=graph,
                weights_ref=weights_ref,
                metadata=meta,
                status="published",
                created_at=now,
                updated_at=now,
                author=author,
            )
            _write_json(self.models_dir / f"{model_id}.json", record.to_obj())
            records[model_id] = record
        return model_id

    def get(self, model_id: str) -> ModelRecord:
        with self._lock:
            record = self._load_records().get(model_id)
        if record is None:
            raise UnknownModel(f"no model with id {model_id!r}")
        return record

    def retrieve(self, query: Query | None = None) -> list[ModelRecord]:
        with self._lock:
            records = list(self._load_records().values())
        return run_query(records, query or Query())

    def weights(self, model_id: str) -> bytes:
        record = self.get(model_id)
        return self.blobs.get(record.weights_ref)

    def lineage(self, model_id: str) -> list[ModelRecord]:
        chain = [self.get(model_id)]
        seen = {model_id}
        while chain[0].metadata.parent_model_id is not None:
            parent_id = chain[0].metadata.parent_model_id
            if parent_id in seen:
                raise LineageCycle(f"lineage of {model_id!r} revisits {parent_id!r}")
            chain.insert(0, self.get(parent_id))
            seen.add(parent_id)
        return chain

    # --- drafts ---

    def save_draft(self, draft: Draft, draft_id: str | None = None) -> str:
        try:
            draft.graph.validate()
        except ModelPSError as exc:
            raise InvalidGraph(f"draft graph does not validate: {exc.message}") from exc
        with self._lock:
            if draft_id is None:
                draft_id = "dr-" + uuid.uuid4().hex[:12]
                stored_revision = None
            else:
                stored = self._read_draft_doc(draft_id)
                stored_revision = stored["draft"]["revision"]
                if draft.revision != stored_revision:
                    raise StaleRevision(draft.revision, stored_revision)
            bumped = replace(draft, revision=draft.revision + 1)
            doc = {
                "schema_version": "1",
                "draft_id": draft_id,
                "owner": draft.author,
                "last_saved": _now(),
                "draft": draft_to_obj(bumped),
            }
            _write_json(self.drafts_dir / f"{draft_id}.json", doc)
        return draft_id

    def _read_draft_doc(self, draft_id: str) -> dict:
        path = self.drafts_dir / f"{draft_id}.json"
        if not path.exists():
            raise UnknownDraft(f"no draft with id {draft_id!r}")
        return _read_json(path)

    def load_draft(self, draft_id: str) -> Draft:
        with self._lock:
            doc = self._read_draft_doc(draft_id)
        try:
            return draft_from_obj(doc["draft"])
        except (KeyError, SchemaViolation) as exc:
            raise StoreCorrupt(str(self.drafts_dir / f"{draft_id}.json"), str(exc)) from exc

    def list_drafts(self) -> list[dict]:
        with self._lock:
            docs = [_read_json(p) for p in sorted(self.drafts_dir.glob("*.json"))]
        return [
            {"draft_id": d["draft_id"], "owner": d.get("owner", ""), "last_saved": d.get("last_saved", "")}
            for d in docs
        ]

    def state_fingerprint(self) -> str:
        """Hash of every document + blob name; used to verify mutation atomicity."""
        parts = []
        for sub in ("models", "drafts", "blobs", "datasets"):
            base = self.store_dir / sub
            if not base.is_dir():
                continue
            for path in sorted(base.iterdir()):
                if path.name.startswith(".tmp-"):
                    continue
                parts.append(path.name.encode() + b":" + sha256_hex(path.read_bytes()).encode())
        return sha256_hex(b"|".join(parts))
