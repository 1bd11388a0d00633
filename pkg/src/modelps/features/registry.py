"""Dataset registry: records, deterministic splits, batch serving, previews.

One JSON document per dataset under ``<store>/datasets``; file-sourced data
is kept alongside as CSV (header row, label column named ``label``).
Synthetic datasets store only their generator spec and are re-materialized
on demand.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import (
    DuplicateDataset,
    EmptySplit,
    LabelOutOfRange,
    SchemaViolation,
    ShapeInconsistent,
    UnknownDataset,
)
from . import synthetic
from .augment import AugmentationSpec, apply_steps

SPLITS = ("train", "val", "test")

# default split fractions: 80/10/10
_TRAIN_FRAC, _VAL_FRAC = 0.8, 0.1


@dataclass(frozen=True)
class DatasetRecord:
    dataset_id: str
    name: str
    kind: str  # vector | image_like
    feature_shape: tuple[int, ...]
    num_classes: int
    splits: dict
    source: str  # bundled_synthetic | file
    similarity_tags: tuple[str, ...] = ()
    generator: dict | None = None

    def flat_dim(self) -> int:
        return int(np.prod(self.feature_shape))

    def to_obj(self) -> dict:
        obj = {
            "schema_version": "1",
            "dataset_id": self.dataset_id,
            "name": self.name,
            "kind": self.kind,
            "feature_shape": list(self.feature_shape),
            "num_classes": self.num_classes,
            "splits": dict(self.splits),
            "source": self.source,
            "similarity_tags": list(self.similarity_tags),
        }
        if self.generator is not None:
            obj["generator"] = self.generator
        return obj

    @staticmethod
    def from_obj(obj: dict) -> "DatasetRecord":
        return DatasetRecord(
            dataset_id=obj["dataset_id"],
            name=obj["name"],
            kind=obj["kind"],
            feature_shape=tuple(obj["feature_shape"]),
            num_classes=obj["num_classes"],
            splits=dict(obj["splits"]),
            source=obj["source"],
            similarity_tags=tuple(obj.get("similarity_tags", ())),
            generator=obj.get("generator"),
        )


@dataclass(frozen=True)
class Batch:
    features: np.ndarray  # (n, *feature_shape) float32
    labels: np.ndarray  # (n,) int64


@dataclass(frozen=True)
class Preview:
    pairs: list  # [(raw, augmented), ...] as float32 arrays
    stats_before: dict  # {"mean": [...], "std": [...]} over the train split
    stats_after: dict


def default_splits(n: int) -> dict:
    train_n = int(n * _TRAIN_FRAC)
    val_n = int(n * _VAL_FRAC)
    return {"train_n": train_n, "val_n": val_n, "test_n": n - train_n - val_n}


def _stable_seed(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:4], "big")


def parse_csv(data: bytes | str) -> tuple[np.ndarray, np.ndarray]:
    """CSV with a header; the ``label`` column holds integer class ids."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ShapeInconsistent("empty CSV") from None
    if "label" not in header:
        raise SchemaViolation("/csv", "no column named 'label'")
    label_idx = header.index("label")
    feature_idx = [i for i in range(len(header)) if i != label_idx]
    features, labels = [], []
    for row_no, row in enumerate(reader):
        if not row:
            continue
        if len(row) != len(header):
            raise ShapeInconsistent(f"row {row_no} has {len(row)} cells, header has {len(header)}")
        try:
            features.append([float(row[i]) for i in feature_idx])
            labels.append(int(float(row[label_idx])))
        except ValueError as exc:
            raise ShapeInconsistent(f"row {row_no}: {exc}") from None
    if not features:
        raise ShapeInconsistent("CSV contains no data rows")
    return np.asarray(features, dtype=np.float32), np.asarray(labels, dtype=np.int64)


def to_csv(features: np.ndarray, labels: np.ndarray) -> str:
    flat = features.reshape(len(features), -1)
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow([f"f{i}" for i in range(flat.shape[1])] + ["label"])
    for row, label in zip(flat, labels):
        writer.writerow([repr(float(v)) for v in row] + [int(label)])
    return out.getvalue()


class FeatureStore:
    """Registry + batch server. Reads are lock-free; registration is serialized."""

    def __init__(self, store_dir: str | Path):
        self.datasets_dir = Path(store_dir) / "datasets"
        self.datasets_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._records: dict[str, DatasetRecord] = {}
        self._data: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        for path in sorted(self.datasets_dir.glob("*.json")):
            record = DatasetRecord.from_obj(json.loads(path.read_text(encoding="utf-8")))
            self._records[record.dataset_id] = record

    # --- registration ---

    def _validate_and_store(
        self, record: DatasetRecord, features: np.ndarray | None, labels: np.ndarray | None
    ) -> str:
        if record.num_classes < 2:
            raise SchemaViolation("/num_classes", "at least 2 classes required")
        if record.splits["train_n"] < 1 or record.splits["val_n"] < 1:
            raise SchemaViolation("/splits", "train and val splits need at least 1 sample")
        if features is not None:
            flat = features.reshape(len(features), -1)
            if flat.shape[1] != record.flat_dim():
                raise ShapeInconsistent(
                    f"features have {flat.shape[1]} values per row, "
                    f"feature_shape {list(record.feature_shape)} needs {record.flat_dim()}"
                )
            total = sum(record.splits.values())
            if total > len(features):
                raise ShapeInconsistent(f"splits need {total} samples, data has {len(features)}")
            if labels is None or len(labels) != len(features):
                raise ShapeInconsistent("labels and features disagree in length")
            if np.any(labels < 0) or np.any(labels >= record.num_classes):
                bad = int(labels[(labels < 0) | (labels >= record.num_classes)][0])
                raise LabelOutOfRange(f"label {bad} outside [0, {record.num_classes})")
        with self._lock:
            existing = self._records.get(record.dataset_id)
            if existing is not None:
                if existing == record:
                    return record.dataset_id
                raise DuplicateDataset(f"dataset id {record.dataset_id!r} already registered differently")
            path = self.datasets_dir / f"{record.dataset_id}.json"
            if record.source == "file":
                data_path = self.datasets_dir / f"{record.dataset_id}.csv"
                data_path.write_text(to_csv(features, labels), encoding="utf-8")
            path.write_text(
                json.dumps(record.to_obj(), separators=(",", ":"), ensure_ascii=False),
                encoding="utf-8",
            )
            self._records[record.dataset_id] = record
            if features is not None:
                self._data[record.dataset_id] = (
                    features.reshape(len(features), -1).astype(np.float32),
                    labels.astype(np.int64),
                )
        return record.dataset_id

    def register_synthetic(
        self,
        name: str,
        spec: dict,
        tags=(),
        dataset_id: str | None = None,
        splits: dict | None = None,
    ) -> str:
        features, labels = synthetic.generate(spec)  # validates the spec
        record = DatasetRecord(
            dataset_id=dataset_id or "d-" + hashlib.sha256(
                (name + json.dumps(spec, sort_keys=True)).encode()).hexdigest()[:10],
            name=name,
            kind="vector",
            feature_shape=synthetic.spec_shape(spec),
            num_classes=synthetic.spec_classes(spec),
            splits=splits or default_splits(len(features)),
            source="bundled_synthetic",
            similarity_tags=tuple(tags),
            generator=spec,
        )
        obs_classes = int(labels.max()) + 1 if len(labels) else 0
        if obs_classes > record.num_classes:
            raise LabelOutOfRange(f"generator produced label {obs_classes - 1}")
        return self._validate_and_store(record, features, labels)

    def register_data(
        self,
        name: str,
        features: np.ndarray,
        labels: np.ndarray,
        num_classes: int,
        tags=(),
        feature_shape=None,
        kind: str = "vector",
        dataset_id: str | None = None,
        splits: dict | None = None,
    ) -> str:
        features = np.asarray(features, dtype=np.float32)
        labels = np.asarray(labels, dtype=np.int64)
        shape = tuple(feature_shape) if feature_shape is not None else tuple(features.shape[1:])
        record = DatasetRecord(
            dataset_id=dataset_id or "d-" + hashlib.sha256(
                name.encode() + features.tobytes() + labels.tobytes()).hexdigest()[:10],
            name=name,
            kind=kind,
            feature_shape=shape,
            num_classes=int(num_classes),
            splits=splits or default_splits(len(features)),
            source="file",
            similarity_tags=tuple(tags),
        )
        return self._validate_and_store(record, features, labels)

    def register_csv(self, name: str, data: bytes | str, num_classes: int, tags=(), **kw) -> str:
        features, labels = parse_csv(data)
        return self.register_data(name, features, labels, num_classes, tags, **kw)

    # --- access ---

    def get(self, dataset_id: str) -> DatasetRecord:
        record = self._records.get(dataset_id)
        if record is None:
            raise UnknownDataset(f"no dataset with id {dataset_id!r}")
        return record

    def find_by_name(self, name: str) -> DatasetRecord | None:
        for record in self._records.values():
            if record.name == name:
                return record
        return None

    def list(self) -> list[DatasetRecord]:
        return sorted(self._records.values(), key=lambda r: r.dataset_id)

    def _load_data(self, record: DatasetRecord) -> tuple[np.ndarray, np.ndarray]:
        cached = self._data.get(record.dataset_id)
        if cached is not None:
            return cached
        if record.generator is not None:
            features, labels = synthetic.generate(record.generator)
        else:
            csv_path = self.datasets_dir / f"{record.dataset_id}.csv"
            if not csv_path.exists():
                raise UnknownDataset(f"data file for {record.dataset_id!r} is missing")
            features, labels = parse_csv(csv_path.read_text(encoding="utf-8"))
        flat = (features.reshape(len(features), -1).astype(np.float32), labels.astype(np.int64))
        with self._lock:
            self._data[record.dataset_id] = flat
        return flat

    def _split_indices(self, record: DatasetRecord, split: str) -> np.ndarray:
        if split not in SPLITS:
            raise SchemaViolation("/split", f"unknown split {split!r}")
        features, _ = self._load_data(record)
        n = len(features)
        seed = record.generator.get("seed", 0) if record.generator else _stable_seed(record.dataset_id)
        perm = np.random.default_rng([int(seed), 0x5EED]).permutation(n)
        train_n, val_n = record.splits["train_n"], record.splits["val_n"]
        if split == "train":
            return perm[:train_n]
        if split == "val":
            return perm[train_n : train_n + val_n]
        return perm[train_n + val_n : train_n + val_n + record.splits["test_n"]]

    def split_arrays(self, dataset_id: str, split: str) -> tuple[np.ndarray, np.ndarray]:
        """Whole split in its deterministic order, flat float32 features."""
        record = self.get(dataset_id)
        features, labels = self._load_data(record)
        idx = self._split_indices(record, split)
        if len(idx) == 0:
            raise EmptySplit(f"split {split!r} of {dataset_id!r} is empty")
        return features[idx], labels[idx]

    def feature_stats(self, dataset_id: str, split: str = "train") -> tuple[list, list]:
        x, _ = self.split_arrays(dataset_id, split)
        mean = np.mean(x, axis=0, dtype=np.float64)
        std = np.std(x, axis=0, dtype=np.float64)
        std = np.where(std <= 0, 1.0, std)
        return mean.tolist(), std.tolist()

    def get_batch(
        self,
        dataset_id: str,
        split: str,
        n: int,
        aug: AugmentationSpec | None = None,
        seed: int = 0,
        replace: bool = False,
    ) -> Batch:
        record = self.get(dataset_id)
        aug = aug or AugmentationSpec()
        x_all, y_all = self.split_arrays(dataset_id, split)
        if n < 1:
            raise SchemaViolation("/n", "batch size must be >= 1")
        if n > len(x_all) and not replace:
            raise SchemaViolation("/n", f"n={n} exceeds split size {len(x_all)}; pass replace=True")
        rng = np.random.default_rng(
            [_stable_seed(dataset_id), SPLITS.index(split), n, int(aug.seed), int(seed)]
        )
        pick = rng.choice(len(x_all), size=n, replace=replace)
        x, y = apply_steps(x_all[pick], y_all[pick], aug.steps, record.num_classes, rng)
        return Batch(
            features=x.astype(np.float32).reshape(n, *record.feature_shape),
            labels=y.astype(np.int64),
        )

    def preview(self, dataset_id: str, aug: AugmentationSpec | None = None, k: int = 5) -> Preview:
        record = self.get(dataset_id)
        aug = aug or AugmentationSpec()
        x_all, y_all = self.split_arrays(dataset_id, "train")
        rng = np.random.default_rng([_stable_seed(dataset_id), int(aug.seed), 0xA06])
        x_aug, _ = apply_steps(x_all, y_all, aug.steps, record.num_classes, rng)

        def stats(arr) -> dict:
            return {
                "mean": np.mean(arr, axis=0, dtype=np.float64).tolist(),
                "std": np.std(arr, axis=0, dtype=np.float64).tolist(),
            }

        k = min(k, len(x_all))
        pairs = [
            (x_all[i].reshape(record.feature_shape), x_aug[i].astype(np.float32).reshape(record.feature_shape))
            for i in range(k)
        ]
        return Preview(pairs=pairs, stats_before=stats(x_all), stats_after=stats(x_aug))
