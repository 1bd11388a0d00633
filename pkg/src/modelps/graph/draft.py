"""Draft serialization: the JSON wire format shared by editor clients.

The encoding is canonical so drafts round-trip byte-stably: UTF-8, keys
emitted in schema order, no insignificant whitespace. Parsing is strict;
unknown fields are rejected so client and server schemas cannot drift
apart silently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import SchemaViolation
from .layers import KIND_ATTRS, LayerNode
from .model import ModelGraph

SCHEMA_VERSION = "1"

# Canonical key order for (partial) train configs embedded in drafts and
# history records. "graph" is excluded from drafts: the draft's own graph
# is the architecture being edited.
CONFIG_KEYS = (
    "tl_method", "base_model_id", "dataset_id", "source_dataset_id",
    "aug", "lr", "momentum", "epochs", "batch_size", "frozen_layers",
    "kd_temperature", "kd_alpha", "mmd_weight", "boosting_rounds", "seed",
)

AUG_STEP_KEYS = {
    "normalize": ("op", "mean", "std"),
    "gaussian_noise": ("op", "sigma"),
    "feature_dropout": ("op", "p"),
    "label_noise": ("op", "p"),
}


@dataclass(frozen=True)
class Draft:
    """A revisioned snapshot of an in-progress model edit."""

    graph: ModelGraph
    base_model_id: str
    pending_config: dict = field(default_factory=dict)
    revision: int = 0
    author: str = ""


# --- encoding ---


def node_to_obj(node: LayerNode) -> dict:
    attrs = {k: node.attrs[k] for k in KIND_ATTRS[node.kind]}
    return {
        "id": node.id,
        "name": node.name,
        "kind": node.kind,
        "attrs": attrs,
        "frozen": node.frozen,
        "reinit": node.reinit,
    }


def graph_to_obj(graph: ModelGraph) -> dict:
    return {
        "input_shape": list(graph.input_shape),
        "nodes": [node_to_obj(n) for n in graph.nodes],
        "edges": [[a, b] for a, b in graph.edges],
    }


def _aug_to_obj(aug: dict) -> dict:
    steps = []
    for step in aug.get("steps", []):
        op = step.get("op")
        keys = AUG_STEP_KEYS.get(op, tuple(step))
        steps.append({k: step[k] for k in keys if k in step})
    return {"steps": steps, "seed": aug.get("seed", 0)}


def config_to_obj(config: dict) -> dict:
    out = {}
    for key in CONFIG_KEYS:
        if key in config:
            value = config[key]
            out[key] = _aug_to_obj(value) if key == "aug" and isinstance(value, dict) else value
    return out


def draft_to_obj(draft: Draft) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "base_model_id": draft.base_model_id,
        "revision": draft.revision,
        "author": draft.author,
        "graph": graph_to_obj(draft.graph),
        "pending_config": config_to_obj(draft.pending_config),
    }


def serialize_draft(draft: Draft) -> bytes:
    return json.dumps(draft_to_obj(draft), separators=(",", ":"), ensure_ascii=False).encode("utf-8")


# --- decoding ---


def _expect(obj: dict, key: str, types, path: str):
    if key not in obj:
        raise SchemaViolation(f"{path}/{key}", "required field missing")
    value = obj[key]
    if types is not None and not isinstance(value, types):
        raise SchemaViolation(f"{path}/{key}", f"expected {types}, got {type(value).__name__}")
    if isinstance(value, bool) and types is not None and bool not in (types if isinstance(types, tuple) else (types,)):
        raise SchemaViolation(f"{path}/{key}", "unexpected boolean")
    return value


def _reject_unknown(obj: dict, allowed, path: str):
    for key in obj:
        if key not in allowed:
            raise SchemaViolation(f"{path}/{key}", "unknown field")


def node_from_obj(obj, path: str) -> LayerNode:
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "node must be an object")
    _reject_unknown(obj, ("id", "name", "kind", "attrs", "frozen", "reinit"), path)
    node_id = _expect(obj, "id", str, path)
    name = _expect(obj, "name", str, path)
    kind = _expect(obj, "kind", str, path)
    attrs = _expect(obj, "attrs", dict, path)
    frozen = _expect(obj, "frozen", bool, path)
    reinit = obj.get("reinit", False)
    if not isinstance(reinit, bool):
        raise SchemaViolation(f"{path}/reinit", "expected boolean")
    try:
        return LayerNode(node_id, name, kind, dict(attrs), frozen, reinit)
    except SchemaViolation as exc:
        raise SchemaViolation(f"{path}/{exc.path}", exc.reason) from exc


def graph_from_obj(obj, path: str = "/graph") -> ModelGraph:
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "graph must be an object")
    _reject_unknown(obj, ("input_shape", "nodes", "edges"), path)
    input_shape = _expect(obj, "input_shape", list, path)
    for i, d in enumerate(input_shape):
        if not isinstance(d, int) or isinstance(d, bool) or d <= 0:
            raise SchemaViolation(f"{path}/input_shape/{i}", "dimensions must be positive integers")
    raw_nodes = _expect(obj, "nodes", list, path)
    nodes = tuple(node_from_obj(n, f"{path}/nodes/{i}") for i, n in enumerate(raw_nodes))
    raw_edges = _expect(obj, "edges", list, path)
    edges = []
    for i, e in enumerate(raw_edges):
        if not isinstance(e, list) or len(e) != 2 or not all(isinstance(x, str) for x in e):
            raise SchemaViolation(f"{path}/edges/{i}", "edge must be a [from, to] string pair")
        edges.append((e[0], e[1]))
    return ModelGraph(nodes, tuple(edges), tuple(input_shape))


def config_from_obj(obj, path: str = "/pending_config") -> dict:
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "config must be an object")
    _reject_unknown(obj, CONFIG_KEYS, path)
    out = dict(obj)
    if "aug" in out:
        aug = out["aug"]
        if not isinstance(aug, dict):
            raise SchemaViolation(f"{path}/aug", "augmentation spec must be an object")
        _reject_unknown(aug, ("steps", "seed"), f"{path}/aug")
        steps = aug.get("steps", [])
        if not isinstance(steps, list):
            raise SchemaViolation(f"{path}/aug/steps", "steps must be a list")
        for i, step in enumerate(steps):
            if not isinstance(step, dict) or "op" not in step:
                raise SchemaViolation(f"{path}/aug/steps/{i}", "step must be an object with an op")
            if step["op"] not in AUG_STEP_KEYS:
                raise SchemaViolation(f"{path}/aug/steps/{i}/op", f"unknown op {step['op']!r}")
            _reject_unknown(step, AUG_STEP_KEYS[step["op"]], f"{path}/aug/steps/{i}")
    return out


def draft_from_obj(obj) -> Draft:
    if not isinstance(obj, dict):
        raise SchemaViolation("/", "payload must be an object")
    _reject_unknown(
        obj,
        ("schema_version", "base_model_id", "revision", "author", "graph", "pending_config"),
        "",
    )
    version = _expect(obj, "schema_version", str, "")
    if version != SCHEMA_VERSION:
        raise SchemaViolation("/schema_version", f"unsupported version {version!r}")
    base_model_id = _expect(obj, "base_model_id", str, "")
    revision = _expect(obj, "revision", int, "")
    if revision < 0:
        raise SchemaViolation("/revision", "revision must be non-negative")
    author = _expect(obj, "author", str, "")
    graph = graph_from_obj(_expect(obj, "graph", dict, ""))
    pending = config_from_obj(_expect(obj, "pending_config", dict, ""))
    return Draft(graph, base_model_id, pending, revision, author)


def parse_draft(payload: bytes | str) -> Draft:
    if isinstance(payload, bytes):
        try:
            payload = payload.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaViolation("/", "payload is not valid UTF-8") from exc
    try:
        obj = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("/", f"payload is not valid JSON: {exc.msg}") from exc
    return draft_from_obj(obj)
