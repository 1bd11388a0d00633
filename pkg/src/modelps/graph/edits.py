"""Atomic graph edits: each action either yields a valid graph or raises.

Edits never mutate the input graph. A failed edit leaves no trace; the
caller keeps the original value.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import GraphError, InvalidResult, ModelPSError, RemoveWouldOrphan
from .layers import LayerNode
from .model import ModelGraph


@dataclass(frozen=True)
class SetAttr:
    node_id: str
    key: str
    value: object


@dataclass(frozen=True)
class InsertNode:
    node: LayerNode
    after_id: str


@dataclass(frozen=True)
class RemoveNode:
    node_id: str
    reconnect: bool = True


@dataclass(frozen=True)
class ReplaceHead:
    new_out_features: int


@dataclass(frozen=True)
class SetFrozenPrefix:
    k: int


EditAction = SetAttr | InsertNode | RemoveNode | ReplaceHead | SetFrozenPrefix


def _set_attr(graph: ModelGraph, action: SetAttr) -> ModelGraph:
    target = graph.node(action.node_id)
    updated = target.with_attrs(**{action.key: action.value})
    nodes = tuple(updated if n.id == target.id else n for n in graph.nodes)
    return ModelGraph(nodes, graph.edges, graph.input_shape)


def _insert_node(graph: ModelGraph, action: InsertNode) -> ModelGraph:
    if graph.has_node(action.node.id):
        raise GraphError(f"node id {action.node.id!r} already exists")
    anchor = graph.node(action.after_id)  # raises UnknownNode
    succs = graph.successors(anchor.id)
    edges = [e for e in graph.edges if not (e[0] == anchor.id and e[1] in succs)]
    edges.append((anchor.id, action.node.id))
    edges.extend((action.node.id, s) for s in succs)
    idx = next(i for i, n in enumerate(graph.nodes) if n.id == anchor.id)
    nodes = graph.nodes[: idx + 1] + (action.node,) + graph.nodes[idx + 1 :]
    return ModelGraph(nodes, tuple(edges), graph.input_shape)


def _remove_node(graph: ModelGraph, action: RemoveNode) -> ModelGraph:
    target = graph.node(action.node_id)
    preds = graph.predecessors(target.id)
    succs = graph.successors(target.id)
    if not action.reconnect and preds and succs:
        raise RemoveWouldOrphan(
            f"removing {target.id!r} without reconnect would disconnect the graph"
        )
    edges = [e for e in graph.edges if target.id not in e]
    if action.reconnect:
        edges.extend((p, s) for p in preds for s in succs)
    nodes = tuple(n for n in graph.nodes if n.id != target.id)
    return ModelGraph(nodes, tuple(edges), graph.input_shape)


def _replace_head(graph: ModelGraph, action: ReplaceHead) -> ModelGraph:
    params = graph.parameterized_nodes()
    if not params:
        raise GraphError("graph has no parameterized layer to act as head")
    head = params[-1]
    if head.kind == "dense":
        new_head = LayerNode(
            head.id, head.name, head.kind,
            {**head.attrs, "out_features": action.new_out_features},
            frozen=False, reinit=True,
        )
    else:  # conv2d head
        new_head = LayerNode(
            head.id, head.name, head.kind,
            {**head.attrs, "out_channels": action.new_out_features},
            frozen=False, reinit=True,
        )
    nodes = tuple(new_head if n.id == head.id else n for n in graph.nodes)
    return ModelGraph(nodes, graph.edges, graph.input_shape)


def _set_frozen_prefix(graph: ModelGraph, action: SetFrozenPrefix) -> ModelGraph:
    params = graph.parameterized_nodes()
    if action.k < 0 or action.k > len(params):
        raise GraphError(f"frozen prefix {action.k} out of range [0, {len(params)}]")
    frozen_ids = {n.id for n in params[: action.k]}
    nodes = tuple(
        LayerNode(n.id, n.name, n.kind, dict(n.attrs), n.id in frozen_ids, n.reinit)
        if n.parameterized
        else n
        for n in graph.nodes
    )
    return ModelGraph(nodes, graph.edges, graph.input_shape)


_APPLIERS = {
    SetAttr: _set_attr,
    InsertNode: _insert_node,
    RemoveNode: _remove_node,
    ReplaceHead: _replace_head,
    SetFrozenPrefix: _set_frozen_prefix,
}


def apply_edit(graph: ModelGraph, action: EditAction) -> ModelGraph:
    """Apply one action and re-validate; rejects atomically on any failure."""
    applier = _APPLIERS.get(type(action))
    if applier is None:
        raise GraphError(f"unknown edit action {type(action).__name__}")
    result = applier(graph, action)
    try:
        result.validate()
    except ModelPSError as exc:
        raise InvalidResult(exc) from exc
    return result
