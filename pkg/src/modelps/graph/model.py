"""Model graph: a single-source/single-sink layered DAG with shape inference."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import (
    CycleDetected,
    GraphError,
    MultipleSinks,
    MultipleSources,
    ShapeMismatch,
    UnknownNode,
)
from .layers import EXECUTABLE_KINDS, LayerNode

ShapeMap = dict[str, tuple[int, ...]]


@dataclass(frozen=True)
class ModelGraph:
    """Immutable graph value; all edit operations return new instances."""

    nodes: tuple[LayerNode, ...]
    edges: tuple[tuple[str, str], ...]
    input_shape: tuple[int, ...]

    @staticmethod
    def chain(layers, input_shape) -> "ModelGraph":
        """Build the common linear topology from an ordered layer list."""
        nodes = tuple(layers)
        edges = tuple((a.id, b.id) for a, b in zip(nodes, nodes[1:]))
        return ModelGraph(nodes, edges, tuple(input_shape))

    def node(self, node_id: str) -> LayerNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise UnknownNode(f"no node with id {node_id!r}")

    def has_node(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.nodes)

    def predecessors(self, node_id: str) -> list[str]:
        return [a for a, b in self.edges if b == node_id]

    def successors(self, node_id: str) -> list[str]:
        return [b for a, b in self.edges if a == node_id]

    def topo_order(self) -> list[LayerNode]:
        """Topological order (stable w.r.t. node list order); raises on cycles."""
        indegree = {n.id: 0 for n in self.nodes}
        for _, b in self.edges:
            indegree[b] += 1
        order: list[LayerNode] = []
        ready = [n for n in self.nodes if indegree[n.id] == 0]
        while ready:
            n = ready.pop(0)
            order.append(n)
            for m in self.successors(n.id):
                indegree[m] -= 1
                if indegree[m] == 0:
                    ready.append(self.node(m))
        if len(order) != len(self.nodes):
            raise CycleDetected("graph edges contain a cycle")
        return order

    def parameterized_nodes(self) -> list[LayerNode]:
        return [n for n in self.topo_order() if n.parameterized]

    def is_chain(self) -> bool:
        return all(
            len(self.predecessors(n.id)) <= 1 and len(self.successors(n.id)) <= 1
            for n in self.nodes
        )

    def is_executable(self) -> bool:
        """True when the native trainer can run this graph directly."""
        return self.is_chain() and all(n.kind in EXECUTABLE_KINDS for n in self.nodes)

    def validate(self) -> ShapeMap:
        """Full structural + shape validation; returns the shape map."""
        return infer_shapes(self)


def _check_structure(graph: ModelGraph) -> list[LayerNode]:
    if not graph.nodes:
        raise GraphError("graph has no nodes")
    ids = [n.id for n in graph.nodes]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise GraphError(f"duplicate node id {dup!r}")
    known = set(ids)
    for a, b in graph.edges:
        if a not in known or b not in known:
            raise UnknownNode(f"edge ({a!r}, {b!r}) references a missing node")
    sources = [i for i in ids if not graph.predecessors(i)]
    sinks = [i for i in ids if not graph.successors(i)]
    order = graph.topo_order()  # raises CycleDetected
    if len(sources) != 1:
        raise MultipleSources(f"expected exactly one source, found {sources}")
    if len(sinks) != 1:
        raise MultipleSinks(f"expected exactly one sink, found {sinks}")
    return order


def _layer_output_shape(node: LayerNode, inp: tuple[int, ...]) -> tuple[int, ...]:
    kind = node.kind
    if kind == "dense":
        if len(inp) != 1:
            raise ShapeMismatch(node.id, "flattened 1-D input", list(inp))
        if inp[0] != node.attrs["in_features"]:
            raise ShapeMismatch(node.id, node.attrs["in_features"], inp[0])
        return (node.attrs["out_features"],)
    if kind in ("relu", "softmax", "dropout", "identity"):
        return inp
    if kind == "flatten":
        size = 1
        for d in inp:
            size *= d
        return (size,)
    if kind == "conv2d":
        if len(inp) != 3:
            raise ShapeMismatch(node.id, "[channels, height, width] input", list(inp))
        c, h, w = inp
        a = node.attrs
        if c != a["in_channels"]:
            raise ShapeMismatch(node.id, a["in_channels"], c)
        k, s, p = a["kernel"], a["stride"], a["padding"]
        if h + 2 * p < k or w + 2 * p < k:
            raise ShapeMismatch(node.id, f"spatial dims >= kernel {k}", [h, w])
        return (a["out_channels"], (h + 2 * p - k) // s + 1, (w + 2 * p - k) // s + 1)
    if kind == "maxpool2d":
        if len(inp) != 3:
            raise ShapeMismatch(node.id, "[channels, height, width] input", list(inp))
        c, h, w = inp
        k, s = node.attrs["kernel"], node.attrs["stride"]
        if h < k or w < k:
            raise ShapeMismatch(node.id, f"spatial dims >= kernel {k}", [h, w])
        return (c, (h - k) // s + 1, (w - k) // s + 1)
    raise GraphError(f"no shape rule for kind {kind!r}")


def infer_shapes(graph: ModelGraph) -> ShapeMap:
    """Output shape per node, walking the DAG from the single source.

    A node with several predecessors requires them to agree on one shape
    (branches are display-only and merge element-wise).
    """
    order = _check_structure(graph)
    shapes: ShapeMap = {}
    for node in order:
        preds = graph.predecessors(node.id)
        if not preds:
            inp = tuple(graph.input_shape)
        else:
            pred_shapes = {shapes[p] for p in preds}
            if len(pred_shapes) > 1:
                raise ShapeMismatch(node.id, "matching predecessor shapes", sorted(map(list, pred_shapes)))
            inp = next(iter(pred_shapes))
        shapes[node.id] = _layer_output_shape(node, inp)
    return shapes


def count_params(graph: ModelGraph) -> int:
    """Total trainable parameters; dense = in*out (+out bias), conv2d = in*out*k^2 + out."""
    _check_structure(graph)
    return sum(n.param_count() for n in graph.nodes)
