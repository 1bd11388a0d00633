from __future__ import annotations

import numpy as np
import pytest

from modelps.errors import (
    CycleDetected,
    InvalidResult,
    MultipleSources,
    RemoveWouldOrphan,
    SchemaViolation,
    ShapeMismatch,
    UnknownNode,
)
from modelps.graph import (
    InsertNode,
    LayerNode,
    ModelGraph,
    RemoveNode,
    ReplaceHead,
    SetAttr,
    SetFrozenPrefix,
    apply_edit,
    count_params,
    infer_shapes,
)

from conftest import random_graph


def dense(nid, inf, outf, bias=1, frozen=False):
    return LayerNode(nid, nid, "dense", {"in_features": inf, "out_features": outf, "bias": bias}, frozen)


def mlp_784():
    return ModelGraph.chain(
        [dense("d1", 784, 128), LayerNode("r1", "relu", "relu"), dense("d2", 128, 10)],
        [784],
    )


# --- shape inference ---


def test_dense_relu_shapes():
    g = ModelGraph.chain([dense("d1", 784, 128), LayerNode("r1", "relu", "relu")], [784])
    assert infer_shapes(g) == {"d1": (128,), "r1": (128,)}


def test_conv_shape_same_padding():
    g = ModelGraph.chain(
        [LayerNode("c1", "conv", "conv2d",
                   {"in_channels": 3, "out_channels": 16, "kernel": 3, "stride": 1, "padding": 1})],
        [3, 32, 32],
    )
    assert infer_shapes(g)["c1"] == (16, 32, 32)


def test_dense_in_features_mismatch():
    g = ModelGraph.chain([dense("d1", 512, 128)], [784])
    with pytest.raises(ShapeMismatch) as exc:
        infer_shapes(g)
    assert exc.value.expected == 512
    assert exc.value.got == 784


def test_cycle_detected():
    g = ModelGraph(
        (dense("a", 4, 4), dense("b", 4, 4)),
        (("a", "b"), ("b", "a")),
        (4,),
    )
    with pytest.raises(CycleDetected):
        infer_shapes(g)


def test_multiple_sources_rejected():
    g = ModelGraph(
        (LayerNode("a", "a", "identity"), LayerNode("b", "b", "identity"),
         LayerNode("c", "c", "identity")),
        (("a", "c"), ("b", "c")),
        (4,),
    )
    with pytest.raises(MultipleSources):
        infer_shapes(g)


def test_branching_with_matching_shapes_ok():
    # display-only branch: one source splits and re-merges with equal shapes
    g = ModelGraph(
        (LayerNode("s", "s", "identity"), LayerNode("a", "a", "relu"),
         LayerNode("b", "b", "identity"), LayerNode("t", "t", "relu")),
        (("s", "a"), ("s", "b"), ("a", "t"), ("b", "t")),
        (8,),
    )
    assert infer_shapes(g)["t"] == (8,)


def test_maxpool_shape():
    g = ModelGraph.chain(
        [LayerNode("m", "pool", "maxpool2d", {"kernel": 2, "stride": 2})],
        [8, 28, 28],
    )
    assert infer_shapes(g)["m"] == (8, 14, 14)


def test_conv_shape_matches_closed_form_on_random_parameterizations():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        size = int(rng.integers(1, 64))
        k = int(rng.integers(1, size + 1))
        s = int(rng.integers(1, 5))
        p = int(rng.integers(0, 4))
        g = ModelGraph.chain(
            [LayerNode("c", "c", "conv2d",
                       {"in_channels": 1, "out_channels": 2, "kernel": k, "stride": s, "padding": p})],
            [1, size, size],
        )
        expected = (size + 2 * p - k) // s + 1
        assert infer_shapes(g)["c"] == (2, expected, expected)


def test_shape_inference_deterministic(rng):
    for _ in range(50):
        g = random_graph(rng)
        assert infer_shapes(g) == infer_shapes(g)


# --- parameter counting ---


def test_count_params_dense_with_bias():
    g = ModelGraph.chain([dense("d", 784, 128, bias=1)], [784])
    assert count_params(g) == 100480


def test_count_params_relu_only():
    g = ModelGraph.chain([LayerNode("r", "relu", "relu")], [4])
    assert count_params(g) == 0


def test_count_params_conv():
    g = ModelGraph.chain(
        [LayerNode("c", "c", "conv2d",
                   {"in_channels": 3, "out_channels": 16, "kernel": 3, "stride": 1, "padding": 0})],
        [3, 8, 8],
    )
    assert count_params(g) == 448


# --- edits ---


def test_set_attr_breaking_downstream_is_rejected_atomically():
    g = mlp_784()
    with pytest.raises(InvalidResult):
        apply_edit(g, SetAttr("d1", "out_features", 64))
    assert g.node("d1").attrs["out_features"] == 128  # input untouched


def test_set_attr_pair_fixes_chain():
    g = mlp_784()
    g2 = apply_edit(g, SetAttr("d1", "out_features", 128))  # no-op value passes
    assert infer_shapes(g2) == infer_shapes(g)


def test_replace_head_swaps_out_features_and_flags_reinit():
    g = ModelGraph.chain([dense("stem", 64, 32), LayerNode("r", "r", "relu"), dense("head", 32, 1000)], [64])
    g2 = apply_edit(g, ReplaceHead(10))
    assert g2.node("head").attrs["out_features"] == 10
    assert g2.node("head").reinit is True
    assert g.node("head").attrs["out_features"] == 1000


def test_set_frozen_prefix():
    g = ModelGraph.chain(
        [dense("a", 8, 8), LayerNode("r", "r", "relu"), dense("b", 8, 8), dense("c", 8, 4)],
        [8],
    )
    g2 = apply_edit(g, SetFrozenPrefix(2))
    assert [n.frozen for n in g2.parameterized_nodes()] == [True, True, False]
    g3 = apply_edit(g2, SetFrozenPrefix(0))
    assert all(not n.frozen for n in g3.parameterized_nodes())


def test_frozen_prefix_does_not_change_param_count(rng):
    for _ in range(25):
        g = random_graph(rng)
        k = int(rng.integers(0, len(g.parameterized_nodes()) + 1))
        assert count_params(apply_edit(g, SetFrozenPrefix(k))) == count_params(g)


def test_insert_node_mid_chain():
    g = mlp_784()
    g2 = apply_edit(g, InsertNode(LayerNode("drop", "dropout", "dropout", {"p": 0.5}), "r1"))
    assert [n.id for n in g2.topo_order()] == ["d1", "r1", "drop", "d2"]
    assert infer_shapes(g2)["drop"] == (128,)


def test_remove_node_reconnects():
    g = mlp_784()
    g2 = apply_edit(g, RemoveNode("r1", reconnect=True))
    assert [n.id for n in g2.topo_order()] == ["d1", "d2"]
    assert infer_shapes(g2)["d2"] == (10,)


def test_remove_without_reconnect_orphan():
    g = mlp_784()
    with pytest.raises(RemoveWouldOrphan):
        apply_edit(g, RemoveNode("r1", reconnect=False))


def test_remove_breaking_shapes_is_rejected():
    g = mlp_784()
    with pytest.raises(InvalidResult):
        apply_edit(g, RemoveNode("d1", reconnect=True))  # 784 feeds dense(128, 10)


def test_edit_unknown_node():
    with pytest.raises(UnknownNode):
        apply_edit(mlp_784(), SetAttr("nope", "out_features", 3))


def test_edit_failures_leave_graph_unchanged(rng):
    g = mlp_784()
    before = (g.nodes, g.edges, g.input_shape)
    for action in [
        SetAttr("d1", "out_features", 64),
        RemoveNode("d1", reconnect=True),
        RemoveNode("r1", reconnect=False),
    ]:
        with pytest.raises((InvalidResult, RemoveWouldOrphan)):
            apply_edit(g, action)
        assert (g.nodes, g.edges, g.input_shape) == before


# --- layer attr validation ---


def test_attr_schema_requires_exact_keys():
    with pytest.raises(SchemaViolation):
        LayerNode("d", "d", "dense", {"in_features": 4})
    with pytest.raises(SchemaViolation):
        LayerNode("d", "d", "dense",
                  {"in_features": 4, "out_features": 2, "bias": 1, "extra": 1})
    with pytest.raises(SchemaViolation):
        LayerNode("p", "p", "dropout", {"p": 1.5})
    with pytest.raises(SchemaViolation):
        LayerNode("d", "d", "dense", {"in_features": -3, "out_features": 2, "bias": 1})
