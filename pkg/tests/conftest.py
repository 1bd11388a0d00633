"""Shared generators for property-style tests.

The random graph/draft builders double as the independent oracle for the
serialization round-trip suites: anything they can produce must survive
serialize -> parse -> serialize byte-stably.
"""

from __future__ import annotations

import numpy as np
import pytest

from modelps.graph import Draft, LayerNode, ModelGraph

AUTHORS = ["alice", "bob", "mary", "steven", "tom"]


def random_vector_chain(rng: np.random.Generator, input_dim: int | None = None) -> ModelGraph:
    """Random executable chain: dense/relu/dropout/identity blocks + optional softmax."""
    dim = input_dim or int(rng.integers(2, 96))
    layers = [LayerNode("in0", "input adapter", "identity")]
    width = dim
    for i in range(int(rng.integers(1, 5))):
        out = int(rng.integers(2, 96))
        layers.append(
            LayerNode(
                f"d{i}", f"dense block {i}", "dense",
                {"in_features": width, "out_features": out, "bias": int(rng.integers(0, 2))},
            )
        )
        width = out
        pick = rng.random()
        if pick < 0.5:
            layers.append(LayerNode(f"a{i}", "activation", "relu"))
        elif pick < 0.7:
            layers.append(LayerNode(f"p{i}", "dropout", "dropout", {"p": round(float(rng.random()), 4)}))
    if rng.random() < 0.5:
        layers.append(LayerNode("out", "softmax", "softmax"))
    return ModelGraph.chain(layers, [dim])


def random_image_chain(rng: np.random.Generator) -> ModelGraph:
    """Random conv stack ending in flatten + dense head (not natively executable)."""
    channels = int(rng.integers(1, 4))
    side = int(rng.integers(8, 33))
    layers = []
    shape = (channels, side, side)
    for i in range(int(rng.integers(1, 4))):
        k = int(rng.integers(1, min(shape[1], shape[2], 5) + 1))
        stride = int(rng.integers(1, 3))
        pad = int(rng.integers(0, 2))
        out_c = int(rng.integers(1, 9))
        layers.append(
            LayerNode(
                f"c{i}", f"conv block {i}", "conv2d",
                {"in_channels": shape[0], "out_channels": out_c,
                 "kernel": k, "stride": stride, "padding": pad},
            )
        )
        h = (shape[1] + 2 * pad - k) // stride + 1
        w = (shape[2] + 2 * pad - k) // stride + 1
        shape = (out_c, h, w)
        if rng.random() < 0.4 and shape[1] >= 2 and shape[2] >= 2:
            layers.append(LayerNode(f"m{i}", "pool", "maxpool2d", {"kernel": 2, "stride": 2}))
            shape = (shape[0], (shape[1] - 2) // 2 + 1, (shape[2] - 2) // 2 + 1)
    layers.append(LayerNode("fl", "flatten", "flatten"))
    flat = shape[0] * shape[1] * shape[2]
    layers.append(
        LayerNode("head", "classifier head", "dense",
                  {"in_features": flat, "out_features": int(rng.integers(2, 11)), "bias": 1})
    )
    return ModelGraph.chain(layers, [channels, side, side])


def random_graph(rng: np.random.Generator) -> ModelGraph:
    return random_image_chain(rng) if rng.random() < 0.3 else random_vector_chain(rng)


def random_pending_config(rng: np.random.Generator) -> dict:
    config: dict = {}
    if rng.random() < 0.8:
        config["tl_method"] = str(rng.choice(
            ["fine_tune", "knowledge_distill", "tradaboost", "mmd_adapt", "from_scratch"]))
    if rng.random() < 0.6:
        config["lr"] = round(float(10 ** rng.uniform(-4, -1)), 8)
    if rng.random() < 0.5:
        config["epochs"] = int(rng.integers(1, 21))
    if rng.random() < 0.5:
        config["batch_size"] = int(rng.integers(1, 65))
    if rng.random() < 0.4:
        config["frozen_layers"] = int(rng.integers(0, 4))
    if rng.random() < 0.4:
        config["aug"] = {
            "steps": [{"op": "gaussian_noise", "sigma": round(float(rng.uniform(0.01, 0.5)), 6)}],
            "seed": int(rng.integers(0, 2**31)),
        }
    if rng.random() < 0.3:
        config["seed"] = int(rng.integers(0, 2**31))
    return config


def random_draft(rng: np.random.Generator) -> Draft:
    return Draft(
        graph=random_graph(rng),
        base_model_id=f"m-{rng.integers(0, 10**9):09x}",
        pending_config=random_pending_config(rng),
        revision=int(rng.integers(0, 1000)),
        author=str(rng.choice(AUTHORS)),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)


# --- shared gradient-check helpers ---


def flatten_params(params):
    items = []
    for nid in sorted(params):
        for key in sorted(params[nid]):
            items.append(((nid, key), params[nid][key]))
    return items


def finite_difference_check(objective, params, indices, eps=1e-4, rtol=1e-4):
    """Central finite differences against the analytic gradient."""
    rng = np.random.default_rng(0)
    _, grads = objective(params, indices, rng)
    for (nid, key), arr in flatten_params(params):
        grad_flat = grads[nid][key].reshape(-1)
        flat = arr.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            up, _ = objective(params, indices, np.random.default_rng(0))
            flat[i] = orig - eps
            down, _ = objective(params, indices, np.random.default_rng(0))
            flat[i] = orig
            fd = (up - down) / (2 * eps)
            denom = max(abs(fd), abs(grad_flat[i]), 1e-8)
            assert abs(fd - grad_flat[i]) / denom < rtol, (nid, key, i, fd, grad_flat[i])


def away_from_relu_kinks(net, params, x, margin=1e-2):
    """Finite differences are only valid where the loss is differentiable; a
    pre-activation within eps of zero flips a relu and breaks the check."""
    _, (acts, _) = net.forward(params, x)
    for i, node in enumerate(net.layers):
        if node.kind == "relu" and np.min(np.abs(acts[i])) < margin:
            return False
    return True


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        status = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::")[-1]
        print(f"\n[{status}] {name}", flush=True)
