"""First-boot store seeding: bundled synthetic datasets and demo models.

Everything here is deterministic, so booting twice (or two processes racing)
converges on the same dataset ids and content-addressed model ids; seeding
is therefore naturally idempotent.
"""

from __future__ import annotations

import numpy as np

from ..features import FeatureStore
from ..graph import LayerNode, ModelGraph
from ..repository import ModelRepository, encode_weights
from ..training.core import ce_objective, train_loop
from ..training.network import ChainNetwork

# dataset ids are fixed so re-registration is a no-op
MOONS = "d-moons2"
BLOBS3 = "d-blobs3"
BLOBS_SRC = "d-blobs-src"
BLOBS_TGT = "d-blobs-tgt"
TEXT_PUBLIC = "d-text-pub"
TEXT_EDGE = "d-text-edge"

_BLOB_PARAMS = {"n": 600, "d": 16, "k": 2, "spread": 1.0, "centers_seed": 77}
_TEXT_PARAMS = {"n": 600, "d": 32, "k": 2, "spread": 1.2, "centers_seed": 55}


def dense_chain(dims: list[int], prefix: str = "d", softmax: bool = True) -> ModelGraph:
    """dims = [in, h1, ..., out]; relu between hidden layers."""
    layers: list[LayerNode] = []
    for i in range(len(dims) - 1):
        layers.append(
            LayerNode(f"{prefix}{i}", f"dense block {i}", "dense",
                      {"in_features": dims[i], "out_features": dims[i + 1], "bias": 1})
        )
        if i < len(dims) - 2:
            layers.append(LayerNode(f"{prefix}{i}a", "activation", "relu"))
    if softmax:
        layers.append(LayerNode(f"{prefix}out", "softmax", "softmax"))
    return ModelGraph.chain(layers, [dims[0]])


def conv_demo_graph() -> ModelGraph:
    """Small conv classifier; display/cost-model only for the native trainer."""
    return ModelGraph.chain(
        [
            LayerNode("c0", "conv stem", "conv2d",
                      {"in_channels": 3, "out_channels": 16, "kernel": 3, "stride": 1, "padding": 1}),
            LayerNode("c0a", "activation", "relu"),
            LayerNode("p0", "pool", "maxpool2d", {"kernel": 2, "stride": 2}),
            LayerNode("c1", "residual block", "conv2d",
                      {"in_channels": 16, "out_channels": 32, "kernel": 3, "stride": 1, "padding": 1}),
            LayerNode("c1a", "activation", "relu"),
            LayerNode("p1", "pool", "maxpool2d", {"kernel": 2, "stride": 2}),
            LayerNode("fl", "flatten", "flatten"),
            LayerNode("head", "classifier head", "dense",
                      {"in_features": 32 * 8 * 8, "out_features": 10, "bias": 1}),
            LayerNode("out", "softmax", "softmax"),
        ],
        [3, 32, 32],
    )


def conv_deep_graph() -> ModelGraph:
    """Ten parameterized layers (9 conv blocks + head): exercises the frozen
    depth dimension of configuration search on the simulated path."""
    layers = []
    channels = 3
    for i in range(9):
        out_c = 8
        layers.append(
            LayerNode(f"c{i}", f"residual block {i}", "conv2d",
                      {"in_channels": channels, "out_channels": out_c,
                       "kernel": 3, "stride": 1, "padding": 1})
        )
        layers.append(LayerNode(f"c{i}a", "activation", "relu"))
        channels = out_c
    layers.append(LayerNode("fl", "flatten", "flatten"))
    layers.append(LayerNode("head", "classifier head", "dense",
                            {"in_features": channels * 16 * 16, "out_features": 10, "bias": 1}))
    layers.append(LayerNode("out", "softmax", "softmax"))
    return ModelGraph.chain(layers, [3, 16, 16])


def seed_datasets(features: FeatureStore) -> None:
    features.register_synthetic(
        "moons-2d",
        {"kind": "moons", "params": {"n": 600, "noise": 0.15}, "seed": 31},
        tags=["synthetic", "moons", "low-dim"],
        dataset_id=MOONS,
    )
    features.register_synthetic(
        "blobs16-3c",
        {"kind": "blobs", "params": {"n": 600, "d": 16, "k": 3, "spread": 1.0, "centers_seed": 13}, "seed": 7},
        tags=["synthetic", "blobs", "tabular"],
        dataset_id=BLOBS3,
    )
    features.register_synthetic(
        "blobs16-source",
        {"kind": "blobs", "params": dict(_BLOB_PARAMS), "seed": 21},
        tags=["synthetic", "blobs", "tabular", "wide-margin"],
        dataset_id=BLOBS_SRC,
    )
    features.register_synthetic(
        "blobs16-target",
        {"kind": "shifted_blobs", "params": {**_BLOB_PARAMS, "shift": 2.0}, "seed": 22},
        tags=["synthetic", "blobs", "tabular", "wide-margin", "shifted"],
        dataset_id=BLOBS_TGT,
    )
    features.register_synthetic(
        "textvec-public",
        {"kind": "blobs", "params": dict(_TEXT_PARAMS), "seed": 41},
        tags=["synthetic", "text", "embedding"],
        dataset_id=TEXT_PUBLIC,
    )
    features.register_synthetic(
        "textvec-edge",
        {"kind": "shifted_blobs", "params": {**_TEXT_PARAMS, "n": 300, "shift": 1.5}, "seed": 42},
        tags=["synthetic", "text", "embedding", "shifted"],
        dataset_id=TEXT_EDGE,
    )


def cost_model_latency_ms(n_params: int, a: float = 1.0, b: float = 0.05) -> float:
    return a * n_params * 1e-6 + b


def pretrain_and_publish(
    repo: ModelRepository,
    features: FeatureStore,
    dataset_id: str,
    name: str,
    hidden: list[int],
    task: str,
    epochs: int = 20,
    lr: float = 0.1,
    seed: int = 1,
    author: str = "seed",
) -> str:
    """Train a dense net on a registered dataset and publish it.

    Metadata stays fully deterministic (accuracy from seeded training,
    latency from the cost model) so re-seeding reproduces the same
    content-addressed ids instead of duplicating records."""
    record = features.get(dataset_id)
    graph = dense_chain([record.flat_dim(), *hidden, record.num_classes])
    net = ChainNetwork(graph)
    x, y = features.split_arrays(dataset_id, "train")
    outcome = train_loop(
        ce_objective(net, x, y),
        net.init_params(np.random.default_rng([seed, 0x1417])),
        len(x),
        lr=lr, momentum=0.9, batch_size=32, epochs=epochs, seed=seed,
    )
    xv, yv = features.split_arrays(dataset_id, "val")
    accuracy = net.accuracy(outcome.params, xv, yv)
    from ..graph import count_params

    return repo.publish(
        name=name,
        task=task,
        graph=graph,
        metadata={
            "pretrained_dataset": record.name,
            "accuracy": accuracy,
            "latency_ms": cost_model_latency_ms(count_params(graph)),
        },
        weights=encode_weights(outcome.params),
        author=author,
    )


def seed_models(repo: ModelRepository, features: FeatureStore) -> list[str]:
    ids = [
        pretrain_and_publish(
            repo, features, BLOBS_SRC, "mlp-blobs-base", [32], "tabular_classification",
            epochs=15, seed=101,
        ),
        pretrain_and_publish(
            repo, features, BLOBS3, "mlp-deep", [48, 44, 40, 36, 32, 28, 24, 20, 16],
            "tabular_classification", epochs=60, lr=0.05, seed=102,
        ),
        pretrain_and_publish(
            repo, features, TEXT_PUBLIC, "mlp-text-base", [32], "text_classification",
            epochs=15, seed=103,
        ),
    ]
    # conv demo exercises the cost-model / simulated route; weights are a fresh
    # head-only blob since the native trainer never executes this graph
    conv = conv_demo_graph()
    head_rng = np.random.default_rng(104)
    head = {
        "head": {
            "weight": head_rng.uniform(-0.02, 0.02, size=(32 * 8 * 8, 10)).astype(np.float32),
            "bias": np.zeros(10, dtype=np.float32),
        }
    }
    from ..graph import count_params

    ids.append(
        repo.publish(
            name="cnn-mini",
            task="image_classification",
            graph=conv,
            metadata={
                "pretrained_dataset": "imagenet-mini",
                "accuracy": 0.72,
                "latency_ms": cost_model_latency_ms(count_params(conv)),
            },
            weights=encode_weights(head),
            author="seed",
        )
    )
    deep_conv = conv_deep_graph()
    deep_head = {
        "head": {
            "weight": np.random.default_rng(105)
            .uniform(-0.02, 0.02, size=(8 * 16 * 16, 10)).astype(np.float32),
            "bias": np.zeros(10, dtype=np.float32),
        }
    }
    ids.append(
        repo.publish(
            name="cnn-deep",
            task="image_classification",
            graph=deep_conv,
            metadata={
                "pretrained_dataset": "imagenet-mini",
                "accuracy": 0.70,
                "latency_ms": cost_model_latency_ms(count_params(deep_conv)),
            },
            weights=encode_weights(deep_head),
            author="seed",
        )
    )
    return ids


def seed_store(repo: ModelRepository, features: FeatureStore) -> list[str]:
    seed_datasets(features)
    return seed_models(repo, features)
