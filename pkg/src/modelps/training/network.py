"""Native executor for chain graphs of dense/relu/softmax/flatten/dropout layers.

Parameters are plain numpy arrays in a {node_id: {"weight", "bias"}} dict,
matching the weight-blob container, so checkpoints and published weights
need no translation layer.
"""

from __future__ import annotations

import time

import numpy as np

from ..errors import InvalidConfig, ShapeMismatch
from ..graph import ModelGraph
from ..repository.blobs import Tensors
from .losses import softmax

Params = Tensors


def clone_params(params: Params) -> Params:
    return {nid: {k: v.copy() for k, v in t.items()} for nid, t in params.items()}


def zeros_like_params(params: Params) -> Params:
    return {nid: {k: np.zeros_like(v) for k, v in t.items()} for nid, t in params.items()}


def params_equal(a: Params, b: Params) -> bool:
    if set(a) != set(b):
        return False
    return all(
        set(a[nid]) == set(b[nid]) and all(np.array_equal(a[nid][k], b[nid][k]) for k in a[nid])
        for nid in a
    )


class ChainNetwork:
    """Forward/backward executor bound to one executable graph."""

    def __init__(self, graph: ModelGraph):
        if not graph.is_executable():
            raise InvalidConfig("graph contains kinds the native trainer cannot execute")
        graph.validate()
        self.graph = graph
        self.layers = graph.topo_order()
        self.input_dim = int(np.prod(graph.input_shape))
        self.dense_ids = [n.id for n in self.layers if n.kind == "dense"]
        if not self.dense_ids:
            raise InvalidConfig("graph has no trainable dense layer")
        # index of the final dense layer; its input is the transfer representation
        self.head_index = max(i for i, n in enumerate(self.layers) if n.kind == "dense")
        self.trailing_softmax = self.layers[-1].kind == "softmax"

    @property
    def out_dim(self) -> int:
        return self.graph.node(self.dense_ids[-1]).attrs["out_features"]

    def init_params(self, rng: np.random.Generator, dtype=np.float32) -> Params:
        params: Params = {}
        for node in self.layers:
            if node.kind != "dense":
                continue
            fan_in = node.attrs["in_features"]
            bound = 1.0 / np.sqrt(fan_in)
            tensors = {
                "weight": rng.uniform(-bound, bound, size=(fan_in, node.attrs["out_features"])).astype(dtype)
            }
            if node.attrs["bias"]:
                tensors["bias"] = rng.uniform(-bound, bound, size=(node.attrs["out_features"],)).astype(dtype)
            params[node.id] = tensors
        return params

    def load_params(self, stored: Params, rng: np.random.Generator, dtype=np.float32) -> Params:
        """Adopt stored tensors where the node matches; freshly initialize
        nodes flagged ``reinit`` or whose stored shape no longer fits."""
        fresh = self.init_params(rng, dtype)
        params: Params = {}
        for node in self.layers:
            if node.kind != "dense":
                continue
            take = fresh[node.id]
            if not node.reinit and node.id in stored:
                old = stored[node.id]
                if ("weight" in old and old["weight"].shape == take["weight"].shape
                        and ("bias" not in take or ("bias" in old and old["bias"].shape == take["bias"].shape))):
                    take = {k: old[k].astype(dtype) for k in take}
            params[node.id] = take
        return params

    def forward(
        self,
        params: Params,
        x: np.ndarray,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ):
        """Returns (logits, activations); a trailing softmax is left to the
        loss for numerical stability. ``activations[i]`` is the input to
        layer i; the forward caches dropout/relu masks for backward."""
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ShapeMismatch("input", self.input_dim, list(x.shape))
        acts = [x]
        masks: dict[int, np.ndarray] = {}
        out = x
        for i, node in enumerate(self.layers):
            if node.kind == "dense":
                t = params[node.id]
                out = out @ t["weight"]
                if "bias" in t:
                    out = out + t["bias"]
            elif node.kind == "relu":
                mask = out > 0
                masks[i] = mask
                out = out * mask
            elif node.kind == "dropout":
                if train:
                    p = node.attrs["p"]
                    if p >= 1.0:
                        mask = np.zeros_like(out)
                    else:
                        mask = ((rng.random(size=out.shape) >= p) / (1.0 - p)).astype(out.dtype)
                    masks[i] = mask
                    out = out * mask
            elif node.kind == "softmax" and not (self.trailing_softmax and i == len(self.layers) - 1):
                out = softmax(out)
            # flatten / identity / trailing softmax: no-op on flat activations
            acts.append(out)
        # a trailing softmax was skipped above, so ``out`` is always the logits
        return out, (acts, masks)

    def backward(
        self,
        params: Params,
        cache,
        grad_logits: np.ndarray,
        inject: dict[int, np.ndarray] | None = None,
    ) -> Params:
        """Gradients w.r.t. every dense parameter. ``inject`` adds extra
        gradient at activation index i (the input of layer i)."""
        acts, masks = cache
        grads: Params = {}
        grad = grad_logits
        last = len(self.layers) - 1
        for i in range(last, -1, -1):
            node = self.layers[i]
            if node.kind == "softmax" and self.trailing_softmax and i == last:
                pass  # loss gradient is already w.r.t. logits
            elif node.kind == "softmax":
                y = acts[i + 1]
                grad = (grad - np.sum(grad * y, axis=-1, keepdims=True)) * y
            elif node.kind == "dense":
                x_in = acts[i]
                t = {"weight": x_in.T @ grad}
                if "bias" in params[node.id]:
                    t["bias"] = grad.sum(axis=0)
                grads[node.id] = t
                grad = grad @ params[node.id]["weight"].T
            elif node.kind in ("relu", "dropout"):
                if i in masks:
                    grad = grad * masks[i]
            # flatten / identity: pass through
            if inject and i in inject:
                grad = grad + inject[i]
        return grads

    def logits(self, params: Params, x: np.ndarray) -> np.ndarray:
        out, _ = self.forward(params, x, train=False)
        return out

    def hidden(self, params: Params, x: np.ndarray) -> np.ndarray:
        """Representation entering the head layer (adaptation target)."""
        _, (acts, _) = self.forward(params, x, train=False)
        return acts[self.head_index]

    def predict(self, params: Params, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(params, x), axis=-1)

    def accuracy(self, params: Params, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean(self.predict(params, x) == y))

    def forward_probs(self, params: Params, x: np.ndarray) -> np.ndarray:
        out = self.logits(params, x)
        return softmax(out) if self.trailing_softmax else out

    def measure_latency_ms(self, params: Params, warmup: int = 10, runs: int = 100) -> float:
        """Mean single-sample forward time over >= ``runs`` executions."""
        x = np.zeros((1, self.input_dim), dtype=np.float32)
        for _ in range(warmup):
            self.forward_probs(params, x)
        start = time.perf_counter()
        for _ in range(runs):
            self.forward_probs(params, x)
        return (time.perf_counter() - start) / runs * 1000.0
