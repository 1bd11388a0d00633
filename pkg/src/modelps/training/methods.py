"""Transfer-learning method zoo built on the core loop.

TrAdaBoost follows the classic instance-weighting scheme: a fixed source
down-weighting factor beta = 1 / (1 + sqrt(2 ln n_src / rounds)) shrinks
misclassified source instances, while the per-round target factor
beta_t = eps_t / (1 - eps_t) boosts misclassified target instances. The
final model is a weighted vote over the last ceil(rounds/2) learners.

Rounds are deterministic functions of (round index, instance weights,
config seed), so a paused boosting job checkpoints (round, weights,
learners) and resumes bit-exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateRound, IncompatibleDatasets
from ..graph import LayerNode, ModelGraph
from .config import TrainConfig
from .core import PAUSE, STOP, ce_objective, train_loop
from .network import ChainNetwork, Params


def shrink_graph(graph: ModelGraph, min_width: int = 8, out_features: int | None = None) -> ModelGraph:
    """Student architecture for distillation: halve every dense width
    (floored at ``min_width``) while keeping the chain wiring intact."""
    order = graph.topo_order()
    dense = [n for n in order if n.kind == "dense"]
    widths: dict[str, int] = {}
    for node in dense[:-1]:
        widths[node.id] = max(min_width, node.attrs["out_features"] // 2)
    nodes = []
    prev_out = int(np.prod(graph.input_shape))
    for node in order:
        if node.kind == "dense":
            out = widths.get(node.id, out_features or node.attrs["out_features"])
            nodes.append(
                LayerNode(node.id, node.name, "dense",
                          {"in_features": prev_out, "out_features": out, "bias": node.attrs["bias"]},
                          frozen=False, reinit=False)
            )
            prev_out = out
        else:
            nodes.append(LayerNode(node.id, node.name, node.kind, dict(node.attrs)))
    return ModelGraph.chain(nodes, graph.input_shape)


@dataclass
class TradaboostEnsemble:
    net: ChainNetwork
    members: list  # [(params, vote_weight), ...]
    rounds_completed: int
    stopped_early: bool

    def predict(self, x: np.ndarray) -> np.ndarray:
        votes = None
        for params, weight in self.members:
            pred = self.net.predict(params, x)
            onehot = np.zeros((len(x), self.net.out_dim))
            onehot[np.arange(len(x)), pred] = weight
            votes = onehot if votes is None else votes + onehot
        return np.argmax(votes, axis=-1)

    def accuracy(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean(self.predict(x) == y))


class TradaboostRun:
    """Round-by-round boosting with pause/terminate checks between rounds."""

    def __init__(
        self,
        net: ChainNetwork,
        source: tuple[np.ndarray, np.ndarray],
        target: tuple[np.ndarray, np.ndarray],
        config: TrainConfig,
        inner_control=None,
    ):
        xs, ys = source
        xt, yt = target
        if xs.shape[1] != xt.shape[1]:
            raise IncompatibleDatasets(f"feature dims differ: {xs.shape[1]} vs {xt.shape[1]}")
        self.net = net
        self.config = config
        self.inner_control = inner_control
        self.n_src = len(xs)
        self.x = np.concatenate([xs, xt])
        self.y = np.concatenate([ys, yt])
        self.beta = 1.0 / (1.0 + math.sqrt(2.0 * math.log(self.n_src) / config.boosting_rounds))
        # resumable state
        self.round = 0
        self.w = np.full(len(self.x), 1.0 / len(self.x))
        self.learners: list[tuple[Params, float]] = []
        self.stopped_early = False

    def restore(self, round_index: int, w: np.ndarray, learners: list) -> None:
        self.round = round_index
        self.w = np.asarray(w, dtype=np.float64)
        self.learners = list(learners)

    def _one_round(self, r: int) -> str:
        """Run round r; returns 'continue', 'stop_early', or 'terminated'."""
        config = self.config
        self.w = self.w / self.w.sum()
        init = self.net.init_params(np.random.default_rng([config.seed, 0xB005, r]))
        outcome = train_loop(
            ce_objective(self.net, self.x, self.y, sample_weights=self.w),
            init,
            len(self.x),
            lr=config.lr,
            momentum=config.momentum,
            batch_size=config.batch_size,
            epochs=config.epochs,
            seed=config.seed * 1000 + r,
            control=self.inner_control,
        )
        if outcome.stopped == "terminated":
            return "terminated"
        pred = self.net.predict(outcome.params, self.x)
        err = (pred != self.y).astype(np.float64)
        tgt_w = self.w[self.n_src :]
        eps_t = float(np.sum(tgt_w * err[self.n_src :]) / np.sum(tgt_w))
        if eps_t >= 0.5:
            # learner no better than chance on the target: drop it and stop
            self.stopped_early = True
            if not self.learners:
                self.learners.append((outcome.params, 1.0))
            return "stop_early"
        beta_t = max(eps_t / (1.0 - eps_t), 1e-6)
        self.learners.append((outcome.params, math.log(1.0 / beta_t)))
        if eps_t == 0.0:
            # perfect target round; keep the model we have (DegenerateRound policy)
            self.stopped_early = True
            return "stop_early"
        self.w[: self.n_src] *= self.beta ** err[: self.n_src]
        self.w[self.n_src :] *= beta_t ** (-err[self.n_src :])
        return "continue"

    def run(self, deadline: float | None = None, round_check=None) -> str:
        """Returns 'completed', 'paused', or 'terminated'. ``round_check()``
        is consulted between rounds and may return PAUSE or STOP."""
        round_times: list[float] = []
        while self.round < self.config.boosting_rounds:
            if round_check is not None:
                verdict = round_check()
                if verdict == STOP:
                    return "terminated"
                if verdict == PAUSE:
                    return "paused"
            if deadline is not None and round_times:
                estimate = sum(round_times) / len(round_times)
                if time.perf_counter() + estimate > deadline:
                    break
            started = time.perf_counter()
            status = self._one_round(self.round)
            if status == "terminated":
                return "terminated"
            self.round += 1
            round_times.append(time.perf_counter() - started)
            if status == "stop_early":
                break
        return "completed"

    def ensemble(self) -> TradaboostEnsemble:
        if not self.learners:
            raise DegenerateRound("no usable boosting round completed")
        keep = math.ceil(len(self.learners) / 2)
        return TradaboostEnsemble(self.net, self.learners[-keep:], len(self.learners), self.stopped_early)


def tradaboost_fit(
    net: ChainNetwork,
    source: tuple[np.ndarray, np.ndarray],
    target: tuple[np.ndarray, np.ndarray],
    config: TrainConfig,
    deadline: float | None = None,
) -> TradaboostEnsemble:
    run = TradaboostRun(net, source, target, config)
    run.run(deadline=deadline)
    return run.ensemble()
