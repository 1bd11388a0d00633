"""Config resolution, time-boxed validation, and report assembly.

``Trainer.run`` executes any zoo method against the repository + feature
store and returns a ``ValidationReport``. A budget turns on epoch-boundary
time accounting: the first epoch is attempted whenever its projected cost
fits, later epochs use the mean of past epoch times, and a mid-epoch
backstop aborts (with rollback) if the deadline passes anyway.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..errors import IncompatibleDatasets, InvalidConfig
from ..features.augment import apply_steps
from ..graph import ModelGraph, count_params
from ..repository.blobs import decode_weights
from .config import TrainConfig
from .core import (
    ABORT_EPOCH,
    RUN,
    STOP,
    EpochSnapshot,
    LoopControl,
    ce_objective,
    kd_objective,
    mmd_objective,
    train_loop,
)
from .methods import TradaboostEnsemble, TradaboostRun, shrink_graph
from .network import ChainNetwork, Params


@dataclass(frozen=True)
class ValidationReport:
    accuracy: float
    train_time_s: float
    inference_latency_ms: float
    params: int
    epochs_completed: int
    config: dict  # canonical config echo
    evaluator: str = "real"  # real | simulated

    def to_obj(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "train_time_s": self.train_time_s,
            "inference_latency_ms": self.inference_latency_ms,
            "params": self.params,
            "epochs_completed": self.epochs_completed,
            "config": self.config,
            "evaluator": self.evaluator,
        }

    @staticmethod
    def from_obj(obj: dict) -> "ValidationReport":
        return ValidationReport(
            accuracy=obj["accuracy"],
            train_time_s=obj["train_time_s"],
            inference_latency_ms=obj["inference_latency_ms"],
            params=obj["params"],
            epochs_completed=obj["epochs_completed"],
            config=obj["config"],
            evaluator=obj.get("evaluator", "real"),
        )


class BudgetControl(LoopControl):
    def __init__(self, budget_s: float, started: float):
        self.deadline = started + budget_s

    def on_epoch_start(self, epoch, estimate_s):
        if estimate_s is not None and time.perf_counter() + estimate_s > self.deadline:
            return STOP
        return RUN

    def on_first_batch(self, epoch, estimate_s):
        if time.perf_counter() + estimate_s > self.deadline:
            return ABORT_EPOCH
        return RUN

    def on_batch(self, epoch, batch):
        # backstop when the estimate was wrong: roll the epoch back
        if time.perf_counter() > self.deadline:
            return ABORT_EPOCH
        return RUN


class CompositeControl(LoopControl):
    def __init__(self, *controls: LoopControl):
        self.controls = [c for c in controls if c is not None]

    def _first(self, results):
        for r in results:
            if r != RUN:
                return r
        return RUN

    def check_interrupt(self):
        return self._first([c.check_interrupt() for c in self.controls])

    def on_epoch_start(self, epoch, estimate_s):
        return self._first([c.on_epoch_start(epoch, estimate_s) for c in self.controls])

    def on_first_batch(self, epoch, estimate_s):
        return self._first([c.on_first_batch(epoch, estimate_s) for c in self.controls])

    def on_batch(self, epoch, batch):
        return self._first([c.on_batch(epoch, batch) for c in self.controls])

    def on_epoch_end(self, epoch, snapshot):
        return self._first([c.on_epoch_end(epoch, snapshot) for c in self.controls])


@dataclass
class Resolved:
    config: TrainConfig
    graph: ModelGraph
    net: ChainNetwork
    params0: Params
    x_train: np.ndarray
    y_train: np.ndarray
    x_val: np.ndarray
    y_val: np.ndarray
    frozen_ids: frozenset
    teacher_logits: np.ndarray | None = None
    source_train: tuple | None = None


@dataclass
class BoostSnapshot:
    """Round-boundary state of a paused boosting run."""

    round: int
    w: np.ndarray
    learners: list


@dataclass
class RunResult:
    report: ValidationReport | None
    params: Params | None
    stopped: str  # completed | budget | paused | terminated
    snapshot: EpochSnapshot | BoostSnapshot | None = None
    net: ChainNetwork | None = None
    ensemble: TradaboostEnsemble | None = None
    graph: ModelGraph | None = None


class _TerminateOnly(LoopControl):
    """Inner-loop adapter: honors terminate at batch boundaries, defers pause
    to the round boundary."""

    def __init__(self, inner: LoopControl):
        self.inner = inner

    def on_batch(self, epoch, batch):
        return STOP if self.inner.check_interrupt() == STOP else RUN


class Trainer:
    """Executes train configs against the repository and feature store."""

    def __init__(self, repo, features, history=None, latency_a: float = 1.0, latency_b: float = 0.05):
        self.repo = repo
        self.features = features
        self.history = history  # object with .append(config, report), optional
        self.latency_a = latency_a
        self.latency_b = latency_b

    # --- resolution ---

    def cost_model_latency_ms(self, n_params: int) -> float:
        return self.latency_a * n_params * 1e-6 + self.latency_b

    def _source_dataset_id(self, config: TrainConfig, base_record) -> str:
        if config.source_dataset_id:
            return config.source_dataset_id
        if base_record is not None:
            match = self.features.find_by_name(base_record.metadata.pretrained_dataset)
            if match is not None:
                return match.dataset_id
        raise InvalidConfig(f"{config.tl_method} needs source_dataset_id")

    def resolve(self, config: TrainConfig, initial_tensors=None) -> Resolved:
        config.validate()
        base = self.repo.get(config.base_model_id) if config.base_model_id else None

        graph = config.graph
        if graph is None:
            if config.tl_method == "knowledge_distill":
                target = self.features.get(config.dataset_id)
                graph = shrink_graph(base.graph, out_features=target.num_classes)
            else:
                graph = base.graph
        net = ChainNetwork(graph)

        n_parameterized = len(graph.parameterized_nodes())
        if config.frozen_layers > n_parameterized:
            raise InvalidConfig(
                f"frozen_layers={config.frozen_layers} exceeds {n_parameterized} parameterized layers"
            )
        frozen = {n.id for n in graph.nodes if n.frozen}
        frozen.update(n.id for n in graph.parameterized_nodes()[: config.frozen_layers])

        init_rng = np.random.default_rng([config.seed, 0x1417])
        if initial_tensors is not None:
            # continue from in-memory weights (pipeline stages); reinit flags
            # and shape mismatches still trigger fresh layers
            params0 = net.load_params(initial_tensors, init_rng)
        elif config.tl_method in ("fine_tune", "mmd_adapt"):
            stored = decode_weights(self.repo.weights(base.model_id))
            params0 = net.load_params(stored, init_rng)
        else:  # from_scratch, knowledge_distill, tradaboost (re-seeded per round)
            params0 = net.init_params(init_rng)

        record = self.features.get(config.dataset_id)
        x_train, y_train = self.features.split_arrays(config.dataset_id, "train")
        aug_rng = np.random.default_rng([int(config.aug.seed), 0xA42])
        x_train, y_train = apply_steps(x_train, y_train, config.aug.steps, record.num_classes, aug_rng)
        x_train = x_train.astype(np.float32)
        x_val, y_val = self.features.split_arrays(config.dataset_id, "val")
        if x_train.shape[1] != net.input_dim:
            raise InvalidConfig(
                f"dataset features ({x_train.shape[1]}) do not match graph input ({net.input_dim})"
            )

        teacher_logits = None
        source_train = None
        if config.tl_method == "knowledge_distill":
            teacher_net = ChainNetwork(base.graph)
            teacher_params = decode_weights(self.repo.weights(base.model_id))
            if teacher_net.out_dim != net.out_dim:
                raise IncompatibleDatasets(
                    f"teacher emits {teacher_net.out_dim} classes, student {net.out_dim}"
                )
            teacher_logits = teacher_net.logits(teacher_params, x_train)
        elif config.tl_method in ("mmd_adapt", "tradaboost"):
            source_id = self._source_dataset_id(config, base)
            source_record = self.features.get(source_id)
            xs, ys = self.features.split_arrays(source_id, "train")
            if xs.shape[1] != x_train.shape[1]:
                raise IncompatibleDatasets(
                    f"source features ({xs.shape[1]}) differ from target ({x_train.shape[1]})"
                )
            if config.tl_method == "tradaboost" and source_record.num_classes != record.num_classes:
                raise IncompatibleDatasets("source and target label sets differ")
            source_train = (xs, ys)

        return Resolved(
            config=config,
            graph=graph,
            net=net,
            params0=params0,
            x_train=x_train,
            y_train=y_train,
            x_val=x_val,
            y_val=y_val,
            frozen_ids=frozenset(frozen),
            teacher_logits=teacher_logits,
            source_train=source_train,
        )

    # --- execution ---

    def _objective(self, resolved: Resolved):
        config = resolved.config
        if config.tl_method == "knowledge_distill":
            return kd_objective(
                resolved.net, resolved.x_train, resolved.y_train,
                resolved.teacher_logits, config.kd_temperature, config.kd_alpha,
            )
        if config.tl_method == "mmd_adapt":
            return mmd_objective(
                resolved.net, resolved.x_train, resolved.y_train,
                resolved.source_train[0], config.mmd_weight,
            )
        return ce_objective(resolved.net, resolved.x_train, resolved.y_train)

    def _report(
        self,
        resolved: Resolved,
        accuracy: float,
        train_time_s: float,
        epochs_completed: int,
        latency_ms: float,
        evaluator: str = "real",
    ) -> ValidationReport:
        return ValidationReport(
            accuracy=float(accuracy),
            train_time_s=float(train_time_s),
            inference_latency_ms=float(latency_ms),
            params=count_params(resolved.graph),
            epochs_completed=int(epochs_completed),
            config=resolved.config.to_obj(),
            evaluator=evaluator,
        )

    def run(
        self,
        config: TrainConfig,
        budget_s: float | None = None,
        control: LoopControl | None = None,
        resume: EpochSnapshot | BoostSnapshot | None = None,
        record_history: bool = True,
        simulate_fn=None,
        initial_tensors=None,
    ) -> RunResult:
        """Train per config; with ``budget_s`` the run is time-boxed at epoch
        granularity. Non-executable graphs route to ``simulate_fn`` when given."""
        started = time.perf_counter()
        config.validate()
        probes = []
        if config.graph is not None:
            probes.append(config.graph)
        elif config.base_model_id:
            probes.append(self.repo.get(config.base_model_id).graph)
        if config.tl_method == "knowledge_distill" and config.base_model_id:
            probes.append(self.repo.get(config.base_model_id).graph)  # teacher must run too
        if any(not g.is_executable() for g in probes):
            if simulate_fn is None:
                raise InvalidConfig("graph is not executable by the native trainer")
            report = simulate_fn(config)
            if record_history and self.history is not None:
                self.history.append(config, report)
            return RunResult(report=report, params=None, stopped="completed", graph=probes[0])

        resolved = self.resolve(config, initial_tensors=initial_tensors)
        if config.tl_method == "tradaboost":
            deadline = started + budget_s if budget_s is not None else None
            return self._run_tradaboost(resolved, started, record_history, deadline, control, resume)

        budget = BudgetControl(budget_s, started) if budget_s is not None else None
        outcome = train_loop(
            self._objective(resolved),
            resolved.params0 if resume is None else resume.params,
            len(resolved.x_train),
            lr=config.lr,
            momentum=config.momentum,
            batch_size=config.batch_size,
            epochs=config.epochs,
            seed=config.seed,
            frozen_ids=resolved.frozen_ids,
            start_epoch=resume.next_epoch if resume else 0,
            velocity=resume.velocity if resume else None,
            rng_state=resume.rng_state if resume else None,
            control=CompositeControl(budget, control),
        )
        if outcome.stopped in ("paused", "terminated"):
            snapshot = EpochSnapshot(
                outcome.params, outcome.velocity, outcome.rng_state, outcome.epochs_completed
            )
            return RunResult(report=None, params=outcome.params, stopped=outcome.stopped,
                             snapshot=snapshot, net=resolved.net, graph=resolved.graph)

        accuracy = resolved.net.accuracy(outcome.params, resolved.x_val, resolved.y_val)
        latency = resolved.net.measure_latency_ms(outcome.params)
        report = self._report(resolved, accuracy, outcome.train_time_s,
                              outcome.epochs_completed, latency)
        if record_history and self.history is not None:
            self.history.append(config, report)
        return RunResult(report=report, params=outcome.params, stopped=outcome.stopped,
                         net=resolved.net, graph=resolved.graph)

    def _run_tradaboost(
        self,
        resolved: Resolved,
        started: float,
        record_history: bool,
        deadline: float | None = None,
        control: LoopControl | None = None,
        resume: BoostSnapshot | None = None,
    ) -> RunResult:
        config = resolved.config
        run = TradaboostRun(
            resolved.net, resolved.source_train, (resolved.x_train, resolved.y_train), config,
            inner_control=_TerminateOnly(control) if control else None,
        )
        if resume is not None:
            run.restore(resume.round, resume.w, resume.learners)
        status = run.run(deadline=deadline, round_check=control.check_interrupt if control else None)
        if status in ("paused", "terminated"):
            snapshot = BoostSnapshot(run.round, run.w.copy(), list(run.learners))
            return RunResult(report=None, params=None, stopped=status, snapshot=snapshot,
                             net=resolved.net, graph=resolved.graph)
        ensemble = run.ensemble()
        train_time = time.perf_counter() - started
        accuracy = ensemble.accuracy(resolved.x_val, resolved.y_val)
        latency = resolved.net.measure_latency_ms(ensemble.members[-1][0]) * len(ensemble.members)
        report = self._report(
            resolved, accuracy, train_time,
            ensemble.rounds_completed * config.epochs, latency,
        )
        if record_history and self.history is not None:
            self.history.append(config, report)
        # the published artifact is the final (most target-adapted) member
        return RunResult(report=report, params=ensemble.members[-1][0], stopped="completed",
                         net=resolved.net, ensemble=ensemble, graph=resolved.graph)

    def validate(self, config: TrainConfig, budget_s: float) -> ValidationReport:
        """Time-boxed quality check; always returns a report."""
        if budget_s <= 0:
            raise InvalidConfig("budget must be positive")
        return self.run(config, budget_s=budget_s).report
