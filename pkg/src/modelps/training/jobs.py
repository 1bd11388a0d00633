"""Training job lifecycle and the single-node worker pool.

State machine::

    Queued -> Running | Terminated
    Running -> Paused | Completed | Terminated | Failed
    Paused -> Running | Terminated
    Completed / Terminated / Failed absorb

Terminate is immediate: the state flips at the API call and a running
worker abandons the computation at the next batch boundary. Pause takes
effect at the next epoch boundary (round boundary for boosting) and writes
a checkpoint: weight/velocity blob plus a JSON sidecar carrying job id,
epoch, and the training generator state, so resume is bit-exact.
"""

from __future__ import annotations

import json
import threading
import traceback
import uuid
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import IllegalTransition, InvalidConfig, UnknownJob
from ..repository.blobs import decode_weights, encode_weights
from .config import TrainConfig
from .core import PAUSE, RUN, STOP, LoopControl
from .validator import BoostSnapshot, EpochSnapshot, Trainer, ValidationReport

QUEUED = "Queued"
RUNNING = "Running"
PAUSED = "Paused"
COMPLETED = "Completed"
TERMINATED = "Terminated"
FAILED = "Failed"

TERMINAL = (COMPLETED, TERMINATED, FAILED)

LEGAL_TRANSITIONS: dict[str, set[str]] = {
    QUEUED: {RUNNING, TERMINATED},
    RUNNING: {PAUSED, COMPLETED, TERMINATED, FAILED},
    PAUSED: {RUNNING, TERMINATED},
    COMPLETED: set(),
    TERMINATED: set(),
    FAILED: set(),
}


@dataclass
class TrainJob:
    job_id: str
    config: TrainConfig
    author: str = ""
    publish_result: bool = True
    state: str = QUEUED
    device: str | None = None
    pinned_device: str | None = None
    fail_reason: str | None = None
    result: ValidationReport | None = None
    result_model_id: str | None = None
    checkpoint: object | None = None  # EpochSnapshot | BoostSnapshot
    checkpoint_epoch: int = 0
    pause_requested: bool = field(default=False, repr=False)
    terminate_requested: bool = field(default=False, repr=False)

    def to_obj(self) -> dict:
        return {
            "job_id": self.job_id,
            "state": self.state,
            "device": self.device,
            "pinned_device": self.pinned_device,
            "fail_reason": self.fail_reason,
            "result": self.result.to_obj() if self.result else None,
            "result_model_id": self.result_model_id,
            "checkpoint_epoch": self.checkpoint_epoch,
            "config": self.config.to_obj(),
        }


class _JobControl(LoopControl):
    def __init__(self, job: TrainJob):
        self.job = job

    def check_interrupt(self) -> str:
        if self.job.terminate_requested:
            return STOP
        if self.job.pause_requested:
            return PAUSE
        return RUN

    def on_batch(self, epoch, batch):
        return STOP if self.job.terminate_requested else RUN

    def on_epoch_end(self, epoch, snapshot):
        if self.job.terminate_requested:
            return STOP
        if self.job.pause_requested:
            return PAUSE
        return RUN


class JobPool:
    """FIFO queue over ``worker_count`` logical devices cpu0..cpuN."""

    def __init__(
        self,
        trainer: Trainer,
        worker_count: int = 1,
        checkpoints_dir: str | Path | None = None,
        on_complete=None,
        simulate_fn=None,
    ):
        if worker_count < 1:
            raise InvalidConfig("worker_count must be >= 1")
        self.trainer = trainer
        self.worker_count = worker_count
        self.devices = [f"cpu{i}" for i in range(worker_count)]
        self.checkpoints_dir = Path(checkpoints_dir) if checkpoints_dir else None
        if self.checkpoints_dir:
            self.checkpoints_dir.mkdir(parents=True, exist_ok=True)
        self.on_complete = on_complete  # callable(job, run_result) -> model_id | None
        self.simulate_fn = simulate_fn
        self._jobs: dict[str, TrainJob] = {}
        self._queue: deque[str] = deque()
        self._cond = threading.Condition()
        self._shutdown = False
        self._threads = [
            threading.Thread(target=self._worker, args=(device,), daemon=True, name=f"worker-{device}")
            for device in self.devices
        ]
        for t in self._threads:
            t.start()

    # --- lifecycle API ---

    def submit(self, config: TrainConfig, author: str = "", publish: bool = True) -> str:
        config.validate()
        job = TrainJob(job_id="j-" + uuid.uuid4().hex[:12], config=config,
                       author=author, publish_result=publish)
        with self._cond:
            self._jobs[job.job_id] = job
            self._queue.append(job.job_id)
            self._cond.notify_all()
        return job.job_id

    def _get(self, job_id: str) -> TrainJob:
        job = self._jobs.get(job_id)
        if job is None:
            raise UnknownJob(f"no job with id {job_id!r}")
        return job

    def get(self, job_id: str) -> TrainJob:
        with self._cond:
            return self._get(job_id)

    def list(self) -> list[TrainJob]:
        with self._cond:
            return sorted(self._jobs.values(), key=lambda j: j.job_id)

    def pause(self, job_id: str) -> None:
        with self._cond:
            job = self._get(job_id)
            if job.state != RUNNING:
                raise IllegalTransition(job.state, PAUSED)
            job.pause_requested = True

    def resume(self, job_id: str) -> None:
        with self._cond:
            job = self._get(job_id)
            if job.state != PAUSED:
                raise IllegalTransition(job.state, RUNNING)
            job.pause_requested = False
            if job_id not in self._queue:
                self._queue.append(job_id)
            self._cond.notify_all()

    def terminate(self, job_id: str) -> None:
        with self._cond:
            job = self._get(job_id)
            if job.state in TERMINAL:
                raise IllegalTransition(job.state, TERMINATED)
            job.terminate_requested = True
            job.state = TERMINATED  # immediate and final
            if job_id in self._queue:
                self._queue.remove(job_id)
            self._cond.notify_all()

    def to_device(self, job_id: str, device: str) -> None:
        with self._cond:
            job = self._get(job_id)
            if device not in self.devices:
                raise InvalidConfig(f"unknown device {device!r}; have {self.devices}")
            if job.state not in (QUEUED, PAUSED):
                raise IllegalTransition(job.state, job.state)
            job.pinned_device = device

    def wait(self, job_id: str, timeout: float = 60.0, until=TERMINAL + (PAUSED,)) -> TrainJob:
        """Test/CLI helper: block until the job reaches one of ``until``."""
        import time as _time

        deadline = _time.monotonic() + timeout
        while True:
            with self._cond:
                job = self._get(job_id)
                if job.state in until:
                    return job
            if _time.monotonic() > deadline:
                raise TimeoutError(f"job {job_id} still {job.state} after {timeout}s")
            _time.sleep(0.01)

    def shutdown(self) -> None:
        with self._cond:
            self._shutdown = True
            self._cond.notify_all()
        for t in self._threads:
            t.join(timeout=5.0)

    # --- worker side ---

    def _claim(self, device: str) -> TrainJob | None:
        for job_id in self._queue:
            job = self._jobs[job_id]
            if job.pinned_device in (None, device):
                self._queue.remove(job_id)
                job.state = RUNNING
                job.device = device
                return job
        return None

    def _worker(self, device: str) -> None:
        while True:
            with self._cond:
                job = self._claim(device)
                while job is None and not self._shutdown:
                    self._cond.wait(timeout=0.5)
                    job = self._claim(device)
                if self._shutdown and job is None:
                    return
            try:
                self._execute(job)
            except Exception as exc:  # worker crash: job Failed, slot reclaimed
                with self._cond:
                    if job.state == RUNNING:
                        job.state = FAILED
                        job.fail_reason = f"{type(exc).__name__}: {exc}"
                        job.device = None
                        self._cond.notify_all()
                traceback.print_exc()

    def _execute(self, job: TrainJob) -> None:
        result = self.trainer.run(
            job.config,
            control=_JobControl(job),
            resume=job.checkpoint,
            record_history=False,  # appended on completion below
            simulate_fn=self.simulate_fn,
        )
        with self._cond:
            job.device = None
            if job.state == TERMINATED or result.stopped == "terminated":
                job.state = TERMINATED
                self._cond.notify_all()
                return
            if result.stopped == "paused":
                job.checkpoint = result.snapshot
                if isinstance(result.snapshot, EpochSnapshot):
                    job.checkpoint_epoch = result.snapshot.next_epoch
                elif isinstance(result.snapshot, BoostSnapshot):
                    job.checkpoint_epoch = result.snapshot.round
                job.pause_requested = False
                job.state = PAUSED
                self._write_checkpoint(job)
                self._cond.notify_all()
                return
        # completed (with or without a budget stop) outside the lock:
        # publishing and history appends can take a moment
        model_id = None
        if self.on_complete is not None:
            model_id = self.on_complete(job, result)
        if self.trainer.history is not None and result.report is not None:
            self.trainer.history.append(job.config, result.report)
        with self._cond:
            if job.state == TERMINATED:  # terminate raced completion; result discarded
                self._cond.notify_all()
                return
            job.result = result.report
            job.result_model_id = model_id
            job.state = COMPLETED
            self._cond.notify_all()

    # --- checkpoint persistence ---

    def _write_checkpoint(self, job: TrainJob) -> None:
        if self.checkpoints_dir is None or job.checkpoint is None:
            return
        snapshot = job.checkpoint
        if isinstance(snapshot, EpochSnapshot):
            tensors = {}
            for nid in snapshot.params:
                tensors[nid] = dict(snapshot.params[nid])
                for key, arr in snapshot.velocity[nid].items():
                    tensors[nid][f"{key}_vel"] = arr
            sidecar = {
                "job_id": job.job_id,
                "epoch": snapshot.next_epoch,
                "rng_state": snapshot.rng_state,
                "kind": "epoch",
            }
        else:  # BoostSnapshot
            tensors = {}
            for i, (params, _) in enumerate(snapshot.learners):
                for nid, named in params.items():
                    tensors[f"member{i}::{nid}"] = named
            sidecar = {
                "job_id": job.job_id,
                "epoch": snapshot.round,
                "rng_state": {"round": snapshot.round},
                "kind": "boost",
                "w": [float(v) for v in snapshot.w],
                "vote_weights": [float(w) for _, w in snapshot.learners],
            }
        blob = encode_weights(tensors)
        (self.checkpoints_dir / f"{job.job_id}.blob").write_bytes(blob)
        (self.checkpoints_dir / f"{job.job_id}.json").write_text(
            json.dumps(sidecar, separators=(",", ":")), encoding="utf-8"
        )

    def load_checkpoint(self, job_id: str):
        """Rehydrate a persisted checkpoint (used when in-memory state is gone)."""
        if self.checkpoints_dir is None:
            return None
        sidecar_path = self.checkpoints_dir / f"{job_id}.json"
        blob_path = self.checkpoints_dir / f"{job_id}.blob"
        if not sidecar_path.exists() or not blob_path.exists():
            return None
        sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
        tensors = decode_weights(blob_path.read_bytes())
        if sidecar.get("kind") == "boost":
            members: dict[int, dict] = {}
            for key, named in tensors.items():
                idx, nid = key.split("::", 1)
                members.setdefault(int(idx.removeprefix("member")), {})[nid] = named
            learners = [
                (members[i], sidecar["vote_weights"][i]) for i in sorted(members)
            ]
            return BoostSnapshot(sidecar["epoch"], np.asarray(sidecar["w"]), learners)
        params = {}
        velocity = {}
        for nid, named in tensors.items():
            params[nid] = {k: v for k, v in named.items() if not k.endswith("_vel")}
            velocity[nid] = {k.removesuffix("_vel"): v for k, v in named.items() if k.endswith("_vel")}
        return EpochSnapshot(params, velocity, sidecar["rng_state"], sidecar["epoch"])
