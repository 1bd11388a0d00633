"""SGD-with-momentum training loop with epoch-boundary control.

The loop is deterministic given (objective, initial params, seed): batch
order and dropout masks come from one generator whose state is snapshotted
at every epoch boundary, so a paused run resumed from a checkpoint replays
the exact update sequence of an uninterrupted one.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteLoss
from .network import ChainNetwork, Params, clone_params, zeros_like_params

RUN = "run"
STOP = "stop"
ABORT_EPOCH = "abort_epoch"
PAUSE = "pause"


class LoopControl:
    """Override points for budget enforcement and job lifecycle."""

    def check_interrupt(self) -> str:
        """Coarse-grained pause/terminate poll for ensemble round boundaries."""
        return RUN

    def on_epoch_start(self, epoch: int, estimate_s: float | None) -> str:
        return RUN

    def on_first_batch(self, epoch: int, estimate_s: float) -> str:
        """Called after the first batch of an epoch with the projected epoch cost."""
        return RUN

    def on_batch(self, epoch: int, batch: int) -> str:
        return RUN

    def on_epoch_end(self, epoch: int, snapshot: "EpochSnapshot") -> str:
        return RUN


@dataclass
class EpochSnapshot:
    """State at an epoch boundary; enough to resume bit-exactly."""

    params: Params
    velocity: Params
    rng_state: dict
    next_epoch: int


@dataclass
class TrainOutcome:
    params: Params
    velocity: Params
    epochs_completed: int
    train_time_s: float
    losses: list = field(default_factory=list)
    stopped: str = "completed"  # completed | budget | paused | terminated
    rng_state: dict | None = None


def sgd_update(
    params: Params,
    velocity: Params,
    grads: Params,
    lr: float,
    momentum: float,
    frozen_ids: frozenset[str] = frozenset(),
) -> None:
    """In-place momentum step on every non-frozen tensor; frozen layers stay
    bitwise untouched."""
    for nid, tensors in grads.items():
        if nid in frozen_ids:
            continue
        for key, grad in tensors.items():
            v = velocity[nid][key]
            v *= momentum
            v += grad
            params[nid][key] -= (lr * v).astype(params[nid][key].dtype)


def train_step(
    net: ChainNetwork,
    params: Params,
    batch_x: np.ndarray,
    batch_y: np.ndarray,
    lr: float,
    momentum: float = 0.0,
    frozen_ids: frozenset[str] = frozenset(),
    velocity: Params | None = None,
    sample_weights=None,
):
    """One plain cross-entropy SGD step; returns (params', velocity', loss)."""
    from .losses import cross_entropy

    params = clone_params(params)
    velocity = clone_params(velocity) if velocity is not None else zeros_like_params(params)
    logits, cache = net.forward(params, batch_x, train=False)
    loss, grad_logits = cross_entropy(logits, batch_y, sample_weights)
    if not np.isfinite(loss):
        raise NonFiniteLoss(f"loss diverged: {loss}")
    grads = net.backward(params, cache, grad_logits)
    sgd_update(params, velocity, grads, lr, momentum, frozen_ids)
    return params, velocity, loss


def train_loop(
    objective,
    params: Params,
    n_samples: int,
    *,
    lr: float,
    momentum: float,
    batch_size: int,
    epochs: int,
    seed: int,
    frozen_ids: frozenset[str] = frozenset(),
    start_epoch: int = 0,
    velocity: Params | None = None,
    rng_state: dict | None = None,
    control: LoopControl | None = None,
) -> TrainOutcome:
    """Run epochs of minibatch SGD.

    ``objective(params, indices, rng) -> (loss, grads)`` owns the forward
    and backward passes; the loop owns shuffling, the update rule, epoch
    accounting, and the control hooks.
    """
    control = control or LoopControl()
    params = clone_params(params)
    velocity = clone_params(velocity) if velocity is not None else zeros_like_params(params)
    rng = np.random.default_rng([seed, 0x10C0])
    if rng_state is not None:
        rng.bit_generator.state = rng_state

    outcome = TrainOutcome(params, velocity, start_epoch, 0.0)
    epoch_times: list[float] = []
    started = time.perf_counter()

    epoch = start_epoch
    while epoch < epochs:
        estimate = sum(epoch_times) / len(epoch_times) if epoch_times else None
        verdict = control.on_epoch_start(epoch, estimate)
        if verdict == STOP:
            outcome.stopped = "budget"
            break

        # epoch-start snapshot so an aborted epoch can be rolled back
        saved = EpochSnapshot(clone_params(params), clone_params(velocity), rng.bit_generator.state, epoch)
        epoch_started = time.perf_counter()
        order = rng.permutation(n_samples)
        n_batches = max(1, int(np.ceil(n_samples / batch_size)))
        aborted = False
        epoch_losses = []
        for b in range(n_batches):
            indices = order[b * batch_size : (b + 1) * batch_size]
            loss, grads = objective(params, indices, rng)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"loss diverged at epoch {epoch} batch {b}: {loss}")
            sgd_update(params, velocity, grads, lr, momentum, frozen_ids)
            epoch_losses.append(loss)
            if b == 0:
                projected = (time.perf_counter() - epoch_started) * n_batches
                verdict = control.on_first_batch(epoch, projected)
            else:
                verdict = control.on_batch(epoch, b)
            if verdict in (ABORT_EPOCH, STOP):
                aborted = True
                break
        if aborted:
            params = saved.params
            velocity = saved.velocity
            rng.bit_generator.state = saved.rng_state
            outcome.stopped = "budget" if verdict == ABORT_EPOCH else "terminated"
            break

        epoch_times.append(time.perf_counter() - epoch_started)
        outcome.losses.append(float(np.mean(epoch_losses)))
        epoch += 1
        outcome.epochs_completed = epoch
        snapshot = EpochSnapshot(params, velocity, rng.bit_generator.state, epoch)
        verdict = control.on_epoch_end(epoch - 1, snapshot)
        if verdict == PAUSE:
            outcome.stopped = "paused"
            break
        if verdict == STOP:
            outcome.stopped = "terminated"
            break

    outcome.params = params
    outcome.velocity = velocity
    outcome.train_time_s = time.perf_counter() - started
    outcome.rng_state = rng.bit_generator.state
    return outcome


def ce_objective(net: ChainNetwork, x: np.ndarray, y: np.ndarray, sample_weights=None):
    """Plain cross-entropy objective over dataset arrays."""
    from .losses import cross_entropy

    def objective(params, indices, rng):
        bx, by = x[indices], y[indices]
        bw = sample_weights[indices] if sample_weights is not None else None
        logits, cache = net.forward(params, bx, train=True, rng=rng)
        loss, grad_logits = cross_entropy(logits, by, bw)
        return loss, net.backward(params, cache, grad_logits)

    return objective


def kd_objective(
    net: ChainNetwork,
    x: np.ndarray,
    y: np.ndarray,
    teacher_logits: np.ndarray,
    temperature: float,
    alpha: float,
):
    """Distillation objective against precomputed teacher logits."""
    from .losses import kd_loss_and_grad

    def objective(params, indices, rng):
        bx, by, bt = x[indices], y[indices], teacher_logits[indices]
        logits, cache = net.forward(params, bx, train=True, rng=rng)
        loss, grad_logits = kd_loss_and_grad(logits, bt, by, temperature, alpha)
        return loss, net.backward(params, cache, grad_logits)

    return objective


def mmd_objective(
    net: ChainNetwork,
    x: np.ndarray,
    y: np.ndarray,
    source_x: np.ndarray,
    weight: float,
):
    """Cross-entropy plus an MMD penalty aligning hidden features with a
    source batch drawn fresh each step."""
    from .losses import cross_entropy, mmd_linear_with_grads

    def objective(params, indices, rng):
        bx, by = x[indices], y[indices]
        sx = source_x[rng.integers(0, len(source_x), size=len(indices))]
        logits, cache = net.forward(params, bx, train=True, rng=rng)
        loss, grad_logits = cross_entropy(logits, by)
        s_logits, s_cache = net.forward(params, sx, train=True, rng=rng)
        h_t = cache[0][net.head_index]
        h_s = s_cache[0][net.head_index]
        penalty, grad_t, grad_s = mmd_linear_with_grads(h_t, h_s)
        grads = net.backward(params, cache, grad_logits, inject={net.head_index: weight * grad_t})
        s_grads = net.backward(params, s_cache, np.zeros_like(s_logits), inject={net.head_index: weight * grad_s})
        for nid, tensors in s_grads.items():
            for key, grad in tensors.items():
                grads[nid][key] = grads[nid][key] + grad
        return loss + weight * penalty, grads

    return objective
