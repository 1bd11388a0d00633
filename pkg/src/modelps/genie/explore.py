"""Random sampling + successive halving over epoch budgets.

Rung schedule with reduction factor eta: evaluate all sampled configs at r
epochs, keep the top 1/eta by the primary target, re-evaluate at eta*r
epochs, repeat until one survivor. Failed evaluations are excluded from
promotion but still consume budget.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .types import Target, Trial, metric_value


@dataclass
class ExploreResult:
    trials: list  # all sampled trials with their final evaluation
    rung_sizes: list = field(default_factory=list)

    def succeeded(self) -> list:
        return [t for t in self.trials if t.report is not None]


def _rank_value(trial: Trial, primary: Target) -> float:
    value = metric_value(trial.report, primary.metric)
    return value if primary.direction == "minimize" else -value


def explore(
    sample_fn,
    evaluate_fn,
    budget: int,
    seed: int,
    primary: Target,
    *,
    eta: int = 3,
    epochs_cap: int = 20,
    on_evaluation=None,
    max_workers: int = 1,
) -> ExploreResult:
    """``sample_fn(rng) -> TrainConfig``; ``evaluate_fn(config) -> report``
    (exceptions mark the trial failed); ``on_evaluation(trial)`` fires once
    per completed evaluation, in trial order, for history logging."""
    rng = np.random.default_rng([seed, 0xE8])
    trials = [Trial(i, sample_fn(rng)) for i in range(budget)]
    result = ExploreResult(trials)

    def run_rung(alive: list, epochs: int) -> None:
        staged = [(t, t.config.with_epochs(min(epochs, epochs_cap))) for t in alive]

        def one(pair):
            trial, config = pair
            try:
                out = evaluate_fn(config)
                # pipeline evaluators return (report, [(stage_cfg, stage_report), ...])
                # and may hand back the true final-stage config as a third element
                if isinstance(out, tuple):
                    report, stages = out[0], out[1]
                    config = out[2] if len(out) > 2 else config
                else:
                    report, stages = out, []
                return config, report, stages, None
            except Exception as exc:  # noqa: BLE001 - trial failure is data
                return config, None, [], f"{type(exc).__name__}: {exc}"

        if max_workers > 1 and len(staged) > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                outcomes = list(pool.map(one, staged))
        else:
            outcomes = [one(p) for p in staged]
        for (trial, _), (config, report, stages, error) in zip(staged, outcomes):
            trial.config = config
            trial.report = report
            trial.error = error
            trial.stage_records = stages
            if on_evaluation is not None and report is not None:
                on_evaluation(trial)

    alive = list(trials)
    epochs = 1
    result.rung_sizes.append(len(alive))
    run_rung(alive, epochs)
    while len(alive) > 1:
        survivors = [t for t in alive if t.report is not None]
        if not survivors:
            break
        keep = max(1, len(alive) // eta)
        survivors.sort(key=lambda t: (_rank_value(t, primary), t.index))
        alive = survivors[:keep]
        epochs *= eta
        result.rung_sizes.append(len(alive))
        run_rung(alive, epochs)
    return result
