from __future__ import annotations

import time

import numpy as np
import pytest

from modelps.errors import IllegalTransition, InvalidConfig, UnknownJob
from modelps.features import FeatureStore
from modelps.repository import ModelRepository
from modelps.service import seeds
from modelps.training import (
    COMPLETED,
    FAILED,
    LEGAL_TRANSITIONS,
    PAUSED,
    QUEUED,
    RUNNING,
    TERMINATED,
    JobPool,
    TrainConfig,
    Trainer,
    params_equal,
)


@pytest.fixture(scope="module")
def platform(tmp_path_factory):
    root = tmp_path_factory.mktemp("jobs")
    repo = ModelRepository(root / "store")
    features = FeatureStore(root / "store")
    seeds.seed_store(repo, features)
    return root, repo, features, Trainer(repo, features)


def make_pool(platform, workers=1, results=None):
    root, repo, features, trainer = platform

    def on_complete(job, result):
        if results is not None and result.params is not None:
            results[job.job_id] = result.params
        return None

    return JobPool(trainer, worker_count=workers,
                   checkpoints_dir=root / "store" / "checkpoints",
                   on_complete=on_complete)


def config_for(repo, epochs, seed=1, **kw):
    base = next(r.model_id for r in repo.retrieve() if r.name == "mlp-blobs-base")
    return TrainConfig(tl_method="fine_tune", base_model_id=base,
                       dataset_id=seeds.BLOBS_TGT, lr=0.05, epochs=epochs,
                       batch_size=32, seed=seed, **kw)


def test_job_runs_to_completion(platform):
    _, repo, _, _ = platform
    pool = make_pool(platform)
    try:
        job_id = pool.submit(config_for(repo, epochs=3))
        job = pool.wait(job_id, timeout=30)
        assert job.state == COMPLETED
        assert job.result is not None
        assert job.result.epochs_completed == 3
    finally:
        pool.shutdown()


def test_third_job_queued_until_slot_frees(platform):
    _, repo, _, _ = platform
    pool = make_pool(platform, workers=2)
    try:
        long_cfg = config_for(repo, epochs=100_000)
        a = pool.submit(long_cfg)
        b = pool.submit(config_for(repo, epochs=100_000, seed=2))
        pool.wait(a, timeout=10, until=(RUNNING,))
        pool.wait(b, timeout=10, until=(RUNNING,))
        c = pool.submit(config_for(repo, epochs=1, seed=3))
        time.sleep(0.3)
        assert pool.get(c).state == QUEUED
        pool.terminate(a)
        job_c = pool.wait(c, timeout=30)
        assert job_c.state == COMPLETED
        pool.terminate(b)
    finally:
        pool.shutdown()


def test_fifo_order_single_worker(platform):
    _, repo, _, _ = platform
    pool = make_pool(platform, workers=1)
    try:
        blocker = pool.submit(config_for(repo, epochs=100_000))
        pool.wait(blocker, timeout=10, until=(RUNNING,))
        b = pool.submit(config_for(repo, epochs=1, seed=5))
        c = pool.submit(config_for(repo, epochs=1, seed=6))
        assert pool.get(b).state == QUEUED and pool.get(c).state == QUEUED
        pool.terminate(blocker)
        pool.wait(b, timeout=30)
        # FIFO: b must finish before c starts, so when b completed,
        # c is either Queued/Running but never finished earlier
        assert pool.get(b).state == COMPLETED
        pool.wait(c, timeout=30)
    finally:
        pool.shutdown()


def test_terminate_queued_job_never_runs(platform):
    _, repo, _, _ = platform
    pool = make_pool(platform, workers=1)
    try:
        blocker = pool.submit(config_for(repo, epochs=100_000))
        pool.wait(blocker, timeout=10, until=(RUNNING,))
        queued = pool.submit(config_for(repo, epochs=1, seed=7))
        pool.terminate(queued)
        assert pool.get(queued).state == TERMINATED
        pool.terminate(blocker)
        pool.wait(blocker, timeout=10)
        time.sleep(0.2)
        assert pool.get(queued).state == TERMINATED
        assert pool.get(queued).result is None
    finally:
        pool.shutdown()


def test_pause_resume_matches_uninterrupted_run_bitwise(platform):
    _, repo, _, _ = platform
    results = {}
    pool = make_pool(platform, results=results)
    try:
        config = config_for(repo, epochs=400, seed=11)
        uninterrupted = pool.submit(config)
        pool.wait(uninterrupted, timeout=120)

        paused = pool.submit(config)
        pool.wait(paused, timeout=10, until=(RUNNING,))
        time.sleep(0.4)
        pool.pause(paused)
        job = pool.wait(paused, timeout=60, until=(PAUSED, COMPLETED))
        assert job.state == PAUSED, "job completed before pause took effect; raise epochs"
        assert job.checkpoint_epoch >= 1
        ckpt = pool.checkpoints_dir / f"{paused}.blob"
        assert ckpt.exists()
        pool.resume(paused)
        job = pool.wait(paused, timeout=120, until=(COMPLETED,))
        assert job.state == COMPLETED
        assert params_equal(results[paused], results[uninterrupted])
    finally:
        pool.shutdown()


def test_to_device_pins_execution(platform):
    _, repo, _, _ = platform
    pool = make_pool(platform, workers=2)
    try:
        blocker = pool.submit(config_for(repo, epochs=100_000))
        pool.wait(blocker, timeout=10, until=(RUNNING,))
        job_id = pool.submit(config_for(repo, epochs=100_000, seed=9))
        # the queued job can be repinned; a bad device name is rejected
        with pytest.raises(InvalidConfig):
            pool.to_device(job_id, "gpu0")
        pool.to_device(job_id, "cpu1")
        job = pool.wait(job_id, timeout=10, until=(RUNNING,))
        assert job.device == "cpu1"
        pool.terminate(blocker)
        pool.terminate(job_id)
    finally:
        pool.shutdown()


def test_worker_crash_marks_job_failed_and_frees_slot(platform):
    _, repo, _, _ = platform
    pool = make_pool(platform, workers=1)
    try:
        bad = TrainConfig(tl_method="fine_tune",
                          base_model_id=next(r.model_id for r in repo.retrieve()),
                          dataset_id="d-missing", epochs=1)
        job_id = pool.submit(bad)
        job = pool.wait(job_id, timeout=30)
        assert job.state == FAILED
        assert "d-missing" in job.fail_reason
        ok = pool.submit(config_for(repo, epochs=1, seed=13))
        assert pool.wait(ok, timeout=30).state == COMPLETED
    finally:
        pool.shutdown()


def test_unknown_job(platform):
    pool = make_pool(platform)
    try:
        with pytest.raises(UnknownJob):
            pool.pause("j-missing")
    finally:
        pool.shutdown()


def test_state_machine_exhaustive_over_states_and_calls(platform):
    """Drive a job into every state and exhaustively check each lifecycle
    call: allowed exactly when the transition is legal, state intact on
    rejection. Legality depends only on the current state, so depth-1
    enumeration covers all traces."""
    _, repo, _, _ = platform
    pool = make_pool(platform, workers=1)

    def fresh(state):
        if state == QUEUED:
            blocker = pool.submit(config_for(repo, epochs=100_000, seed=20))
            pool.wait(blocker, timeout=10, until=(RUNNING,))
            job_id = pool.submit(config_for(repo, epochs=1, seed=21))
            return job_id, [blocker]
        if state == RUNNING:
            job_id = pool.submit(config_for(repo, epochs=100_000, seed=22))
            pool.wait(job_id, timeout=10, until=(RUNNING,))
            return job_id, []
        if state == PAUSED:
            job_id = pool.submit(config_for(repo, epochs=100_000, seed=23))
            pool.wait(job_id, timeout=10, until=(RUNNING,))
            pool.pause(job_id)
            pool.wait(job_id, timeout=30, until=(PAUSED,))
            return job_id, []
        if state == COMPLETED:
            job_id = pool.submit(config_for(repo, epochs=1, seed=24))
            pool.wait(job_id, timeout=30, until=(COMPLETED,))
            return job_id, []
        if state == TERMINATED:
            job_id = pool.submit(config_for(repo, epochs=100_000, seed=25))
            pool.wait(job_id, timeout=10, until=(RUNNING,))
            pool.terminate(job_id)
            return job_id, []
        if state == FAILED:
            bad = TrainConfig(tl_method="fine_tune",
                              base_model_id=next(r.model_id for r in repo.retrieve()),
                              dataset_id="d-missing", epochs=1)
            job_id = pool.submit(bad)
            pool.wait(job_id, timeout=30, until=(FAILED,))
            return job_id, []
        raise AssertionError(state)

    # each operation's valid source states; its effect is a transition from
    # the LEGAL_TRANSITIONS table (pause/resume act asynchronously)
    operations = {
        "pause": (pool.pause, {RUNNING}, PAUSED),
        "resume": (pool.resume, {PAUSED}, RUNNING),
        "terminate": (pool.terminate, {QUEUED, RUNNING, PAUSED}, TERMINATED),
    }
    try:
        for state in (QUEUED, RUNNING, PAUSED, COMPLETED, TERMINATED, FAILED):
            for name, (op, sources, target) in operations.items():
                job_id, cleanup = fresh(state)
                before = pool.get(job_id).state
                assert before == state
                if state in sources:
                    assert target in LEGAL_TRANSITIONS[state], (state, name)
                    op(job_id)  # must not raise
                    after = pool.get(job_id).state
                    assert after == state or after in LEGAL_TRANSITIONS[state]
                else:
                    with pytest.raises(IllegalTransition):
                        op(job_id)
                    assert pool.get(job_id).state == state  # rejection is a no-op
                for job in [job_id] + cleanup:
                    if pool.get(job).state not in (COMPLETED, TERMINATED, FAILED):
                        try:
                            pool.terminate(job)
                        except IllegalTransition:
                            pass
    finally:
        pool.shutdown()
