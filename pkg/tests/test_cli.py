from __future__ import annotations

import json
import socket
import threading
import time

import numpy as np
import pytest
import uvicorn
from click.testing import CliRunner

from modelps.cli import main
from modelps.graph.draft import graph_to_obj
from modelps.repository import encode_weights
from modelps.service import seeds
from modelps.service.app import create_app
from modelps.service.config import ApiConfig
from modelps.service.state import ServiceState


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="module")
def live(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = ApiConfig(store_dir=str(root / "store"), worker_count=2,
                       port=free_port(), default_validate_budget_s=10.0)
    state = ServiceState(config)
    app = create_app(state=state)
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=config.port, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        assert time.monotonic() < deadline, "server failed to start"
        time.sleep(0.02)
    yield f"http://127.0.0.1:{config.port}", state, root
    server.should_exit = True
    thread.join(timeout=5)
    state.shutdown()


def run_cli(url, *args):
    runner = CliRunner()
    result = runner.invoke(main, ["--server", url, *args], catch_exceptions=False)
    payload = json.loads(result.output) if result.output.strip() else None
    return result.exit_code, payload


def test_list_models_seeded(live):
    url, _, _ = live
    code, models = run_cli(url, "list-models")
    assert code == 0
    assert {m["name"] for m in models} >= {"mlp-blobs-base", "mlp-deep", "cnn-mini"}


def test_list_models_task_filter(live):
    url, _, _ = live
    code, models = run_cli(url, "list-models", "--task", "image_classification")
    assert code == 0
    assert all(m["task"] == "image_classification" for m in models)


def test_publish_via_files(live, tmp_path):
    url, state, _ = live
    graph = seeds.dense_chain([6, 4, 2], prefix="p")
    weights_path = tmp_path / "weights.bin"
    rng = np.random.default_rng(0)
    from modelps.training import ChainNetwork

    net = ChainNetwork(graph)
    weights_path.write_bytes(encode_weights(net.init_params(rng)))
    graph_path = tmp_path / "graph.json"
    graph_path.write_text(json.dumps(graph_to_obj(graph)))
    meta_path = tmp_path / "meta.json"
    meta_path.write_text(json.dumps({
        "name": "cli-model", "task": "tabular_classification", "author": "cli",
        "metadata": {"pretrained_dataset": "none", "accuracy": 0.5, "latency_ms": 0.1},
    }))
    code, result = run_cli(url, "publish", str(graph_path), str(weights_path), "--meta", str(meta_path))
    assert code == 0
    assert result["model_id"].startswith("m-")
    code, models = run_cli(url, "list-models", "--name-contains", "cli-model")
    assert code == 0 and len(models) == 1


def test_validate_malformed_config_exit_1(live, tmp_path):
    url, _, _ = live
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, payload = run_cli(url, "validate", str(bad), "--budget", "5")
    assert code == 1
    assert "error" in payload


def test_validate_unknown_field_exit_1(live, tmp_path):
    url, _, _ = live
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"tl_method": "fine_tune", "surprise": 1}))
    code, payload = run_cli(url, "validate", str(config_path), "--budget", "5")
    assert code == 1
    assert payload["error"]["code"] == "schema_violation"


def test_save_draft_and_reload(live, tmp_path):
    url, state, _ = live
    base = state.repo.retrieve()[0]
    draft_path = tmp_path / "draft.json"
    draft_path.write_text(json.dumps({
        "schema_version": "1",
        "base_model_id": base.model_id,
        "revision": 0,
        "author": "cli",
        "graph": graph_to_obj(base.graph),
        "pending_config": {"lr": 0.01},
    }))
    code, saved = run_cli(url, "save-draft", str(draft_path))
    assert code == 0
    assert saved["revision"] == 1
    # second save from the stale file conflicts
    code, conflict = run_cli(url, "save-draft", str(draft_path), "--draft-id", saved["draft_id"])
    assert code == 1
    assert conflict["error"]["code"] == "stale_revision"


def test_train_wait_and_job_status(live, tmp_path):
    url, state, _ = live
    base = next(r for r in state.repo.retrieve() if r.name == "mlp-blobs-base")
    config_path = tmp_path / "train.json"
    config_path.write_text(json.dumps({
        "tl_method": "fine_tune", "base_model_id": base.model_id,
        "dataset_id": seeds.BLOBS_TGT, "lr": 0.05, "epochs": 3, "seed": 4,
    }))
    code, job = run_cli(url, "train", str(config_path), "--author", "cli", "--wait")
    assert code == 0
    assert job["state"] == "Completed"
    assert job["result_model_id"]
    code, status = run_cli(url, "job", job["job_id"], "status")
    assert code == 0 and status["state"] == "Completed"
    # terminate on a terminal job is a user error (409 -> exit 1)
    code, payload = run_cli(url, "job", job["job_id"], "terminate")
    assert code == 1 and payload["error"]["code"] == "illegal_transition"


def test_datasets_list_and_register(live, tmp_path):
    url, _, _ = live
    code, datasets = run_cli(url, "datasets", "list")
    assert code == 0
    assert any(d["dataset_id"] == seeds.BLOBS_TGT for d in datasets)
    spec = tmp_path / "ds.json"
    spec.write_text(json.dumps({
        "name": "cli-ds", "tags": ["cli"],
        "generator": {"kind": "blobs", "params": {"n": 80, "d": 3, "k": 2}, "seed": 9},
    }))
    code, created = run_cli(url, "datasets", "register", str(spec))
    assert code == 0 and created["dataset_id"].startswith("d-")


def test_genie_recommendations_satisfy_constraints(live, tmp_path):
    url, state, _ = live
    request_path = tmp_path / "genie.json"
    request_path.write_text(json.dumps({
        "task": "image_classification", "dataset_id": seeds.BLOBS_TGT,
        "constraints": [{"metric": "accuracy", "op": ">=", "value": 0.5}],
        "targets": [{"metric": "latency_ms", "direction": "minimize"}],
        "top_k": 3, "explore_budget": 6, "tl_method": "fine_tune", "seed": 77,
    }))
    code, result = run_cli(url, "genie", str(request_path))
    assert code == 0
    entries = result["recommendation"]["entries"]
    assert 0 < len(entries) <= 3
    for entry in entries:  # client-side re-check of the constraint
        assert entry["report"]["accuracy"] >= 0.5


def test_connection_error_exit_2(tmp_path):
    request_path = tmp_path / "r.json"
    request_path.write_text("{}")
    runner = CliRunner()
    result = runner.invoke(main, ["--server", "http://127.0.0.1:9", "--timeout", "0.5",
                                  "list-models"], catch_exceptions=False)
    assert result.exit_code == 2
    assert json.loads(result.output)["error"]["code"] == "connection"
