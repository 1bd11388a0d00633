"""Thin HTTP client for the service, plus the `serve` entry point.

Every command prints JSON to stdout and exits 0 on success, 1 on a user
error (4xx), 2 on an internal/connection error.
"""

from __future__ import annotations

import base64
import json
import os
import sys
import time
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_USER = 1
EXIT_INTERNAL = 2


def default_server() -> str:
    if os.environ.get("MODELPS_SERVER"):
        return os.environ["MODELPS_SERVER"]
    port = os.environ.get("MODELPS_PORT", "7151")
    return f"http://127.0.0.1:{port}"


def emit(payload, code: int = EXIT_OK):
    click.echo(json.dumps(payload, indent=2, sort_keys=False))
    sys.exit(code)


def fail(payload, code: int):
    click.echo(json.dumps(payload, indent=2, sort_keys=False))
    sys.exit(code)


def request(ctx, method: str, path: str, **kw):
    server = ctx.obj["server"]
    try:
        response = httpx.request(method, server + path, timeout=ctx.obj["timeout"], **kw)
    except httpx.HTTPError as exc:
        fail({"error": {"code": "connection", "message": f"{type(exc).__name__}: {exc}"}}, EXIT_INTERNAL)
    if response.status_code >= 500:
        fail(_json_or_text(response), EXIT_INTERNAL)
    if response.status_code >= 400:
        fail(_json_or_text(response), EXIT_USER)
    return response.json()


def _json_or_text(response) -> dict:
    try:
        return response.json()
    except ValueError:
        return {"error": {"code": "http", "message": response.text}}


def load_json_file(path: str, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        fail({"error": {"code": "missing_file", "message": f"{what} file not found: {path}"}}, EXIT_USER)
    except json.JSONDecodeError as exc:
        fail({"error": {"code": "schema_violation", "message": f"{what} is not valid JSON: {exc}",
                        "detail": {"path": path}}}, EXIT_USER)


@click.group()
@click.option("--server", default=None, help="Service base URL (default: MODELPS_SERVER or localhost)")
@click.option("--timeout", default=600.0, show_default=True, help="HTTP timeout in seconds")
@click.pass_context
def main(ctx, server, timeout):
    """Client for the collaborative model-editing service."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = (server or default_server()).rstrip("/")
    ctx.obj["timeout"] = timeout


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--store", default=None, help="Store directory")
@click.option("--workers", type=int, default=None)
@click.option("--budget", type=float, default=None, help="Default validate budget (s)")
@click.option("--seed", type=int, default=None)
@click.option("--config", "config_path", default=None, help="JSON config file")
def serve(host, port, store, workers, budget, seed, config_path):
    """Run the HTTP service (blocking)."""
    from .service.app import serve as run_service
    from .service.config import ApiConfig

    config = ApiConfig.load(
        config_path, host=host, port=port, store_dir=store,
        worker_count=workers, default_validate_budget_s=budget, seed=seed,
    )
    click.echo(json.dumps({"serving": {"host": config.host, "port": config.port,
                                       "store": config.store_dir,
                                       "workers": config.worker_count}}))
    run_service(config)


@main.command()
@click.argument("graph_json", type=click.Path())
@click.argument("weights_bin", type=click.Path())
@click.option("--meta", "meta_json", required=True, type=click.Path(), help="JSON: {name, task, author, metadata}")
@click.pass_context
def publish(ctx, graph_json, weights_bin, meta_json):
    """Publish a model: graph JSON + weights blob + metadata."""
    graph = load_json_file(graph_json, "graph")
    meta = load_json_file(meta_json, "meta")
    try:
        weights = Path(weights_bin).read_bytes()
    except FileNotFoundError:
        fail({"error": {"code": "missing_file", "message": f"weights file not found: {weights_bin}"}}, EXIT_USER)
    body = {
        "name": meta.get("name", Path(graph_json).stem),
        "task": meta.get("task", "tabular_classification"),
        "author": meta.get("author", ""),
        "metadata": meta.get("metadata", {}),
        "graph": graph,
        "weights_b64": base64.b64encode(weights).decode("ascii"),
    }
    emit(request(ctx, "POST", "/models", json=body))


@main.command("list-models")
@click.option("--task", default=None)
@click.option("--name-contains", default=None)
@click.option("--min-accuracy", type=float, default=None)
@click.option("--max-latency-ms", type=float, default=None)
@click.option("--sort", default="created_at")
@click.option("--descending", is_flag=True)
@click.option("--limit", type=int, default=None)
@click.pass_context
def list_models(ctx, task, name_contains, min_accuracy, max_latency_ms, sort, descending, limit):
    """List stored models, optionally filtered."""
    params = {"sort": sort, "descending": descending}
    for key, value in (("task", task), ("name_contains", name_contains),
                       ("min_accuracy", min_accuracy), ("max_latency_ms", max_latency_ms),
                       ("limit", limit)):
        if value is not None:
            params[key] = value
    emit(request(ctx, "GET", "/models", params=params))


@main.command("save-draft")
@click.argument("draft_json", type=click.Path())
@click.option("--draft-id", default=None, help="Update an existing draft")
@click.pass_context
def save_draft(ctx, draft_json, draft_id):
    """Save a draft (optimistic revision check on updates)."""
    draft = load_json_file(draft_json, "draft")
    emit(request(ctx, "POST", "/drafts", json={"draft": draft, "draft_id": draft_id}))


@main.command()
@click.argument("config_json", type=click.Path())
@click.option("--budget", type=float, default=None, help="Time budget in seconds")
@click.pass_context
def validate(ctx, config_json, budget):
    """Time-boxed training validation; prints the report."""
    config = load_json_file(config_json, "config")
    emit(request(ctx, "POST", "/validate", json={"config": config, "budget_s": budget}))


@main.command()
@click.argument("config_json", type=click.Path())
@click.option("--author", default="")
@click.option("--no-publish", is_flag=True, help="Skip auto-publishing the result model")
@click.option("--wait/--no-wait", default=False, help="Poll until the job is terminal")
@click.pass_context
def train(ctx, config_json, author, no_publish, wait):
    """Submit a training job; returns the job id (or final state with --wait)."""
    config = load_json_file(config_json, "config")
    result = request(ctx, "POST", "/jobs",
                     json={"config": config, "author": author, "publish": not no_publish})
    if not wait:
        emit(result)
    job_id = result["job_id"]
    while True:
        job = request(ctx, "GET", f"/jobs/{job_id}")
        if job["state"] in ("Completed", "Terminated", "Failed"):
            emit(job)
        time.sleep(0.2)


@main.command()
@click.argument("job_id")
@click.argument("action", type=click.Choice(["pause", "resume", "terminate", "status", "to-device"]))
@click.option("--device", default=None, help="Worker slot for to-device (e.g. cpu1)")
@click.pass_context
def job(ctx, job_id, action, device):
    """Job lifecycle: pause | resume | terminate | status | to-device."""
    if action == "status":
        emit(request(ctx, "GET", f"/jobs/{job_id}"))
    if action == "to-device":
        if device is None:
            fail({"error": {"code": "schema_violation", "message": "to-device needs --device"}}, EXIT_USER)
        emit(request(ctx, "POST", f"/jobs/{job_id}/to_device", json={"device": device}))
    emit(request(ctx, "POST", f"/jobs/{job_id}/{action}"))


@main.command()
@click.argument("request_json", type=click.Path())
@click.option("--wait/--no-wait", default=True, help="Poll exploration tickets to completion")
@click.pass_context
def genie(ctx, request_json, wait):
    """Ask for edit-configuration recommendations."""
    body = load_json_file(request_json, "request")
    result = request(ctx, "POST", "/genie", json=body)
    if result["status"] == "complete" or not wait:
        emit(result)
    ticket_id = result["ticket_id"]
    while True:
        ticket = request(ctx, "GET", f"/genie/{ticket_id}")
        if ticket["status"] == "complete":
            emit(ticket)
        if ticket["status"] == "failed":
            fail(ticket, EXIT_INTERNAL)
        time.sleep(0.2)


@main.group()
def datasets():
    """Dataset registry commands."""


@datasets.command("list")
@click.pass_context
def datasets_list(ctx):
    emit(request(ctx, "GET", "/datasets"))


@datasets.command("register")
@click.argument("spec_json", type=click.Path())
@click.pass_context
def datasets_register(ctx, spec_json):
    """Register a dataset from a spec file: {name, tags, generator} or
    {name, tags, num_classes, csv_path}."""
    spec = load_json_file(spec_json, "dataset spec")
    body = {
        "name": spec.get("name", Path(spec_json).stem),
        "tags": spec.get("tags", []),
        "dataset_id": spec.get("dataset_id"),
    }
    if "generator" in spec:
        body["generator"] = spec["generator"]
    elif "csv_path" in spec:
        csv_path = Path(spec["csv_path"])
        if not csv_path.is_absolute():
            csv_path = Path(spec_json).parent / csv_path
        try:
            body["csv"] = csv_path.read_text(encoding="utf-8")
        except FileNotFoundError:
            fail({"error": {"code": "missing_file", "message": f"csv not found: {csv_path}"}}, EXIT_USER)
        body["num_classes"] = spec.get("num_classes")
    else:
        fail({"error": {"code": "schema_violation",
                        "message": "spec needs a generator or csv_path"}}, EXIT_USER)
    emit(request(ctx, "POST", "/datasets", json=body))


if __name__ == "__main__":
    main()
