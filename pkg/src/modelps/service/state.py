"""Wiring of all subsystems behind the HTTP surface."""

from __future__ import annotations

import threading
import uuid
from pathlib import Path

from ..features import FeatureStore
from ..genie import DEFAULT_RULES, DEFAULT_SURFACE, Genie, GenieRequest, HistoryLog, SimulatedSurface, load_config
from ..repository import ModelRepository, encode_weights
from ..training import JobPool, Trainer
from .config import ApiConfig
from .seeds import seed_store


class GenieTicket:
    def __init__(self, ticket_id: str, request: GenieRequest):
        self.ticket_id = ticket_id
        self.request = request
        self.status = "pending"  # pending | complete | failed
        self.recommendation = None
        self.error: str | None = None

    def to_obj(self) -> dict:
        return {
            "ticket_id": self.ticket_id,
            "status": self.status,
            "recommendation": self.recommendation.to_obj() if self.recommendation else None,
            "error": self.error,
        }


class ServiceState:
    def __init__(self, config: ApiConfig, seed_demo: bool = True):
        self.config = config
        store = Path(config.store_dir)
        store.mkdir(parents=True, exist_ok=True)
        self.repo = ModelRepository(store)
        self.features = FeatureStore(store)
        self.history = HistoryLog(store / "history.jsonl")
        self.trainer = Trainer(self.repo, self.features, history=self.history)
        self.surface = SimulatedSurface(
            self.repo, self.features,
            load_config(config.genie_surface_path, DEFAULT_SURFACE),
        )
        self.genie = Genie(
            self.repo, self.features, self.history, self.trainer,
            rules=load_config(config.genie_rules_path, DEFAULT_RULES),
            surface=self.surface,
            worker_count=config.worker_count,
            default_seed=config.seed,
        )
        self.jobs = JobPool(
            self.trainer,
            worker_count=config.worker_count,
            checkpoints_dir=store / "checkpoints",
            on_complete=self.auto_publish,
            simulate_fn=self.surface.evaluate,
        )
        self.tickets: dict[str, GenieTicket] = {}
        self._tickets_lock = threading.Lock()
        if seed_demo:
            seed_store(self.repo, self.features)

    # --- job completion hook ---

    def auto_publish(self, job, result) -> str | None:
        """Deposit a finished training job's model back into the repository
        with lineage to its base."""
        if not job.publish_result or result.params is None or result.report is None:
            return None
        config = job.config
        base = self.repo.get(config.base_model_id) if config.base_model_id else None
        dataset = self.features.get(config.dataset_id)
        name = f"{base.name}+{config.tl_method}" if base else f"{config.tl_method}-model"
        report = result.report
        return self.repo.publish(
            name=name,
            task=base.task if base else "tabular_classification",
            graph=result.graph,
            metadata={
                "pretrained_dataset": dataset.name,
                "accuracy": report.accuracy,
                "latency_ms": report.inference_latency_ms,
                "params": report.params,
                "parent_model_id": base.model_id if base else None,
            },
            weights=encode_weights(result.params),
            author=job.author or "trainer",
        )

    # --- genie tickets ---

    def submit_genie(self, request: GenieRequest) -> dict:
        """Pure history search answers immediately; exploration runs in the
        background behind a pollable ticket."""
        method = self.genie.recommend_tl_method(request)
        qualifying = self.genie.qualifying(request, method)
        if len(qualifying) >= self.genie.insufficient_threshold(request):
            recommendation = self.genie.run(request)
            return {"status": "complete", "ticket_id": None,
                    "recommendation": recommendation.to_obj()}
        ticket = GenieTicket("g-" + uuid.uuid4().hex[:12], request)
        with self._tickets_lock:
            self.tickets[ticket.ticket_id] = ticket

        def _run():
            try:
                ticket.recommendation = self.genie.run(request)
                ticket.status = "complete"
            except Exception as exc:  # noqa: BLE001 - surfaced via the ticket
                ticket.error = f"{type(exc).__name__}: {exc}"
                ticket.status = "failed"

        threading.Thread(target=_run, daemon=True, name=f"genie-{ticket.ticket_id}").start()
        return {"status": "pending", "ticket_id": ticket.ticket_id, "recommendation": None}

    def get_ticket(self, ticket_id: str) -> GenieTicket | None:
        with self._tickets_lock:
            return self.tickets.get(ticket_id)

    def shutdown(self) -> None:
        self.jobs.shutdown()
