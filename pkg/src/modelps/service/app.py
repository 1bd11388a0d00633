"""HTTP endpoints over the service state."""

from __future__ import annotations

import base64
import binascii
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import errors
from ..features import AugmentationSpec
from ..genie import GenieRequest
from ..graph import count_params, infer_shapes
from ..graph.draft import draft_from_obj, draft_to_obj, graph_from_obj
from ..repository import Query
from ..training import TrainConfig
from .config import ApiConfig
from .schemas import (
    DraftView,
    GenieSubmitResponse,
    GraphValidateRequest,
    GraphValidateResponse,
    ModelView,
    PreviewRequest,
    PublishRequest,
    PublishResponse,
    RegisterDatasetRequest,
    RegisterDatasetResponse,
    SaveDraftRequest,
    SaveDraftResponse,
    SubmitJobRequest,
    SubmitJobResponse,
    ToDeviceRequest,
    ValidateRequest,
)
from .state import ServiceState

_NOT_FOUND = (
    errors.UnknownModel,
    errors.UnknownDraft,
    errors.UnknownDataset,
    errors.UnknownJob,
    errors.UnknownNode,
)
_CONFLICT = (errors.StaleRevision, errors.IllegalTransition, errors.DuplicateDataset)


def _status_for(exc: errors.ModelPSError) -> int:
    if isinstance(exc, _NOT_FOUND):
        return 404
    if isinstance(exc, _CONFLICT):
        return 409
    if isinstance(exc, errors.USER_ERRORS):
        return 400
    return 500


def model_view(record, with_shapes: bool = False) -> ModelView:
    from ..graph.draft import graph_to_obj

    return ModelView(
        model_id=record.model_id,
        name=record.name,
        task=record.task,
        status=record.status,
        author=record.author,
        created_at=record.created_at,
        updated_at=record.updated_at,
        metadata=record.metadata.to_obj(),
        weights_ref=record.weights_ref,
        graph=graph_to_obj(record.graph),
        shapes={k: list(v) for k, v in infer_shapes(record.graph).items()} if with_shapes else None,
        params=record.metadata.params,
    )


def create_app(config: ApiConfig | None = None, state: ServiceState | None = None) -> FastAPI:
    service = state or ServiceState(config or ApiConfig.load())

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        service.shutdown()

    app = FastAPI(title="modelps", lifespan=lifespan)
    app.state.service = service

    @app.exception_handler(errors.ModelPSError)
    async def modelps_error_handler(request: Request, exc: errors.ModelPSError):
        return JSONResponse(status_code=_status_for(exc), content={"error": exc.to_dict()})

    @app.get("/health")
    def health():
        return {"status": "ok", "workers": service.config.worker_count}

    # --- models ---

    @app.post("/models", response_model=PublishResponse)
    def publish(body: PublishRequest):
        try:
            weights = base64.b64decode(body.weights_b64, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise errors.SchemaViolation("/weights_b64", f"invalid base64: {exc}") from exc
        graph = graph_from_obj(body.graph)
        model_id = service.repo.publish(
            name=body.name, task=body.task, graph=graph,
            metadata=body.metadata, weights=weights, author=body.author,
        )
        return PublishResponse(model_id=model_id)

    @app.get("/models")
    def list_models(
        task: str | None = None,
        name_contains: str | None = None,
        min_accuracy: float | None = None,
        max_latency_ms: float | None = None,
        parent_model_id: str | None = None,
        sort: str = "created_at",
        descending: bool = False,
        limit: int | None = None,
    ):
        query = Query(task=task, name_contains=name_contains, min_accuracy=min_accuracy,
                      max_latency_ms=max_latency_ms, parent_model_id=parent_model_id,
                      sort=sort, descending=descending, limit=limit)
        return [model_view(r).model_dump() for r in service.repo.retrieve(query)]

    @app.get("/models/{model_id}", response_model=ModelView)
    def get_model(model_id: str):
        return model_view(service.repo.get(model_id), with_shapes=True)

    @app.get("/models/{model_id}/lineage")
    def lineage(model_id: str):
        return [model_view(r).model_dump() for r in service.repo.lineage(model_id)]

    # --- drafts ---

    @app.post("/drafts", response_model=SaveDraftResponse)
    def save_draft(body: SaveDraftRequest):
        draft = draft_from_obj(body.draft)
        draft_id = service.repo.save_draft(draft, body.draft_id)
        return SaveDraftResponse(draft_id=draft_id, revision=draft.revision + 1)

    @app.get("/drafts/{draft_id}", response_model=DraftView)
    def get_draft(draft_id: str):
        draft = service.repo.load_draft(draft_id)
        shapes = {k: list(v) for k, v in infer_shapes(draft.graph).items()}
        return DraftView(draft_id=draft_id, draft=draft_to_obj(draft), shapes=shapes)

    # --- graph validation (editor support) ---

    @app.post("/graph/validate", response_model=GraphValidateResponse)
    def validate_graph(body: GraphValidateRequest):
        graph = graph_from_obj(body.graph, "/graph")
        shapes = infer_shapes(graph)
        return GraphValidateResponse(
            shapes={k: list(v) for k, v in shapes.items()},
            params=count_params(graph),
            executable=graph.is_executable(),
        )

    # --- validation & jobs ---

    @app.post("/validate")
    def validate(body: ValidateRequest):
        config = TrainConfig.from_obj(body.config)
        budget = body.budget_s or service.config.default_validate_budget_s
        report = service.trainer.run(
            config, budget_s=budget, simulate_fn=service.surface.evaluate
        ).report
        return report.to_obj()

    @app.post("/jobs", response_model=SubmitJobResponse)
    def submit_job(body: SubmitJobRequest):
        config = TrainConfig.from_obj(body.config)
        job_id = service.jobs.submit(config, author=body.author, publish=body.publish)
        return SubmitJobResponse(job_id=job_id)

    @app.get("/jobs")
    def list_jobs():
        return [j.to_obj() for j in service.jobs.list()]

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        return service.jobs.get(job_id).to_obj()

    @app.post("/jobs/{job_id}/pause")
    def pause_job(job_id: str):
        service.jobs.pause(job_id)
        return service.jobs.get(job_id).to_obj()

    @app.post("/jobs/{job_id}/resume")
    def resume_job(job_id: str):
        service.jobs.resume(job_id)
        return service.jobs.get(job_id).to_obj()

    @app.post("/jobs/{job_id}/terminate")
    def terminate_job(job_id: str):
        service.jobs.terminate(job_id)
        return service.jobs.get(job_id).to_obj()

    @app.post("/jobs/{job_id}/to_device")
    def job_to_device(job_id: str, body: ToDeviceRequest):
        service.jobs.to_device(job_id, body.device)
        return service.jobs.get(job_id).to_obj()

    # --- datasets ---

    @app.get("/datasets")
    def list_datasets():
        return [r.to_obj() for r in service.features.list()]

    @app.post("/datasets", response_model=RegisterDatasetResponse)
    def register_dataset(body: RegisterDatasetRequest):
        if body.generator is not None:
            dataset_id = service.features.register_synthetic(
                body.name, body.generator, tags=body.tags, dataset_id=body.dataset_id,
            )
        elif body.csv is not None:
            if body.num_classes is None:
                raise errors.SchemaViolation("/num_classes", "required for CSV datasets")
            dataset_id = service.features.register_csv(
                body.name, body.csv, num_classes=body.num_classes,
                tags=body.tags, dataset_id=body.dataset_id,
            )
        else:
            raise errors.SchemaViolation("/", "provide either a generator spec or csv data")
        return RegisterDatasetResponse(dataset_id=dataset_id)

    @app.post("/datasets/{dataset_id}/preview")
    def preview(dataset_id: str, body: PreviewRequest):
        aug = AugmentationSpec.from_obj(body.aug)
        result = service.features.preview(dataset_id, aug, body.k)
        return {
            "pairs": [
                {"raw": raw.tolist(), "augmented": augmented.tolist()}
                for raw, augmented in result.pairs
            ],
            "stats_before": result.stats_before,
            "stats_after": result.stats_after,
        }

    # --- genie ---

    @app.post("/genie", response_model=GenieSubmitResponse)
    def genie(body: dict):
        request = GenieRequest.from_obj(body)
        return GenieSubmitResponse(**service.submit_genie(request))

    @app.get("/genie/{ticket_id}")
    def genie_ticket(ticket_id: str):
        ticket = service.get_ticket(ticket_id)
        if ticket is None:
            raise errors.UnknownJob(f"no genie ticket {ticket_id!r}")
        return ticket.to_obj()

    return app


def serve(config: ApiConfig) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    app = create_app(config)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    except OSError as exc:
        if exc.errno in (48, 98):  # EADDRINUSE on mac/linux
            raise errors.PortInUse(f"port {config.port} is already in use") from exc
        raise
