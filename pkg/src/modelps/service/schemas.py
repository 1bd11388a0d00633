"""Pydantic envelopes for the HTTP surface.

Domain payloads (graphs, drafts, train configs, genie requests) travel as
JSON objects and are validated by the same canonical codecs the rest of the
system uses, so the wire schema cannot drift from the storage schema.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class PublishRequest(BaseModel):
    name: str
    task: str
    author: str = ""
    metadata: dict
    graph: dict
    weights_b64: str


class PublishResponse(BaseModel):
    model_config = ConfigDict(protected_namespaces=())
    model_id: str


class ModelView(BaseModel):
    model_config = ConfigDict(protected_namespaces=())
    model_id: str
    name: str
    task: str
    status: str
    author: str
    created_at: str
    updated_at: str
    metadata: dict
    weights_ref: str
    graph: dict
    shapes: dict | None = None
    params: int


class SaveDraftRequest(BaseModel):
    draft: dict
    draft_id: str | None = None


class SaveDraftResponse(BaseModel):
    draft_id: str
    revision: int


class DraftView(BaseModel):
    draft_id: str
    draft: dict
    shapes: dict


class GraphValidateRequest(BaseModel):
    graph: dict


class GraphValidateResponse(BaseModel):
    shapes: dict
    params: int
    executable: bool


class ValidateRequest(BaseModel):
    config: dict
    budget_s: float | None = Field(default=None, gt=0)


class SubmitJobRequest(BaseModel):
    config: dict
    author: str = ""
    publish: bool = True


class SubmitJobResponse(BaseModel):
    job_id: str


class ToDeviceRequest(BaseModel):
    device: str


class RegisterDatasetRequest(BaseModel):
    name: str
    tags: list[str] = []
    dataset_id: str | None = None
    generator: dict | None = None  # {kind, params, seed}
    csv: str | None = None
    num_classes: int | None = None


class RegisterDatasetResponse(BaseModel):
    dataset_id: str


class PreviewRequest(BaseModel):
    aug: dict | None = None
    k: int = 5


class GenieSubmitResponse(BaseModel):
    status: str
    ticket_id: str | None
    recommendation: dict | None
