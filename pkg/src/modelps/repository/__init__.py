"""Centralized model store: published records, drafts, lineage, weight blobs."""

from .blobs import BlobStore, Tensors, decode_weights, encode_weights, sha256_hex
from .store import (
    METADATA_REQUIRED,
    TASKS,
    ModelMeta,
    ModelRecord,
    ModelRepository,
    Query,
    matches,
    run_query,
)

__all__ = [
    "BlobStore",
    "METADATA_REQUIRED",
    "ModelMeta",
    "ModelRecord",
    "ModelRepository",
    "Query",
    "TASKS",
    "Tensors",
    "decode_weights",
    "encode_weights",
    "matches",
    "run_query",
    "sha256_hex",
]
