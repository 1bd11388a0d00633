"""Exception hierarchy shared by every subsystem.

Every error carries a stable ``code`` string so the HTTP layer and the CLI
can map it to structured JSON without string matching on messages.
"""

from __future__ import annotations


class ModelPSError(Exception):
    """Base class; ``code`` identifies the error kind on the wire."""

    code = "internal"

    def __init__(self, message: str = "", **detail):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.detail = detail

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


# --- graph ---


class GraphError(ModelPSError):
    code = "invalid_graph"


class ShapeMismatch(GraphError):
    code = "shape_mismatch"

    def __init__(self, node_id: str, expected, got):
        super().__init__(
            f"shape mismatch at node {node_id!r}: expected {expected}, got {got}",
            node_id=node_id,
            expected=expected,
            got=got,
        )
        self.node_id = node_id
        self.expected = expected
        self.got = got


class CycleDetected(GraphError):
    code = "cycle_detected"


class MultipleSources(GraphError):
    code = "multiple_sources"


class MultipleSinks(GraphError):
    code = "multiple_sinks"


class UnknownNode(ModelPSError):
    code = "unknown_node"


class InvalidResult(ModelPSError):
    """An edit produced a graph that fails re-validation; the edit is rejected."""

    code = "invalid_result"

    def __init__(self, cause: "ModelPSError"):
        super().__init__(f"edit rejected: {cause.message}")
        self.cause = cause


class RemoveWouldOrphan(ModelPSError):
    code = "remove_would_orphan"


class SchemaViolation(ModelPSError):
    code = "schema_violation"

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}", path=path, reason=reason)
        self.path = path
        self.reason = reason


# --- repository ---


class InvalidGraph(ModelPSError):
    code = "invalid_graph"


class MissingMetadata(ModelPSError):
    code = "missing_metadata"

    def __init__(self, field: str):
        super().__init__(f"metadata field {field!r} is required", field=field)
        self.field = field


class DanglingParent(ModelPSError):
    code = "dangling_parent"


class UnknownModel(ModelPSError):
    code = "unknown_model"


class UnknownDraft(ModelPSError):
    code = "unknown_draft"


class StaleRevision(ModelPSError):
    code = "stale_revision"

    def __init__(self, sent: int, stored: int):
        super().__init__(
            f"draft revision {sent} does not match stored revision {stored}",
            sent=sent,
            stored=stored,
        )
        self.sent = sent
        self.stored = stored


class LineageCycle(ModelPSError):
    code = "lineage_cycle"


# --- feature store ---


class ShapeInconsistent(ModelPSError):
    code = "shape_inconsistent"


class LabelOutOfRange(ModelPSError):
    code = "label_out_of_range"


class UnknownDataset(ModelPSError):
    code = "unknown_dataset"


class EmptySplit(ModelPSError):
    code = "empty_split"


class DuplicateDataset(ModelPSError):
    code = "duplicate_dataset"


# --- trainer ---


class InvalidConfig(ModelPSError):
    code = "invalid_config"


class IllegalTransition(ModelPSError):
    code = "illegal_transition"

    def __init__(self, from_state: str, to_state: str):
        super().__init__(
            f"illegal job transition {from_state} -> {to_state}",
            from_state=from_state,
            to_state=to_state,
        )
        self.from_state = from_state
        self.to_state = to_state


class UnknownJob(ModelPSError):
    code = "unknown_job"


class NonFiniteLoss(ModelPSError):
    code = "non_finite_loss"


class IncompatibleDatasets(ModelPSError):
    code = "incompatible_datasets"


class DegenerateRound(ModelPSError):
    code = "degenerate_round"


class DimMismatch(ModelPSError):
    code = "dim_mismatch"


# --- genie ---


class NoCandidateModels(ModelPSError):
    code = "no_candidate_models"


class EvaluatorFailure(ModelPSError):
    code = "evaluator_failure"

    def __init__(self, trial: int, cause: Exception):
        super().__init__(f"trial {trial} failed: {cause}", trial=trial)
        self.trial = trial
        self.cause = cause


# --- service ---


class PortInUse(ModelPSError):
    code = "port_in_use"


class StoreCorrupt(ModelPSError):
    code = "store_corrupt"

    def __init__(self, path: str, reason: str = ""):
        super().__init__(f"store document corrupt: {path}" + (f" ({reason})" if reason else ""), path=path)
        self.path = path


USER_ERRORS = (
    GraphError,
    UnknownNode,
    InvalidResult,
    RemoveWouldOrphan,
    SchemaViolation,
    InvalidGraph,
    MissingMetadata,
    DanglingParent,
    UnknownModel,
    UnknownDraft,
    StaleRevision,
    ShapeInconsistent,
    LabelOutOfRange,
    UnknownDataset,
    EmptySplit,
    DuplicateDataset,
    InvalidConfig,
    IllegalTransition,
    UnknownJob,
    IncompatibleDatasets,
    NoCandidateModels,
)
