"""Method recommendation rule table (data-driven, see defaults.py)."""

from __future__ import annotations

from .types import GenieRequest


def tag_overlap(a, b) -> float:
    """Jaccard overlap between two tag sets."""
    sa, sb = set(a), set(b)
    if not sa or not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


def recommend_tl_method(
    request: GenieRequest,
    *,
    target_train_n: int,
    source_overlap: float,
    rules: dict,
) -> str:
    """Rules evaluated in order; ``source_overlap`` is the best tag overlap
    between the target dataset and any candidate model's pretraining data."""
    if request.tl_method:
        return request.tl_method
    if request.deployment == "edge":
        return "knowledge_distill"
    for c in request.constraints:
        if c.metric == "latency_ms" and c.op == "<=" and c.value <= rules["latency_slo_ms"]:
            return "knowledge_distill"
    if target_train_n < rules["small_dataset_threshold"] and source_overlap > 0.0:
        return "tradaboost"
    if source_overlap >= rules["fine_tune_overlap"]:
        return "fine_tune"
    return "mmd_adapt"
