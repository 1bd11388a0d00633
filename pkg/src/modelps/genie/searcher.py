"""History query: selection by constraints/method/dataset, direction-aware
lexicographic ranking, top-k cut."""

from __future__ import annotations

from .types import Constraint, GenieRequest, HistoryRecord, Target, metric_value


def satisfies_all(record: HistoryRecord, constraints) -> bool:
    return all(c.satisfied_by(record.report) for c in constraints)


def select(
    records: list[HistoryRecord],
    constraints,
    tl_method: str | None,
    dataset_id: str | None,
) -> list[HistoryRecord]:
    """The selection: every constraint holds, the method matches, and the
    record trained on the requested dataset."""
    out = []
    for record in records:
        if tl_method is not None and record.config.tl_method != tl_method:
            continue
        if dataset_id is not None and record.config.dataset_id != dataset_id:
            continue
        if satisfies_all(record, constraints):
            out.append(record)
    return out


def rank_key(record: HistoryRecord, targets):
    """Lexicographic target order (direction-aware), newer records first on
    ties, config hash as the final total-order tie break."""
    key = []
    for target in targets:
        value = metric_value(record.report, target.metric)
        key.append(value if target.direction == "minimize" else -value)
    key.append(-record.timestamp)
    key.append(record.config.hash())
    return tuple(key)


def rank(records: list[HistoryRecord], targets) -> list[HistoryRecord]:
    return sorted(records, key=lambda r: rank_key(r, targets))


def select_and_rank(
    records: list[HistoryRecord],
    constraints,
    tl_method: str | None,
    dataset_id: str | None,
    targets,
    top_k: int | None,
) -> list[HistoryRecord]:
    ranked = rank(select(records, constraints, tl_method, dataset_id), targets)
    return ranked if top_k is None else ranked[:top_k]


def search_history(request: GenieRequest, records: list[HistoryRecord], tl_method: str) -> list[HistoryRecord]:
    """Resolved form of the history query; ``tl_method`` is the rule-table
    output (or the request's explicit override)."""
    return select_and_rank(
        records, request.constraints, tl_method, request.dataset_id, request.targets, request.top_k
    )
