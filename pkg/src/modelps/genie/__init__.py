"""Configuration recommendation: history searcher + HPO exploiter."""

from .defaults import AUG_BONUS, AUG_PRESETS, DEFAULT_RULES, DEFAULT_SURFACE, aug_signature, load_config
from .engine import Genie
from .explore import ExploreResult, explore
from .history import HistoryLog
from .rules import recommend_tl_method, tag_overlap
from .searcher import rank, rank_key, satisfies_all, search_history, select, select_and_rank
from .space import materialize_aug, propose_space, sample_config
from .surface import SimulatedSurface
from .types import (
    Constraint,
    GenieRequest,
    HistoryRecord,
    Recommendation,
    RecommendationEntry,
    SearchSpace,
    Target,
    Trial,
    metric_value,
)

__all__ = [
    "AUG_BONUS",
    "AUG_PRESETS",
    "Constraint",
    "DEFAULT_RULES",
    "DEFAULT_SURFACE",
    "ExploreResult",
    "Genie",
    "GenieRequest",
    "HistoryLog",
    "HistoryRecord",
    "Recommendation",
    "RecommendationEntry",
    "SearchSpace",
    "SimulatedSurface",
    "Target",
    "Trial",
    "aug_signature",
    "explore",
    "load_config",
    "materialize_aug",
    "metric_value",
    "propose_space",
    "rank",
    "rank_key",
    "recommend_tl_method",
    "sample_config",
    "satisfies_all",
    "search_history",
    "select",
    "select_and_rank",
    "tag_overlap",
]
