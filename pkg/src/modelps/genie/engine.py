"""Recommendation engine: history search first, exploration when the
qualifying results are insufficient, merge, re-rank, top-k."""

from __future__ import annotations

import numpy as np

from ..graph import ReplaceHead, apply_edit
from ..repository import Query
from ..training.config import TrainConfig
from ..training.methods import shrink_graph
from ..training.network import ChainNetwork
from .defaults import AUG_PRESETS, DEFAULT_RULES
from .explore import ExploreResult, explore
from .history import HistoryLog
from .rules import recommend_tl_method, tag_overlap
from .searcher import rank, satisfies_all, select
from .space import propose_space, sample_config
from .surface import SimulatedSurface
from .types import GenieRequest, HistoryRecord, Recommendation, RecommendationEntry, SearchSpace


class Genie:
    def __init__(
        self,
        repo,
        features,
        history: HistoryLog,
        trainer,
        *,
        rules: dict | None = None,
        surface: SimulatedSurface | None = None,
        presets: dict | None = None,
        worker_count: int = 1,
        default_seed: int = 0,
    ):
        self.repo = repo
        self.features = features
        self.history = history
        self.trainer = trainer
        self.rules = dict(rules or DEFAULT_RULES)
        self.surface = surface or SimulatedSurface(repo, features)
        self.presets = dict(presets or AUG_PRESETS)
        self.worker_count = worker_count
        self.default_seed = default_seed

    # --- rule table ---

    def _best_source_overlap(self, request: GenieRequest) -> float:
        try:
            target = self.features.get(request.dataset_id)
        except Exception:
            return 0.0
        best = 0.0
        for record in self.repo.retrieve(Query(task=request.task)):
            source = self.features.find_by_name(record.metadata.pretrained_dataset)
            if source is not None:
                best = max(best, tag_overlap(target.similarity_tags, source.similarity_tags))
        return best

    def recommend_tl_method(self, request: GenieRequest) -> str:
        target = self.features.get(request.dataset_id)
        return recommend_tl_method(
            request,
            target_train_n=target.splits["train_n"],
            source_overlap=self._best_source_overlap(request),
            rules=self.rules,
        )

    # --- searcher ---

    def qualifying(self, request: GenieRequest, tl_method: str | None = None) -> list[HistoryRecord]:
        tl_method = tl_method or self.recommend_tl_method(request)
        return select(self.history.records(), request.constraints, tl_method, request.dataset_id)

    def search_history(self, request: GenieRequest) -> list[HistoryRecord]:
        return rank(self.qualifying(request), request.targets)[: request.top_k]

    # --- exploiter ---

    def propose_space(self, request: GenieRequest, tl_method: str | None = None) -> SearchSpace:
        return propose_space(
            request, self.repo, self.features,
            tl_method or self.recommend_tl_method(request), self.presets,
        )

    def simulate(self, config: TrainConfig):
        return self.surface.evaluate(config)

    def _real_evaluate(self, config: TrainConfig):
        return self.trainer.run(config, record_history=False, simulate_fn=self.surface.evaluate).report

    def _edge_evaluate(self, config: TrainConfig):
        """Edge pipeline: distill a shrunken student on public data, then
        fine-tune it on the target dataset; the trial's report is the final
        fine-tuned one and the distillation stage is logged alongside."""
        teacher = self.repo.get(config.base_model_id)
        if not teacher.graph.is_executable():
            return self.surface.evaluate(config), []
        teacher_out = ChainNetwork(teacher.graph).out_dim
        student = shrink_graph(teacher.graph, out_features=teacher_out)
        public = self.features.find_by_name(teacher.metadata.pretrained_dataset)
        public_id = public.dataset_id if public is not None else config.dataset_id

        kd_config = TrainConfig(
            tl_method="knowledge_distill",
            base_model_id=teacher.model_id,
            dataset_id=public_id,
            graph=student,
            lr=config.lr,
            epochs=config.epochs,
            batch_size=config.batch_size,
            kd_temperature=config.kd_temperature,
            kd_alpha=config.kd_alpha,
            seed=config.seed,
        )
        kd_result = self.trainer.run(kd_config, record_history=False)

        target = self.features.get(config.dataset_id)
        ft_graph = student
        if target.num_classes != ChainNetwork(student).out_dim:
            ft_graph = apply_edit(student, ReplaceHead(target.num_classes))
        ft_config = TrainConfig(
            tl_method="fine_tune",
            base_model_id=teacher.model_id,
            dataset_id=config.dataset_id,
            graph=ft_graph,
            aug=config.aug,
            lr=config.lr,
            epochs=config.epochs,
            batch_size=config.batch_size,
            frozen_layers=min(config.frozen_layers, len(ft_graph.parameterized_nodes()) - 1),
            seed=config.seed,
        )
        ft_result = self.trainer.run(
            ft_config, record_history=False, initial_tensors=kd_result.params
        )
        # the fine-tune stage is the trial's real configuration
        return ft_result.report, [(kd_config, kd_result.report)], ft_config

    def explore_request(
        self,
        request: GenieRequest,
        space: SearchSpace | None = None,
        budget: int | None = None,
        tl_method: str | None = None,
    ) -> ExploreResult:
        tl_method = tl_method or self.recommend_tl_method(request)
        space = space or self.propose_space(request, tl_method)
        budget = budget or request.explore_budget
        seed = request.seed if request.seed is not None else self.default_seed

        def sample(rng: np.random.Generator) -> TrainConfig:
            return sample_config(space, rng, self.repo, self.features, self.presets)

        evaluate = self._edge_evaluate if request.deployment == "edge" else self._real_evaluate

        def log_evaluation(trial):
            for stage_config, stage_report in trial.stage_records:
                self.history.append(stage_config, stage_report)
            self.history.append(trial.config, trial.report)

        return explore(
            sample,
            evaluate,
            budget,
            seed,
            request.targets[0],
            on_evaluation=log_evaluation,
            max_workers=self.worker_count,
        )

    # --- full pipeline ---

    def insufficient_threshold(self, request: GenieRequest) -> int:
        configured = self.rules.get("insufficient_threshold")
        return request.top_k if configured is None else int(configured)

    def run(self, request: GenieRequest) -> Recommendation:
        tl_method = self.recommend_tl_method(request)
        qualifying = self.qualifying(request, tl_method)
        explored = False
        born: list[HistoryRecord] = []
        if len(qualifying) < self.insufficient_threshold(request):
            explored = True
            before = len(self.history.records())
            self.explore_request(request, tl_method=tl_method)
            born = self.history.records()[before:]
            qualifying = self.qualifying(request, tl_method)

        # freshly explored trials qualify by provenance: their relevance to
        # this request is structural (final stage trains on the target
        # dataset), so only the constraints are re-checked
        born_keys = {(r.config.hash(), r.timestamp) for r in born}
        candidates = {(r.config.hash(), r.timestamp): r for r in qualifying}
        for record in born:
            if record.config.dataset_id != request.dataset_id:
                continue  # intermediate stages never surface as recommendations
            if satisfies_all(record, request.constraints):
                candidates.setdefault((record.config.hash(), record.timestamp), record)

        ranked = rank(list(candidates.values()), request.targets)
        entries = []
        seen_configs = set()
        for record in ranked:
            key = record.config.hash()
            if key in seen_configs:
                continue
            seen_configs.add(key)
            provenance = "explored" if (key, record.timestamp) in born_keys else "history"
            entries.append(RecommendationEntry(record.config, record.report, provenance))
            if len(entries) == request.top_k:
                break
        return Recommendation(tuple(entries), tl_method, explored)
