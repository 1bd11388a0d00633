"""Search-space proposal and config sampling."""

from __future__ import annotations

import numpy as np

from ..errors import NoCandidateModels
from ..features.augment import AugmentationSpec
from ..repository import Query
from ..training.config import TrainConfig
from .defaults import AUG_PRESETS
from .rules import tag_overlap
from .types import GenieRequest, SearchSpace

MAX_BASE_CANDIDATES = 5


def propose_space(
    request: GenieRequest,
    repo,
    features,
    tl_method: str,
    presets: dict | None = None,
) -> SearchSpace:
    """Candidate bases: top task-matching models by published accuracy
    (capped); datasets: the target plus tag-related ones."""
    candidates = [r for r in repo.retrieve(Query(task=request.task)) if r.status == "published"]
    if not candidates:
        raise NoCandidateModels(f"no published models for task {request.task!r}")
    candidates.sort(key=lambda r: (-r.metadata.accuracy, r.model_id))
    bases = candidates[:MAX_BASE_CANDIDATES]

    target = features.get(request.dataset_id)
    related = [
        d.dataset_id
        for d in features.list()
        if d.dataset_id != request.dataset_id
        and tag_overlap(d.similarity_tags, target.similarity_tags) > 0.0
    ]
    k_max = max(len(r.graph.parameterized_nodes()) for r in bases)
    return SearchSpace(
        base_model_ids=tuple(r.model_id for r in bases),
        dataset_ids=(request.dataset_id, *related),
        aug_presets=tuple((presets or AUG_PRESETS).keys()),
        tl_method=tl_method,
        lr_range=(1e-4, 1e-1),
        frozen_layers_range=(0, k_max),
        epochs_range=(1, 20),
    )


def materialize_aug(preset_name: str, dataset_id: str, features, seed: int, presets: dict | None = None) -> AugmentationSpec:
    """Turn a preset recipe into a concrete spec; normalize steps pick up the
    dataset's train statistics."""
    steps = []
    for step in (presets or AUG_PRESETS)[preset_name]:
        if step["op"] == "normalize":
            mean, std = features.feature_stats(dataset_id, "train")
            steps.append({"op": "normalize", "mean": mean, "std": std})
        else:
            steps.append(dict(step))
    return AugmentationSpec(tuple(steps), seed=seed)


def sample_config(
    space: SearchSpace,
    rng: np.random.Generator,
    repo,
    features,
    presets: dict | None = None,
) -> TrainConfig:
    """One random point; frozen depth is clamped to the chosen base and the
    dataset choice is restricted to shapes the base can consume."""
    base_id = str(rng.choice(list(space.base_model_ids)))
    base = repo.get(base_id)
    base_layers = base.graph.parameterized_nodes()
    in_dim = 1
    for d in base.graph.input_shape:
        in_dim *= d
    out_dim = base_layers[-1].attrs.get("out_features", base_layers[-1].attrs.get("out_channels"))

    compatible = []
    for did in space.dataset_ids:
        record = features.get(did)
        if record.flat_dim() == in_dim and record.num_classes == out_dim:
            compatible.append(did)
    dataset_id = str(rng.choice(compatible)) if compatible else space.dataset_ids[0]

    preset = str(rng.choice(list(space.aug_presets)))
    lo, hi = space.lr_range
    lr = float(10 ** rng.uniform(np.log10(lo), np.log10(hi)))
    k_hi = min(space.frozen_layers_range[1], len(base_layers))
    frozen = int(rng.integers(space.frozen_layers_range[0], k_hi + 1))
    seed = int(rng.integers(0, 2**31))
    aug = materialize_aug(preset, dataset_id, features, seed=seed, presets=presets)

    source_dataset_id = None
    if space.tl_method in ("tradaboost", "mmd_adapt"):
        source = features.find_by_name(base.metadata.pretrained_dataset)
        if source is not None and source.dataset_id != dataset_id:
            source_dataset_id = source.dataset_id

    return TrainConfig(
        tl_method=space.tl_method,
        base_model_id=base_id,
        dataset_id=dataset_id,
        source_dataset_id=source_dataset_id,
        aug=aug,
        lr=lr,
        epochs=space.epochs_range[0],
        frozen_layers=frozen,
        seed=seed,
    )
