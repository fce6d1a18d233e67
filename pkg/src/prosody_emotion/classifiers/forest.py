from __future__ import annotations

from .base import LabeledSet, TrainedModel, make_model
from .trees import Forest, grow_forest


def train_random_forest(data: LabeledSet, n_trees: int, seed: int = 0, n_jobs: int = 1) -> TrainedModel:
    """Bootstrap-sampled Gini trees with the best split over sqrt(d) random features per node."""
    if n_trees < 1:
        raise ValueError("n_trees must be at least 1")
    return make_model(
        "random_forest", data,
        lambda Z: grow_forest(Z, data.labels, data.class_count, n_trees, seed, True, "best", n_jobs=n_jobs),
        {"n_trees": int(n_trees)}, seed)


def train_extra_trees(data: LabeledSet, n_trees: int, seed: int = 0, n_jobs: int = 1) -> TrainedModel:
    """Whole-sample Gini trees with one uniform random threshold per candidate feature."""
    if n_trees < 1:
        raise ValueError("n_trees must be at least 1")
    return make_model(
        "extra_trees", data,
        lambda Z: grow_forest(Z, data.labels, data.class_count, n_trees, seed, False, "random", n_jobs=n_jobs),
        {"n_trees": int(n_trees)}, seed)


ForestCore = Forest
