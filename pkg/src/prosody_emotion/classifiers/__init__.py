"""Six classifier families behind one train/predict contract.

``FAMILIES`` maps a family tag to its trainer, the name of its swept
hyperparameter and the default sweep grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .base import (DimensionMismatchError, LabeledSet, TrainedModel, fit_standardizer,
                   load_model, predict, save_model)
from .boosting import GBMCore, train_gradient_boosting
from .forest import train_extra_trees, train_random_forest
from .knn import KNNCore, train_knn
from .network import FFNNCore, train_ffnn
from .svm import LinearSVMCore, train_linear_svm
from .trees import Forest


@dataclass(frozen=True)
class Family:
    name: str
    trainer: Callable
    param: str
    grid: tuple
    label: str


FAMILIES = {
    "knn": Family("knn", train_knn, "k", (1, 3, 5, 7, 9, 11, 15, 21), "KNN"),
    "svm": Family("svm", train_linear_svm, "c", (0.1, 0.5, 1.0, 5.0, 10.0), "SVM"),
    "extra_trees": Family("extra_trees", train_extra_trees, "n_trees", (100, 200, 500), "Extra Trees"),
    "gradient_boosting": Family("gradient_boosting", train_gradient_boosting, "n_stages",
                                (100, 200, 500), "Gradient Boosting"),
    "random_forest": Family("random_forest", train_random_forest, "n_trees", (100, 200, 500),
                            "Random Forest"),
    "ffnn": Family("ffnn", train_ffnn, "epochs", (5, 20, 50), "FFNN"),
}

# families compared in the classical-model experiments (the network is used for selection)
CLASSICAL_FAMILIES = ("knn", "svm", "extra_trees", "gradient_boosting", "random_forest")

CORES = {
    "knn": KNNCore,
    "svm": LinearSVMCore,
    "random_forest": Forest,
    "extra_trees": Forest,
    "gradient_boosting": GBMCore,
    "ffnn": FFNNCore,
}


def train(family: str, data: LabeledSet, value, seed: int = 0, n_jobs: int = 1) -> TrainedModel:
    """Train ``family`` with its swept hyperparameter set to ``value``.

    ``n_jobs`` only affects the forest families, whose trees are seeded
    individually so the result is the same for any thread count.
    """
    try:
        fam = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}") from None
    if family in ("random_forest", "extra_trees"):
        return fam.trainer(data, value, seed=seed, n_jobs=n_jobs)
    return fam.trainer(data, value, seed=seed)


__all__ = [
    "CLASSICAL_FAMILIES", "CORES", "DimensionMismatchError", "FAMILIES", "Family", "LabeledSet",
    "TrainedModel", "fit_standardizer", "load_model", "predict", "save_model", "train",
    "train_extra_trees", "train_ffnn", "train_gradient_boosting", "train_knn", "train_linear_svm",
    "train_random_forest",
]
