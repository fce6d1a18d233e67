"""One-vs-rest logistic gradient boosting with depth-3 regression trees."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import LabeledSet, TrainedModel, make_model
from .trees import Tree, build_regression_tree

GBM_LEARNING_RATE = 0.1
GBM_DEPTH = 3


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def binary_log_loss(y01, raw):
    """Mean logistic loss of raw scores against 0/1 targets."""
    return float(np.mean(np.logaddexp(0.0, raw) - y01 * raw))


@dataclass
class GBMCore:
    init: np.ndarray                 # per-class log-odds priors
    trees: list                      # trees[k] is the stage list for class k
    learning_rate: float = GBM_LEARNING_RATE
    train_loss: list = field(default_factory=list)  # summed per-class loss after each stage

    def scores(self, Z):
        out = np.tile(self.init, (Z.shape[0], 1))
        for k, stages in enumerate(self.trees):
            for t in stages:
                out[:, k] += self.learning_rate * t.predict_value(Z)
        return out

    def predict(self, Z):
        return np.argmax(self.scores(Z), axis=1)

    def to_dict(self):
        return {"init": self.init.tolist(), "learning_rate": self.learning_rate,
                "trees": [[t.to_dict() for t in stages] for stages in self.trees],
                "train_loss": list(self.train_loss)}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["init"], dtype=float),
                   [[Tree.from_dict(t) for t in stages] for stages in d["trees"]],
                   d["learning_rate"], list(d.get("train_loss", [])))


def fit_gbm(Z, y, n_classes, n_stages, learning_rate=GBM_LEARNING_RATE, depth=GBM_DEPTH):
    n = Z.shape[0]
    order = np.argsort(Z, axis=0, kind="stable").T
    Y = (np.asarray(y)[:, None] == np.arange(n_classes)[None, :]).astype(float)
    prior = np.clip(Y.mean(axis=0), 1e-12, 1 - 1e-12)
    init = np.log(prior / (1 - prior))
    raw = np.tile(init, (n, 1))
    trees = [[] for _ in range(n_classes)]
    losses = []
    for _ in range(n_stages):
        for k in range(n_classes):
            p = _sigmoid(raw[:, k])
            tree = build_regression_tree(Z, Y[:, k] - p, p * (1 - p), depth, order=order)
            raw[:, k] += learning_rate * tree.predict_value(Z)
            trees[k].append(tree)
        losses.append(sum(binary_log_loss(Y[:, k], raw[:, k]) for k in range(n_classes)))
    return GBMCore(init, trees, learning_rate, losses)


def train_gradient_boosting(data: LabeledSet, n_stages: int, seed: int = 0,
                            learning_rate: float = GBM_LEARNING_RATE, depth: int = GBM_DEPTH) -> TrainedModel:
    """``n_stages=0`` gives the prior-only model, which predicts the most frequent class."""
    if n_stages < 0:
        raise ValueError("n_stages must be non-negative")
    return make_model(
        "gradient_boosting", data,
        lambda Z: fit_gbm(Z, data.labels, data.class_count, n_stages, learning_rate, depth),
        {"n_stages": int(n_stages), "learning_rate": learning_rate, "depth": depth}, seed)
