"""Shared model contract: labelled data, standardisation, fitted models and JSON persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

MODEL_FORMAT_VERSION = 1


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledSet:
    vectors: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        X = np.asarray(self.vectors, dtype=float)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ValueError(f"vectors {X.shape} and labels {y.shape} do not line up")
        if X.shape[0] < self.class_count:
            raise ValueError(f"{X.shape[0]} samples for {self.class_count} classes")
        if y.size and (y.min() < 0 or y.max() >= self.class_count):
            raise ValueError("label code out of range")
        if not np.all(np.isfinite(X)):
            raise ValueError("vectors contain NaN or infinite values")
        object.__setattr__(self, "vectors", X)
        object.__setattr__(self, "labels", y)

    def __len__(self):
        return self.labels.shape[0]

    @property
    def feature_count(self) -> int:
        return self.vectors.shape[1]

    def subset(self, rows=None, columns=None) -> "LabeledSet":
        X, y = self.vectors, self.labels
        if rows is not None:
            X, y = X[rows], y[rows]
        if columns is not None:
            X = X[:, columns]
        return LabeledSet(X, y, self.class_count)

    def concat(self, other: "LabeledSet") -> "LabeledSet":
        return LabeledSet(np.vstack([self.vectors, other.vectors]),
                          np.concatenate([self.labels, other.labels]), self.class_count)


def fit_standardizer(X):
    """Per-column mean and std; zero-variance columns get scale 1."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    return mean, np.where(std > 0, std, 1.0)


@dataclass
class TrainedModel:
    family: str
    class_count: int
    feature_count: int
    mean: np.ndarray
    scale: np.ndarray
    core: Any
    hyperparams: dict = field(default_factory=dict)
    seed: int = 0

    def standardize(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.feature_count:
            raise DimensionMismatchError(
                f"model expects {self.feature_count} features, got {X.shape[1]}")
        return (X - self.mean) / self.scale

    def predict(self, X) -> np.ndarray:
        return np.asarray(self.core.predict(self.standardize(X)), dtype=np.int64)

    def scores(self, X) -> np.ndarray:
        """Per-class decision scores for families that define them (not KNN/forests)."""
        return self.core.scores(self.standardize(X))

    def to_dict(self) -> dict:
        return {
            "version": MODEL_FORMAT_VERSION,
            "family": self.family,
            "class_count": self.class_count,
            "feature_count": self.feature_count,
            "hyperparams": self.hyperparams,
            "seed": self.seed,
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "params": self.core.to_dict(),
        }


def predict(model: TrainedModel, x) -> int | np.ndarray:
    """Label code for one vector, or an array of codes for a matrix."""
    x = np.asarray(x, dtype=float)
    out = model.predict(x)
    return int(out[0]) if x.ndim == 1 else out


def save_model(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, sort_keys=True)
        fh.write("\n")


def load_model(path, feature_count: int | None = None) -> TrainedModel:
    from . import CORES

    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    if d.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported model format version {d.get('version')!r}")
    if feature_count is not None and d["feature_count"] != feature_count:
        raise DimensionMismatchError(
            f"{path}: model has {d['feature_count']} features, data has {feature_count}")
    mean = np.asarray(d["mean"], dtype=float)
    scale = np.asarray(d["scale"], dtype=float)
    if mean.shape != (d["feature_count"],) or scale.shape != (d["feature_count"],):
        raise DimensionMismatchError(f"{path}: standardisation vectors do not match feature_count")
    core = CORES[d["family"]].from_dict(d["params"])
    return TrainedModel(d["family"], d["class_count"], d["feature_count"], mean, scale, core,
                        d["hyperparams"], d["seed"])


def make_model(family, data: LabeledSet, core_factory, hyperparams, seed) -> TrainedModel:
    mean, scale = fit_standardizer(data.vectors)
    Z = (data.vectors - mean) / scale
    core = core_factory(Z)
    return TrainedModel(family, data.class_count, data.feature_count, mean, scale, core,
                        dict(hyperparams), seed)
