from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import LabeledSet, TrainedModel, make_model


@dataclass
class KNNCore:
    X: np.ndarray
    y: np.ndarray
    k: int
    n_classes: int

    def distances(self, Z, chunk=256):
        out = np.empty((Z.shape[0], self.X.shape[0]))
        for a in range(0, Z.shape[0], chunk):
            diff = Z[a:a + chunk, None, :] - self.X[None, :, :]
            out[a:a + chunk] = np.sqrt(np.einsum("qnd,qnd->qn", diff, diff))
        return out

    def predict(self, Z):
        D = self.distances(Z)
        # stable sort: equal distances keep training-set order
        nearest = np.argsort(D, axis=1, kind="stable")[:, : self.k]
        labels = self.y[nearest]
        dists = np.take_along_axis(D, nearest, axis=1)
        out = np.empty(Z.shape[0], dtype=np.int64)
        for q in range(Z.shape[0]):
            votes = np.bincount(labels[q], minlength=self.n_classes)
            summed = np.bincount(labels[q], weights=dists[q], minlength=self.n_classes)
            cand = np.flatnonzero(votes == votes.max())
            # most votes, then smallest summed distance, then lowest code
            out[q] = cand[np.argmin(summed[cand])]
        return out

    def to_dict(self):
        return {"X": self.X.tolist(), "y": self.y.tolist(), "k": self.k, "n_classes": self.n_classes}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["X"], dtype=float), np.asarray(d["y"], dtype=np.int64), d["k"], d["n_classes"])


def train_knn(data: LabeledSet, k: int, seed: int = 0) -> TrainedModel:
    if not 1 <= k <= len(data):
        raise ValueError(f"k={k} must lie in [1, {len(data)}]")
    return make_model("knn", data, lambda Z: KNNCore(Z, data.labels.copy(), int(k), data.class_count),
                      {"k": int(k)}, seed)
