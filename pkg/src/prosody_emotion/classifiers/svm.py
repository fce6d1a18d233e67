"""One-vs-rest linear SVM.

Each binary problem minimises 0.5*||w||^2 + c * sum(max(0, 1 - y*(w.x + b)))
with an unregularised bias. The solver works on the dual with sequential
minimal optimisation (pairwise coordinate ascent, second-order working-set
choice), which is deterministic and reaches the optimum to ``tol``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import LabeledSet, TrainedModel, make_model

SMO_TOL = 1e-5
SMO_MAX_ITER = 100_000
_TAU = 1e-12


@dataclass
class LinearSVMCore:
    W: np.ndarray  # (n_classes, d)
    b: np.ndarray

    def scores(self, Z):
        return Z @ self.W.T + self.b

    def predict(self, Z):
        return np.argmax(self.scores(Z), axis=1)

    def to_dict(self):
        return {"W": self.W.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["W"], dtype=float), np.asarray(d["b"], dtype=float))


def ovr_targets(y, n_classes):
    return np.where(np.asarray(y)[:, None] == np.arange(n_classes)[None, :], 1.0, -1.0)


def svm_objective(W, b, Z, Ypm, c):
    """Per-class primal objective, shape (n_classes,)."""
    margins = Ypm * (Z @ np.atleast_2d(W).T + b)
    return 0.5 * np.sum(np.atleast_2d(W) ** 2, axis=1) + c * np.maximum(0.0, 1.0 - margins).sum(axis=0)


def smo_binary(K, Z, y, c, tol=SMO_TOL, max_iter=SMO_MAX_ITER):
    """Solve one binary problem given the Gram matrix ``K`` of ``Z``; returns (w, b, iterations)."""
    n = len(y)
    alpha = np.zeros(n)
    grad = -np.ones(n)      # gradient of 0.5 a'Qa - sum(a), Q = yy' * K
    diag = np.diag(K)
    pos = y > 0
    it = 0
    for it in range(1, max_iter + 1):
        yg = -y * grad
        up = np.where(pos, alpha < c, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < c)
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(yg[up])])
        m_up = yg[i]
        m_low = yg[low].min()
        if m_up - m_low < tol:
            break
        # second-order choice of j among violating partners
        cand = low & (yg < m_up)
        a = np.maximum(diag[i] + diag - 2.0 * K[i], _TAU)
        gain = np.where(cand, (m_up - yg) ** 2 / a, -np.inf)
        j = int(np.argmax(gain))
        t = (m_up - yg[j]) / a[j]
        t = min(t, c - alpha[i] if pos[i] else alpha[i])
        t = min(t, alpha[j] if pos[j] else c - alpha[j])
        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        grad += y * (t * (K[:, i] - K[:, j]))
    w = (alpha * y) @ Z
    yg = -y * grad
    free = (alpha > _TAU) & (alpha < c - _TAU)
    if free.any():
        b = float(yg[free].mean())
    else:
        up = np.where(pos, alpha < c, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < c)
        hi = yg[up].max() if up.any() else yg[low].min()
        lo = yg[low].min() if low.any() else hi
        b = 0.5 * (hi + lo)
    return w, b, it


def fit_ovr(Z, y, n_classes, c, tol=SMO_TOL, max_iter=SMO_MAX_ITER):
    K = Z @ Z.T
    Y = ovr_targets(y, n_classes)
    W = np.zeros((n_classes, Z.shape[1]))
    b = np.zeros(n_classes)
    for k in range(n_classes):
        if np.all(Y[:, k] < 0):
            # class absent from training data: never the argmax
            b[k] = -1e9
            continue
        W[k], b[k], _ = smo_binary(K, Z, Y[:, k], c, tol, max_iter)
    return W, b


def train_linear_svm(data: LabeledSet, c: float, seed: int = 0, tol: float = SMO_TOL) -> TrainedModel:
    if c <= 0:
        raise ValueError("c must be positive")
    if np.unique(data.labels).size < 2:
        raise ValueError("linear SVM needs at least two classes in the training data")

    def fit(Z):
        W, b = fit_ovr(Z, data.labels, data.class_count, c, tol)
        return LinearSVMCore(W, b)

    return make_model("svm", data, fit, {"c": float(c), "tol": tol}, seed)
