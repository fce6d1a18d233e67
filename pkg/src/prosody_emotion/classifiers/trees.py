"""CART trees stored as flat arrays, random forests, extra trees.

Classification trees split on Gini impurity; regression trees (used by
gradient boosting) split on squared error and take their leaf values from
caller-supplied gradient/hessian sums.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np


@dataclass
class Tree:
    feature: np.ndarray    # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray      # (n_nodes, n_classes) class counts, or (n_nodes,) leaf outputs

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row (x[f] <= threshold goes left)."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.arange(X.shape[0])
        while active.size:
            f = self.feature[node[active]]
            inner = f >= 0
            active = active[inner]
            if not active.size:
                break
            f = f[inner]
            cur = node[active]
            go_left = X[active, f] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
        return node

    def predict_value(self, X):
        return self.value[self.apply(X)]

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def to_dict(self) -> dict:
        return {"feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(),
                "value": self.value.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(np.asarray(d["feature"], dtype=np.int64), np.asarray(d["threshold"], dtype=float),
                   np.asarray(d["left"], dtype=np.int64), np.asarray(d["right"], dtype=np.int64),
                   np.asarray(d["value"], dtype=float))


class _Builder:
    def __init__(self):
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def add(self, value) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.feature) - 1

    def split(self, node, f, thr, left, right):
        self.feature[node] = f
        self.threshold[node] = thr
        self.left[node] = left
        self.right[node] = right

    def build(self) -> Tree:
        return Tree(np.asarray(self.feature, dtype=np.int64), np.asarray(self.threshold, dtype=float),
                    np.asarray(self.left, dtype=np.int64), np.asarray(self.right, dtype=np.int64),
                    np.asarray(self.value, dtype=float))


def _midpoint(a, b):
    m = 0.5 * (a + b)
    return a if m >= b else m


def _best_gini_split(Xn, Yn, feats):
    """Exhaustive threshold search over ``feats``; returns (feature, threshold) or None."""
    n = Xn.shape[0]
    Xc = Xn[:, feats]
    order = np.argsort(Xc, axis=0, kind="stable")
    xs = np.take_along_axis(Xc, order, axis=0)
    counts = np.cumsum(Yn[order], axis=0)[:-1]           # (n-1, m, C)
    total = Yn.sum(axis=0)
    nl = np.arange(1, n, dtype=float)[:, None]
    nr = n - nl
    right = total - counts
    imp = (nl - (counts ** 2).sum(-1) / nl) + (nr - (right ** 2).sum(-1) / nr)
    imp = np.where(xs[1:] > xs[:-1], imp, np.inf)
    flat = np.argmin(imp.T)                              # features first: ties -> earlier feature
    j, i = divmod(int(flat), n - 1)
    if not np.isfinite(imp[i, j]):
        return None
    return feats[j], _midpoint(xs[i, j], xs[i + 1, j])


def _random_gini_split(Xn, Yn, feats, rng):
    Xc = Xn[:, feats]
    lo, hi = Xc.min(axis=0), Xc.max(axis=0)
    thr = rng.uniform(lo, hi)
    go_left = Xc <= thr
    nl = go_left.sum(axis=0).astype(float)
    nr = Xn.shape[0] - nl
    counts = go_left.T.astype(float) @ Yn                # (m, C)
    right = Yn.sum(axis=0) - counts
    imp = (nl - (counts ** 2).sum(-1) / np.maximum(nl, 1)) + (nr - (right ** 2).sum(-1) / np.maximum(nr, 1))
    imp = np.where((nl > 0) & (nr > 0), imp, np.inf)
    j = int(np.argmin(imp))
    if not np.isfinite(imp[j]):
        return None
    return feats[j], float(thr[j])


def build_classification_tree(X, y, n_classes, max_features=None, splitter="best",
                              rng=None, min_samples_split=2, max_depth=None) -> Tree:
    """Grow an unpruned Gini CART tree.

    At each node ``max_features`` non-constant features are drawn in random
    order; ``splitter="random"`` draws one uniform threshold per feature
    instead of scanning all of them.
    """
    X = np.asarray(X, dtype=float)
    Y = np.eye(n_classes)[np.asarray(y)]
    d = X.shape[1]
    m = d if max_features is None else max_features
    rng = rng if rng is not None else np.random.default_rng(0)
    b = _Builder()
    root = b.add(Y.sum(axis=0))
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        counts = b.value[node]
        if len(idx) < min_samples_split or np.count_nonzero(counts) <= 1:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        Xn = X[idx]
        varying = np.ptp(Xn, axis=0) > 0
        if not varying.any():
            continue
        perm = rng.permutation(d)
        feats = perm[varying[perm]][:m]
        if splitter == "best":
            found = _best_gini_split(Xn, Y[idx], feats)
        else:
            found = _random_gini_split(Xn, Y[idx], feats, rng)
        if found is None:
            continue
        f, thr = found
        mask = Xn[:, f] <= thr
        li, ri = idx[mask], idx[~mask]
        lnode = b.add(Y[li].sum(axis=0))
        rnode = b.add(Y[ri].sum(axis=0))
        b.split(node, int(f), float(thr), lnode, rnode)
        stack.append((rnode, ri, depth + 1))
        stack.append((lnode, li, depth + 1))
    return b.build()


def build_regression_tree(X, grad, hess, max_depth=3, min_samples_split=2, order=None) -> Tree:
    """Least-squares tree on ``grad`` with Newton leaf values sum(grad)/sum(hess).

    ``order`` is an optional (d, n) per-feature argsort of X, reused across
    trees fitted on the same design matrix.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    if order is None:
        order = np.argsort(X, axis=0, kind="stable").T
    rows = np.arange(d)[:, None]

    def leaf_value(idx):
        h = hess[idx].sum()
        return grad[idx].sum() / h if h > 1e-150 else 0.0

    b = _Builder()
    root = b.add(leaf_value(np.arange(n)))
    in_node = np.empty(n, dtype=bool)
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        k = len(idx)
        if k < min_samples_split or depth >= max_depth:
            continue
        in_node[:] = False
        in_node[idx] = True
        sorted_idx = order[in_node[order]].reshape(d, k)
        xs = X[sorted_idx, rows]
        gs = grad[sorted_idx]
        cl = np.cumsum(gs, axis=1)[:, :-1]
        g_tot = gs[0].sum()
        nl = np.arange(1, k, dtype=float)
        gain = cl ** 2 / nl + (g_tot - cl) ** 2 / (k - nl)
        gain = np.where(xs[:, 1:] > xs[:, :-1], gain, -np.inf)
        flat = int(np.argmax(gain))
        f, i = divmod(flat, k - 1)
        if not np.isfinite(gain[f, i]):
            continue
        thr = _midpoint(xs[f, i], xs[f, i + 1])
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        lnode = b.add(leaf_value(li))
        rnode = b.add(leaf_value(ri))
        b.split(node, int(f), float(thr), lnode, rnode)
        stack.append((rnode, ri, depth + 1))
        stack.append((lnode, li, depth + 1))
    return b.build()


def default_max_features(d: int) -> int:
    return max(1, int(np.sqrt(d)))


@dataclass
class Forest:
    trees: list
    n_classes: int

    def votes(self, Z):
        v = np.zeros((Z.shape[0], self.n_classes))
        rows = np.arange(Z.shape[0])
        for t in self.trees:
            # each tree votes for the plurality class of its leaf (ties -> lower code)
            v[rows, np.argmax(t.predict_value(Z), axis=1)] += 1
        return v

    def predict(self, Z):
        return np.argmax(self.votes(Z), axis=1)

    def to_dict(self):
        return {"n_classes": self.n_classes, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d):
        return cls([Tree.from_dict(t) for t in d["trees"]], d["n_classes"])


def grow_forest(X, y, n_classes, n_trees, seed, bootstrap, splitter, max_features=None,
                n_jobs=1) -> Forest:
    """Tree t is grown from ``default_rng(seed + t)`` so results do not depend on n_jobs."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    m = default_max_features(X.shape[1]) if max_features is None else max_features

    def grow(t):
        rng = np.random.default_rng(seed + t)
        if bootstrap:
            idx = rng.integers(0, X.shape[0], X.shape[0])
            Xt, yt = X[idx], y[idx]
        else:
            Xt, yt = X, y
        return build_classification_tree(Xt, yt, n_classes, m, splitter, rng)

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            trees = list(pool.map(grow, range(n_trees)))
    else:
        trees = [grow(t) for t in range(n_trees)]
    return Forest(trees, n_classes)
