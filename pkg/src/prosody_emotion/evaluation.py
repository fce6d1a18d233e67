"""Stratified splits, metrics, hyperparameter sweeps and report artifacts."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import classifiers
from .classifiers import FAMILIES, LabeledSet, TrainedModel
from .classifiers.boosting import GBMCore
from .classifiers.trees import Forest
from .taxonomy import EMOTION_NAMES, QUADRANT_NAMES, EmotionLabel, quadrant_of


# splits ---------------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    train: float = 0.70
    val: float = 0.15
    test: float = 0.15
    seed: int = 0
    stratify_singer: bool = False

    def __post_init__(self):
        fr = self.fractions
        if min(fr) <= 0 or abs(sum(fr) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must be positive and sum to 1, got {fr}")

    @property
    def fractions(self):
        return (self.train, self.val, self.test)


class DegenerateSplitError(ValueError):
    pass


def allocate(n: int, fractions, rotate: int = 0) -> list[int]:
    """Largest-remainder allocation of ``n`` items over partitions.

    Equal remainders are broken in an order rotated among the tied partitions, so that
    repeated calls with increasing ``rotate`` spread the odd items around.
    Every partition gets at least one item when ``n`` allows it.
    """
    p = len(fractions)
    ideal = [n * f for f in fractions]
    counts = [int(np.floor(x + 1e-9)) for x in ideal]
    rem = n - sum(counts)
    frac = [round(ideal[i] - counts[i], 9) for i in range(p)]
    key = []
    for r in sorted(set(frac), reverse=True):
        tied = [i for i in range(p) if frac[i] == r]
        s = rotate % len(tied)
        key += tied[s:] + tied[:s]
    for i in key[:rem]:
        counts[i] += 1
    if n >= p:
        while 0 in counts:
            donor = max(range(p), key=lambda i: (counts[i], -i))
            counts[donor] -= 1
            counts[counts.index(0)] += 1
    return counts


def stratified_split(labels, spec: SplitSpec = SplitSpec(), groups=None):
    """Index arrays (train, val, test) with per-class proportional allocation.

    ``groups`` optionally refines the strata (e.g. singer ids); strata are
    then (label, group) pairs.
    """
    labels = np.asarray(labels)
    keys = list(zip(labels.tolist(), groups)) if groups is not None else labels.tolist()
    strata: dict = {}
    for i, k in enumerate(keys):
        strata.setdefault(k, []).append(i)
    n_parts = len(spec.fractions)
    rng = np.random.default_rng(spec.seed)
    parts = [[] for _ in range(n_parts)]
    for rank, key in enumerate(sorted(strata)):
        idx = np.asarray(strata[key])
        if len(idx) < n_parts:
            raise DegenerateSplitError(
                f"stratum {key!r} has {len(idx)} clips; need at least {n_parts}")
        idx = idx[rng.permutation(len(idx))]
        start = 0
        for p, c in enumerate(allocate(len(idx), spec.fractions, rank)):
            parts[p].extend(idx[start:start + c].tolist())
            start += c
    return tuple(np.asarray(sorted(p), dtype=np.int64) for p in parts)


def singer_holdout_split(singers, labels, test_singers, val_fraction=0.15, seed=0):
    """Train/val from the remaining singers (stratified by label), test = all clips of ``test_singers``."""
    singers = np.asarray(singers)
    labels = np.asarray(labels)
    held = np.isin(singers, list(test_singers))
    if not held.any() or held.all():
        raise DegenerateSplitError("holdout must leave both training and test singers")
    rest = np.flatnonzero(~held)
    tr, va = [], []
    rng = np.random.default_rng(seed)
    for rank, lab in enumerate(np.unique(labels[rest])):
        idx = rest[labels[rest] == lab]
        if len(idx) < 2:
            raise DegenerateSplitError(f"class {lab} has fewer than 2 training clips")
        idx = idx[rng.permutation(len(idx))]
        n_tr, n_va = allocate(len(idx), (1 - val_fraction, val_fraction), rank)
        tr.extend(idx[:n_tr].tolist())
        va.extend(idx[n_tr:].tolist())
    return (np.asarray(sorted(tr), dtype=np.int64), np.asarray(sorted(va), dtype=np.int64),
            np.flatnonzero(held))


# task construction ----------------------------------------------------------

def quadrant_task(data: LabeledSet) -> LabeledSet:
    """Relabel a 20-emotion set into the four valence/control quadrants."""
    if data.class_count != len(EmotionLabel):
        raise ValueError("quadrant_task expects 20-emotion labels")
    lut = np.array([int(quadrant_of(e)) for e in EmotionLabel])
    return LabeledSet(data.vectors, lut[data.labels], 4)


def pairwise_task(data: LabeledSet, e1, e2) -> LabeledSet:
    """Keep only clips of two emotions, relabelled 0 (``e1``) and 1 (``e2``)."""
    if data.class_count != len(EmotionLabel):
        raise ValueError("pairwise_task expects 20-emotion labels")
    e1, e2 = int(EmotionLabel(e1)), int(EmotionLabel(e2))
    if e1 == e2:
        raise ValueError("pairwise task needs two different emotions")
    for e in (e1, e2):
        if not np.any(data.labels == e):
            raise ValueError(f"no clips labelled {EmotionLabel(e).name}")
    keep = (data.labels == e1) | (data.labels == e2)
    return LabeledSet(data.vectors[keep], (data.labels[keep] == e2).astype(np.int64), 2)


def class_names(taxonomy: str) -> list[str]:
    if taxonomy == "emotions20":
        return list(EMOTION_NAMES)
    if taxonomy == "big4":
        return list(QUADRANT_NAMES)
    if taxonomy.startswith("pair:"):
        _, a, b = taxonomy.split(":")
        from .taxonomy import parse_label
        return [parse_label(a).name, parse_label(b).name]
    raise ValueError(f"unknown taxonomy {taxonomy!r}")


# metrics --------------------------------------------------------------------

@dataclass
class Metrics:
    confusion: np.ndarray
    accuracy: float = field(init=False)
    macro_f1: float = field(init=False)
    precision: np.ndarray = field(init=False)
    recall: np.ndarray = field(init=False)
    f1: np.ndarray = field(init=False)

    def __post_init__(self):
        cm = np.asarray(self.confusion, dtype=np.int64)
        self.confusion = cm
        total = cm.sum()
        if total == 0:
            raise ValueError("cannot compute metrics for an empty set")
        tp = np.diag(cm).astype(float)
        pred = cm.sum(axis=0)
        true = cm.sum(axis=1)
        self.precision = np.divide(tp, pred, out=np.zeros_like(tp), where=pred > 0)
        self.recall = np.divide(tp, true, out=np.zeros_like(tp), where=true > 0)
        denom = self.precision + self.recall
        self.f1 = np.divide(2 * self.precision * self.recall, denom, out=np.zeros_like(tp), where=denom > 0)
        self.accuracy = 100.0 * tp.sum() / total
        self.macro_f1 = 100.0 * self.f1.mean()

    @property
    def support(self):
        return self.confusion.sum(axis=1)

    def to_dict(self, names=None) -> dict:
        names = names or [str(i) for i in range(len(self.f1))]
        return {
            "accuracy": round(self.accuracy, 1),
            "macro_f1": round(self.macro_f1, 1),
            "per_class": [
                {"class": n, "precision": round(100 * p, 1), "recall": round(100 * r, 1),
                 "f1": round(100 * f, 1), "support": int(s)}
                for n, p, r, f, s in zip(names, self.precision, self.recall, self.f1, self.support)
            ],
        }


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return cm


def metrics_from_predictions(y_true, y_pred, n_classes: int) -> dict:
    """Accuracy and macro-F1 (percent) accumulated pair by pair, without a confusion matrix."""
    tp = [0] * n_classes
    n_pred = [0] * n_classes
    n_true = [0] * n_classes
    correct = total = 0
    for t, p in zip(y_true, y_pred):
        t, p = int(t), int(p)
        total += 1
        n_true[t] += 1
        n_pred[p] += 1
        if t == p:
            tp[t] += 1
            correct += 1
    f1s = []
    for c in range(n_classes):
        prec = tp[c] / n_pred[c] if n_pred[c] else 0.0
        rec = tp[c] / n_true[c] if n_true[c] else 0.0
        f1s.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    return {"accuracy": 100.0 * correct / total, "macro_f1": 100.0 * sum(f1s) / n_classes}


def evaluate(model: TrainedModel, data: LabeledSet) -> Metrics:
    if len(data) == 0:
        raise ValueError("empty test set")
    if data.class_count != model.class_count:
        raise ValueError(f"model has {model.class_count} classes, data has {data.class_count}")
    return Metrics(confusion_matrix(data.labels, model.predict(data.vectors), data.class_count))


# sweeps ---------------------------------------------------------------------

@dataclass
class SweepResult:
    family: str
    param: str
    grid: list                 # [(value, val Metrics)]
    best_value: object
    best_val: Metrics
    test: Metrics
    model: TrainedModel

    def rows(self):
        return [(self.family, v, m.accuracy, m.macro_f1) for v, m in self.grid]


def _prefix_model(model: TrainedModel, value) -> TrainedModel:
    """The model trained with a smaller tree/stage count, cut from a larger one."""
    core = model.core
    if isinstance(core, Forest):
        new, key = Forest(core.trees[:value], core.n_classes), "n_trees"
    elif isinstance(core, GBMCore):
        new = GBMCore(core.init, [stages[:value] for stages in core.trees], core.learning_rate,
                      core.train_loss[:value])
        key = "n_stages"
    else:
        raise TypeError(f"{model.family} models cannot be truncated")
    hp = dict(model.hyperparams)
    hp[key] = int(value)
    return TrainedModel(model.family, model.class_count, model.feature_count, model.mean,
                        model.scale, new, hp, model.seed)


# tree t is seeded seed+t and boosting stages are sequential, so a smaller
# ensemble is exactly a prefix of a larger one trained with the same seed
NESTED_FAMILIES = ("random_forest", "extra_trees", "gradient_boosting")


def grid_models(family: str, data: LabeledSet, grid, seed: int = 0, n_jobs: int = 1):
    grid = sorted(grid)
    if family in NESTED_FAMILIES:
        big = classifiers.train(family, data, grid[-1], seed, n_jobs)
        return [(v, big if v == grid[-1] else _prefix_model(big, v)) for v in grid]
    return [(v, classifiers.train(family, data, v, seed, n_jobs)) for v in grid]


def sweep(family: str, train: LabeledSet, val: LabeledSet, test: LabeledSet, grid=None,
          seed: int = 0, n_jobs: int = 1) -> SweepResult:
    """Pick the grid value with the best validation macro-F1, refit on train+val, score on test.

    Ties go to the smaller value.
    """
    fam = FAMILIES[family]
    grid = sorted(fam.grid if grid is None else grid)
    if not grid:
        raise ValueError("empty hyperparameter grid")
    scored = [(v, evaluate(m, val)) for v, m in grid_models(family, train, grid, seed, n_jobs)]
    best_value, best_val = scored[0]
    for v, m in scored[1:]:
        if m.macro_f1 > best_val.macro_f1:
            best_value, best_val = v, m
    model = classifiers.train(family, train.concat(val), best_value, seed, n_jobs)
    return SweepResult(family, fam.param, scored, best_value, best_val, evaluate(model, test), model)


# artifacts ------------------------------------------------------------------

def write_confusion_csv(path, metrics: Metrics, names) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([""] + list(names))
        for name, row in zip(names, metrics.confusion):
            w.writerow([name] + [int(x) for x in row])


def write_sweep_csv(path, results) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["family", "param", "val_accuracy", "val_f1"])
        for r in results:
            for fam, v, acc, f1 in r.rows():
                w.writerow([fam, v, f"{acc:.1f}", f"{f1:.1f}"])


def sweep_summary(result: SweepResult, names) -> dict:
    d = result.test.to_dict(names)
    d.update({
        "family": result.family,
        "model": FAMILIES[result.family].label,
        "best_hyperparams": {result.param: result.best_value},
        "val_accuracy": round(result.best_val.accuracy, 1),
        "val_macro_f1": round(result.best_val.macro_f1, 1),
    })
    return d


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
