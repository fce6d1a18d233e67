"""Greedy forward (additive) feature selection with the feed-forward network as probe."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .aggregation import aggregate_feature_names
from .classifiers import LabeledSet
from .classifiers.network import BATCH_SIZE, FFNN_EPOCHS, HIDDEN, LEARNING_RATE, train_ffnn
from .evaluation import evaluate


@dataclass(frozen=True)
class ProbeConfig:
    epochs: int = FFNN_EPOCHS
    batch_size: int = BATCH_SIZE
    lr: float = LEARNING_RATE
    hidden: int = HIDDEN


@dataclass
class SelectionTrace:
    ranking: list
    f1_curve: list
    models_trained: int
    seed: int
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    round_scores: list = field(default_factory=list)  # per round: {feature: val macro-F1}


def probe_score(train: LabeledSet, val: LabeledSet, columns, probe: ProbeConfig, seed: int) -> float:
    """Validation macro-F1 of a probe network trained on ``columns`` only."""
    model = train_ffnn(train.subset(columns=columns), probe.epochs, seed,
                       probe.batch_size, probe.lr, probe.hidden)
    return evaluate(model, val.subset(columns=columns)).macro_f1


def additive_selection(train: LabeledSet, val: LabeledSet, probe: ProbeConfig = ProbeConfig(),
                       seed: int = 0, max_features: int | None = None,
                       n_jobs: int = 1) -> SelectionTrace:
    """Add, one round at a time, the candidate whose probe scores the best validation macro-F1.

    The model for candidate ``j`` in round ``r`` (0-based) is seeded with
    ``seed + r * n + j``, so scheduling never changes the outcome. Ties go
    to the lower feature index. ``max_features`` stops early.
    """
    n = train.feature_count
    if n < 1:
        raise ValueError("need at least one feature")
    rounds = n if max_features is None else min(n, max_features)
    chosen: list[int] = []
    remaining = list(range(n))
    curve, per_round = [], []
    trained = 0
    pool = ThreadPoolExecutor(n_jobs) if n_jobs > 1 else None
    try:
        for r in range(rounds):
            def score(j, r=r):
                return probe_score(train, val, chosen + [j], probe, seed + r * n + j)
            cands = list(remaining)
            scores = list(pool.map(score, cands)) if pool else [score(j) for j in cands]
            trained += len(cands)
            best = max(range(len(cands)), key=lambda i: (scores[i], -cands[i]))
            chosen.append(cands[best])
            remaining.remove(cands[best])
            curve.append(scores[best])
            per_round.append(dict(zip(cands, scores)))
    finally:
        if pool:
            pool.shutdown()
    return SelectionTrace(chosen, curve, trained, seed, probe, per_round)


def models_for(n: int) -> int:
    return n * (n + 1) // 2


def selection_rows(trace: SelectionTrace, names=None):
    names = names or aggregate_feature_names()
    return [(rank, idx + 1, names[idx], f1)
            for rank, (idx, f1) in enumerate(zip(trace.ranking, trace.f1_curve), start=1)]


def write_selection_csv(path, trace: SelectionTrace, names=None) -> None:
    """One row per selected feature: rank, 1-based aggregate index (the cache's f-column), name,
    validation macro-F1 after adding it (shortest round-trip repr)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "feature_index", "feature_name", "cumulative_f1"])
        for rank, idx, name, f1 in selection_rows(trace, names):
            w.writerow([rank, idx, name, repr(float(f1))])


def selection_meta(trace: SelectionTrace) -> dict:
    return {"seed": trace.seed, "probe": asdict(trace.probe), "models_trained": trace.models_trained,
            "features_selected": len(trace.ranking)}
