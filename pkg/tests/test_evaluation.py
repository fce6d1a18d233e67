import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import blobs
from prosody_emotion.classifiers import LabeledSet, train
from prosody_emotion.evaluation import (DegenerateSplitError, Metrics, SplitSpec, allocate,
                                        class_names, confusion_matrix, evaluate, grid_models,
                                        metrics_from_predictions, pairwise_task, quadrant_task,
                                        singer_holdout_split, stratified_split, sweep, sweep_summary,
                                        write_confusion_csv, write_json, write_sweep_csv)
from prosody_emotion.taxonomy import EmotionLabel, Quadrant, quadrant_of

# hand-derived: F1 per class 1, 8/11, 2/3 -> mean 79/99
EXAMPLE_CM = np.array([[5, 0, 0], [0, 4, 1], [0, 2, 3]])
EXAMPLE_MACRO_F1 = 100 * 79 / 99


# ---------------------------------------------------------------- splits

def test_allocation_twenty_by_ten():
    labels = np.repeat(np.arange(20), 10)
    tr, va, te = stratified_split(labels, SplitSpec(seed=1))
    assert len(tr) + len(va) + len(te) == 200
    for c in range(20):
        counts = [np.sum(labels[p] == c) for p in (tr, va, te)]
        assert counts in ([7, 2, 1], [7, 1, 2])
    # the odd clip alternates between validation and test
    assert len(va) == len(te) == 30


def test_allocate_examples():
    assert allocate(10, (0.7, 0.15, 0.15)) == [7, 2, 1]
    assert allocate(10, (0.7, 0.15, 0.15), rotate=1) == [7, 1, 2]
    assert allocate(3, (0.7, 0.15, 0.15)) == [1, 1, 1]
    assert sum(allocate(101, (0.5, 0.3, 0.2))) == 101


def test_split_deterministic_disjoint_exhaustive():
    labels = np.random.default_rng(0).integers(0, 4, 97)
    labels[:12] = np.repeat(np.arange(4), 3)
    a = stratified_split(labels, SplitSpec(seed=3))
    b = stratified_split(labels, SplitSpec(seed=3))
    c = stratified_split(labels, SplitSpec(seed=4))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not all(np.array_equal(x, y) for x, y in zip(a, c))
    joined = np.concatenate(a)
    assert np.array_equal(np.sort(joined), np.arange(97))
    for part in a:
        assert set(np.unique(labels[part])) == {0, 1, 2, 3}


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(3, 40), min_size=1, max_size=8), st.integers(0, 1000))
def test_split_property(sizes, seed):
    labels = np.repeat(np.arange(len(sizes)), sizes)
    parts = stratified_split(labels, SplitSpec(seed=seed))
    assert np.array_equal(np.sort(np.concatenate(parts)), np.arange(len(labels)))
    for part in parts:
        assert set(labels[part]) == set(range(len(sizes)))


def test_split_rejects_tiny_class():
    with pytest.raises(DegenerateSplitError):
        stratified_split(np.array([0, 0, 0, 1, 1]))
    with pytest.raises(ValueError):
        SplitSpec(0.5, 0.3, 0.3)


def test_split_by_singer_strata():
    labels = np.tile(np.repeat([0, 1], 6), 2)
    singers = ["a"] * 12 + ["b"] * 12
    parts = stratified_split(labels, SplitSpec(), groups=singers)
    s = np.array(singers)
    for part in parts:
        assert {"a", "b"} <= set(s[part])


def test_singer_holdout():
    labels = np.tile(np.arange(4), 15)
    singers = np.repeat(["a", "b", "c"], 20)
    tr, va, te = singer_holdout_split(singers, labels, ["c"], seed=2)
    assert set(singers[te]) == {"c"} and len(te) == 20
    assert set(singers[np.concatenate([tr, va])]) == {"a", "b"}
    assert len(set(tr) & set(va)) == 0 and len(tr) + len(va) == 40
    with pytest.raises(DegenerateSplitError):
        singer_holdout_split(singers, labels, ["a", "b", "c"])


# ---------------------------------------------------------------- metrics

def test_example_confusion():
    m = Metrics(EXAMPLE_CM)
    assert m.accuracy == pytest.approx(80.0)
    assert m.macro_f1 == pytest.approx(EXAMPLE_MACRO_F1, abs=1e-9)
    assert m.to_dict()["macro_f1"] == 79.8
    np.testing.assert_array_equal(m.support, [5, 5, 5])


def test_perfect_and_constant_predictors():
    y = np.repeat(np.arange(4), 5)
    m = Metrics(confusion_matrix(y, y, 4))
    assert m.accuracy == 100 and m.macro_f1 == 100
    assert np.array_equal(m.confusion, np.diag(np.full(4, 5)))
    m = Metrics(confusion_matrix(y, np.zeros_like(y), 4))
    assert m.accuracy == 25


def test_empty_class_has_zero_f1():
    m = Metrics(np.array([[3, 0], [0, 0]]))
    assert m.f1[1] == 0 and m.macro_f1 == pytest.approx(50.0)
    with pytest.raises(ValueError):
        Metrics(np.zeros((2, 2)))


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6).flatmap(
    lambda k: st.tuples(st.just(k), st.lists(st.tuples(st.integers(0, k - 1), st.integers(0, k - 1)),
                                             min_size=1, max_size=60))))
def test_two_path_consistency(case):
    k, pairs = case
    t, p = map(np.array, zip(*pairs))
    m = Metrics(confusion_matrix(t, p, k))
    s = metrics_from_predictions(t, p, k)
    assert m.accuracy == pytest.approx(s["accuracy"], abs=1e-9)
    assert m.macro_f1 == pytest.approx(s["macro_f1"], abs=1e-9)
    assert np.array_equal(m.confusion.sum(axis=1), np.bincount(t, minlength=k))


def test_evaluate_checks_class_count():
    data = blobs(3, 10, 4, 5.0, 0)
    model = train("knn", data, 1)
    assert evaluate(model, data).accuracy == 100
    with pytest.raises(ValueError):
        evaluate(model, LabeledSet(data.vectors, data.labels, 4))


# ---------------------------------------------------------------- tasks

def twenty_class(per=6, seed=0):
    return blobs(20, per, 5, 8.0, seed)


def test_quadrant_task_balanced():
    q = quadrant_task(twenty_class())
    assert q.class_count == 4
    assert np.array_equal(np.bincount(q.labels), [30, 30, 30, 30])
    lab = twenty_class().labels
    assert np.all(q.labels[lab == EmotionLabel.Anger] == Quadrant.HCN)
    assert np.all(q.labels[lab == EmotionLabel.Hate] == Quadrant.HCN)
    with pytest.raises(ValueError):
        quadrant_task(q)


def test_pairwise_task():
    data = twenty_class()
    p = pairwise_task(data, EmotionLabel.Love, EmotionLabel.Disgust)
    assert p.class_count == 2 and len(p) == 12
    assert np.array_equal(np.bincount(p.labels), [6, 6])
    np.testing.assert_array_equal(p.vectors[p.labels == 0], data.vectors[data.labels == EmotionLabel.Love])
    missing = data.subset(rows=np.flatnonzero(data.labels != EmotionLabel.Love))
    with pytest.raises(ValueError):
        pairwise_task(missing, EmotionLabel.Love, EmotionLabel.Disgust)


def test_pairwise_not_worse_than_twenty_class():
    data = blobs(20, 20, 6, 3.0, 5)
    tr, _, te = stratified_split(data.labels, SplitSpec(seed=0))
    full = train("knn", data.subset(tr), 3)
    pair = (EmotionLabel.Love, EmotionLabel.Disgust)
    sel = np.isin(data.labels[te], pair)
    acc20 = np.mean(full.predict(data.vectors[te][sel]) == data.labels[te][sel])
    ptr = pairwise_task(data.subset(tr), *pair)
    pte = pairwise_task(data.subset(te), *pair)
    acc2 = np.mean(train("knn", ptr, 3).predict(pte.vectors) == pte.labels)
    assert acc2 >= acc20


def test_class_names():
    assert len(class_names("emotions20")) == 20
    assert class_names("big4") == ["HCN", "HCP", "LCN", "LCP"]
    assert class_names("pair:love:Disgust") == ["Love", "Disgust"]
    with pytest.raises(ValueError):
        class_names("nine")


# ---------------------------------------------------------------- sweeps

@pytest.fixture(scope="module")
def splits():
    data = blobs(4, 30, 6, 3.0, 7)
    tr, va, te = stratified_split(data.labels, SplitSpec(seed=0))
    return data.subset(tr), data.subset(va), data.subset(te)


def test_singleton_grid(splits):
    r = sweep("knn", *splits, grid=[5])
    assert r.best_value == 5 and len(r.grid) == 1
    assert r.model.hyperparams["k"] == 5
    assert len(r.model.mean) == 6


@pytest.mark.parametrize("family", ["knn", "svm", "random_forest"])
def test_best_is_max_with_small_ties(splits, family):
    grid = {"knn": [1, 3, 5, 9], "svm": [0.1, 1.0, 10.0], "random_forest": [3, 6, 12]}[family]
    r = sweep(family, *splits, grid=grid)
    vals = [m.macro_f1 for _, m in r.grid]
    assert r.best_val.macro_f1 == max(vals)
    assert r.best_value == grid[vals.index(max(vals))]


@pytest.mark.parametrize("family", ["random_forest", "extra_trees", "gradient_boosting"])
def test_prefix_models_equal_direct_training(splits, family):
    tr = splits[0]
    q = splits[2].vectors
    for v, m in grid_models(family, tr, [2, 5], seed=4):
        direct = train(family, tr, v, seed=4)
        assert json.dumps(m.to_dict()) == json.dumps(direct.to_dict())
        assert np.array_equal(m.predict(q), direct.predict(q))


def test_default_grids_cover_reported_values():
    from prosody_emotion.classifiers import FAMILIES
    assert {11, 15} <= set(FAMILIES["knn"].grid)
    assert {1.0, 5.0} <= set(FAMILIES["svm"].grid)
    for fam in ("random_forest", "extra_trees", "gradient_boosting"):
        assert FAMILIES[fam].grid == (100, 200, 500)


# ---------------------------------------------------------------- artifacts

def test_writers(tmp_path, splits):
    r = sweep("knn", *splits, grid=[1, 3])
    names = class_names("big4")
    write_confusion_csv(tmp_path / "c.csv", r.test, names)
    rows = list(csv.reader(open(tmp_path / "c.csv")))
    assert rows[0] == [""] + names
    assert [row[0] for row in rows[1:]] == names
    assert sum(int(x) for row in rows[1:] for x in row[1:]) == len(splits[2])
    write_sweep_csv(tmp_path / "s.csv", [r])
    rows = list(csv.reader(open(tmp_path / "s.csv")))
    assert rows[0] == ["family", "param", "val_accuracy", "val_f1"]
    assert [row[1] for row in rows[1:]] == ["1", "3"]
    assert all(len(row[2].split(".")[1]) == 1 for row in rows[1:])
    summary = sweep_summary(r, names)
    write_json(tmp_path / "m.json", summary)
    back = json.loads((tmp_path / "m.json").read_text())
    assert back["best_hyperparams"] == {"k": r.best_value}
    assert back["accuracy"] == round(r.test.accuracy, 1)
    assert len(back["per_class"]) == 4


def test_quadrant_lookup_matches_taxonomy():
    q = quadrant_task(LabeledSet(np.zeros((20, 1)), np.arange(20), 20))
    assert [int(quadrant_of(e)) for e in EmotionLabel] == q.labels.tolist()
