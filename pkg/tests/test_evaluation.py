import json
import math

import numpy as np
import pytest

from conftest import blobs
from mdlgbc.dataset import RawTable, stratified_folds
from mdlgbc.evaluation import (
    EvalReport,
    accuracy,
    baseline_1nn,
    check_report,
    cross_validate,
    macro_f1,
)
from oracles import nearest


def test_accuracy_examples():
    assert accuracy([1, 2, 3], [1, 2, 3]) == 1.0
    assert accuracy([1, 2], [2, 1]) == 0.0
    assert accuracy([1, 1, 2, 2], [1, 1, 2, 1]) == 0.75
    with pytest.raises(ValueError):
        accuracy([1], [1, 2])


def test_macro_f1_examples():
    assert macro_f1(["a", "b", "a"], ["a", "b", "a"]) == 1.0
    # F1 of class 1 is 2/3, class 2 never predicted
    assert math.isclose(macro_f1([1, 1, 2, 2], [1, 1, 1, 1]), 1 / 3, rel_tol=1e-15)
    assert macro_f1([1, 1, 2, 2], [1, 1, 1, 1], classes=[1, 2, 3]) == pytest.approx(2 / 9)


def test_macro_f1_equals_accuracy_on_balanced_diagonal():
    y = [0, 0, 1, 1, 2, 2]
    assert macro_f1(y, y) == accuracy(y, y)


def test_baseline_1nn():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]])
    assert baseline_1nn(X, ["a", "b", "c"], X) == ["a", "b", "c"]
    assert baseline_1nn(X, ["a", "b", "c"], np.array([[0.5, 0.0]])) == ["a"]
    rng = np.random.default_rng(2)
    T, Q = rng.random((50, 3)), rng.random((20, 3))
    labels = list(range(50))
    got = baseline_1nn(T, labels, Q)
    for q, g in zip(Q, got):
        assert math.dist(q, T[g]) == nearest(q, T)


def separable_table(n=20):
    X, y = blobs(np.random.default_rng(0), n, 2, 2, spread=0.01)
    X = np.where(y[:, None] == 0, X * 0.3, 0.7 + X * 0.3)
    return RawTable(X, ["a", "b"], [f"k{c}" for c in y])


def test_separable_blobs_perfect_on_every_fold():
    table = separable_table()
    rep = cross_validate(table, k=5, seed=2035)
    assert all(f.accuracy == 1.0 for f in rep.folds)
    plan = stratified_folds(table.label_values, 5, 2035)
    for i in range(5):
        tr, te = plan.train_test(i)
        pred = baseline_1nn(table.rows[tr], [table.label_values[j] for j in tr], table.rows[te])
        assert pred == [table.label_values[j] for j in te]


def test_leave_one_out():
    table = separable_table(8)
    rep = cross_validate(table, k=8, seed=1)
    assert len(rep.folds) == 8 and all(f.n_test == 1 for f in rep.folds)


def test_report_determinism_and_aggregates(iris):
    a = cross_validate(iris, k=5, seed=2035, name="iris")
    b = cross_validate(iris, k=5, seed=2035, name="iris")
    assert a.to_json() == b.to_json() and a.to_text() == b.to_text()
    doc = json.loads(a.to_json(timings=True))
    check_report(doc)
    accs = [f["accuracy"] for f in doc["folds"]]
    mean = sum(accs) / 5
    std = math.sqrt(sum((x - mean) ** 2 for x in accs) / 4)
    assert math.isclose(doc["aggregate"]["accuracy"]["std"], std, rel_tol=1e-12)
    assert "train_seconds" not in json.loads(a.to_json())["folds"][0]
    assert " ± " in a.to_text()


def test_check_report_catches_tampering(iris):
    doc = json.loads(cross_validate(iris, k=3, seed=5).to_json())
    doc["aggregate"]["accuracy"]["mean"] += 0.01
    with pytest.raises(ValueError):
        check_report(doc)


def test_normalization_is_refit_per_fold(iris):
    rep = cross_validate(iris, k=10, seed=2035)
    assert len({(tuple(f.mins), tuple(f.maxs)) for f in rep.folds}) > 1
    for f in rep.folds:
        assert 0.0 <= f.accuracy <= 1.0 and 0.0 <= f.macro_f1 <= 1.0


def test_report_metadata():
    rep = EvalReport("x", 2, 7, [])
    assert rep.rng == "splitmix64" and rep.format_version == 1
