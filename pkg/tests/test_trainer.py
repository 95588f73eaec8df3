import math

import numpy as np
import pytest

from conftest import blobs
from mdlgbc.ball import build_ball
from mdlgbc.boundary import build_context, with_boundary
from mdlgbc.coding import DEFAULT_CONSTANTS, ball_total
from mdlgbc.competition import best_core_boundary, best_two_ball
from mdlgbc.dataset import LabeledDataset, fit_normalizer, transform
from mdlgbc.model_io import dumps
from mdlgbc.trainer import (
    SMALL,
    estimate_floors,
    fit,
    nearest_rank_percentile,
    train_class,
)


def dataset(X, y):
    names = [str(c) for c in sorted(set(y.tolist()))]
    return LabeledDataset(np.asarray(X, float), np.asarray(y), names)


def test_singleton_class():
    ctx = build_context(np.array([[0.5, 0.5], [0.1, 0.9]]), np.array([0, 1]), 0, 2, 1)
    balls, evaluations = train_class(ctx)
    assert len(balls) == 1 and balls[0].n == 1 and balls[0].weight == 1.0
    assert evaluations == 0


def test_tight_cluster_stays_whole():
    rng = np.random.default_rng(4)
    X_pos = 0.2 + 0.01 * rng.standard_normal((30, 2))
    X_neg = 0.9 + 0.01 * rng.standard_normal((30, 2))
    X, y = np.vstack([X_pos, X_neg]), np.array([0] * 30 + [1] * 30)
    ctx = build_context(X, y, 0, 2, 5)
    root = with_boundary(build_ball(range(30), ctx.X_pos, 0), ctx)
    L1 = ball_total(root, ctx)
    assert L1 < min(best_two_ball(root, ctx)[0], best_core_boundary(root, ctx)[0]) + 1e-6
    balls, _ = train_class(ctx)
    assert len(balls) == 1


def test_separated_clusters_split():
    rng = np.random.default_rng(5)
    a = [0.1, 0.5] + 0.02 * rng.standard_normal((20, 2))
    b = [0.9, 0.5] + 0.02 * rng.standard_normal((20, 2))
    neg = [0.5, 0.5] + 0.02 * rng.standard_normal((20, 2))
    X, y = np.vstack([a, b, neg]), np.array([0] * 40 + [1] * 20)
    ctx = build_context(X, y, 0, 2, 5)
    root = with_boundary(build_ball(range(40), ctx.X_pos, 0), ctx)
    assert best_two_ball(root, ctx)[0] < ball_total(root, ctx) - 1e-6
    balls, _ = train_class(ctx)
    assert len(balls) >= 2
    for ball in balls:
        m = set(ball.members.tolist())
        assert m <= set(range(20)) or m <= set(range(20, 40))


def test_two_sample_dataset():
    model = fit(dataset([[0.0], [1.0]], np.array([0, 1])))
    assert model.ball_counts() == [1, 1]
    np.testing.assert_array_equal(model.priors, [0.5, 0.5])


def test_nearest_rank_percentile():
    radii = np.round(np.arange(0, 11) / 10, 1)
    positive = radii[radii > 0]
    assert nearest_rank_percentile(positive, 0.05) == 0.1
    vals = np.random.default_rng(0).random(57)
    srt = sorted(vals)
    assert nearest_rank_percentile(vals, 0.05) == srt[math.ceil(0.05 * 57) - 1]


def test_floors():
    X = np.array([[0.0, 0.3], [1.0, 0.3], [0.5, 0.3]])
    model = fit(dataset(X, np.array([0, 1, 0])))
    assert model.eta[1] == DEFAULT_CONSTANTS.eps_v
    assert math.isclose(model.eta[0], 1e-3 * np.var(X[:, 0]), rel_tol=1e-15)
    singles = fit(dataset(np.eye(3), np.array([0, 1, 2])))
    assert singles.r0 == DEFAULT_CONSTANTS.eps_r


def test_estimate_floors_uses_positive_radii():
    model = fit(dataset(*blobs(np.random.default_rng(3), 120, 3, 3)))
    radii = sorted(b.radius for balls in model.classes for b in balls if b.radius > 0)
    r0, _ = estimate_floors(model.classes, np.zeros((1, 3)))
    assert r0 == radii[math.ceil(0.05 * len(radii)) - 1] == model.r0


def test_iris_fold_conservation_and_determinism(iris):
    params = fit_normalizer(iris)
    ds = transform(iris, params)
    model = fit(ds, keep_trace=True)
    assert sum(b.n for balls in model.classes for b in balls) == iris.n
    for balls in model.classes:
        assert math.isclose(math.fsum(b.weight for b in balls), 1.0, abs_tol=1e-12)
    assert dumps(model) == dumps(fit(ds))


def test_trace_descent_and_child_recursion():
    X, y = blobs(np.random.default_rng(12), 300, 4, 3)
    model = fit(dataset(X, y), keep_trace=True)
    seen = {(r.class_id, r.ball_id) for r in model.trace}
    for rec in model.trace:
        if rec.model in ("M2", "M3"):
            assert min(rec.lengths[1:]) < rec.lengths[0] - DEFAULT_CONSTANTS.eps_mdl
            for cid in rec.child_ids:
                assert (rec.class_id, cid) in seen
        elif rec.model == SMALL:
            assert rec.lengths is None
    evaluated = sum(r.model != SMALL for r in model.trace)
    assert evaluated == sum(model.compete_counts)


def test_empty_class_rejected():
    with pytest.raises(ValueError, match="no training samples"):
        fit(LabeledDataset(np.zeros((2, 1)), np.array([0, 0]), ["a", "b"]))
