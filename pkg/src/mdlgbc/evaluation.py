"""Stratified cross-validation, Accuracy / Macro-F1 and report rendering."""

from __future__ import annotations

import json
import math
import os
import statistics
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coding import DEFAULT_CONSTANTS, CodingConstants
from .dataset import RNG_NAME, RawTable, fit_normalizer, normalize, stratified_folds, transform
from .predictor import predict_labels
from .trainer import FORMAT_VERSION, fit

THREADS_ENV = "MDLGBC_THREADS"


def accuracy(y_true: Sequence, y_pred: Sequence) -> float:
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} vs {len(y_pred)}")
    if not y_true:
        raise ValueError("accuracy of an empty sample")
    return sum(t == p for t, p in zip(y_true, y_pred)) / len(y_true)


def macro_f1(y_true: Sequence, y_pred: Sequence, classes: Sequence | None = None) -> float:
    """Unweighted mean F1 over ``classes`` (default: labels seen in either vector); 0/0 -> 0."""
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} vs {len(y_pred)}")
    if classes is None:
        classes = sorted(set(y_true) | set(y_pred), key=str)
    f1s = []
    for c in classes:
        tp = sum(t == c and p == c for t, p in zip(y_true, y_pred))
        fp = sum(t != c and p == c for t, p in zip(y_true, y_pred))
        fn = sum(t == c and p != c for t, p in zip(y_true, y_pred))
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    return sum(f1s) / len(f1s) if f1s else 0.0


def baseline_1nn(X_train: np.ndarray, y_train: Sequence, X_test: np.ndarray) -> list:
    """Label of the Euclidean nearest training row; the lowest index wins ties."""
    if len(X_train) == 0:
        raise ValueError("1-NN needs a nonempty training set")
    out = []
    for x in np.atleast_2d(X_test):
        d2 = np.sum((X_train - x) ** 2, axis=1)
        out.append(y_train[int(np.argmin(d2))])
    return out


@dataclass(frozen=True)
class FoldResult:
    fold: int
    n_train: int
    n_test: int
    accuracy: float
    macro_f1: float
    stable_balls: int
    mins: list[float]
    maxs: list[float]
    r0: float
    train_seconds: float = field(default=0.0, compare=False)
    predict_seconds: float = field(default=0.0, compare=False)


def _mean_std(values: list[float]) -> tuple[float, float]:
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


@dataclass
class EvalReport:
    dataset: str
    k: int
    seed: int
    folds: list[FoldResult]
    constants: CodingConstants = DEFAULT_CONSTANTS
    format_version: int = FORMAT_VERSION
    rng: str = RNG_NAME

    def aggregate(self, metric: str) -> tuple[float, float]:
        return _mean_std([getattr(f, metric) for f in self.folds])

    @property
    def total_seconds(self) -> float:
        return sum(f.train_seconds + f.predict_seconds for f in self.folds)

    def to_dict(self, timings: bool = False) -> dict:
        """Report as plain data; wall-clock fields only when ``timings`` is set."""
        keys = ["fold", "n_train", "n_test", "accuracy", "macro_f1", "stable_balls", "r0"]
        if timings:
            keys += ["train_seconds", "predict_seconds"]
        per_fold = [{key: getattr(f, key) for key in keys} for f in self.folds]
        agg = {}
        for metric in ("accuracy", "macro_f1", "stable_balls") + (
                ("train_seconds", "predict_seconds") if timings else ()):
            mean, std = self.aggregate(metric)
            agg[metric] = {"mean": mean, "std": std}
        return {
            "format_version": self.format_version,
            "dataset": self.dataset,
            "k": self.k,
            "seed": self.seed,
            "rng": self.rng,
            "unit": "nats",
            "constants": self.constants.to_dict(),
            "folds": per_fold,
            "aggregate": agg,
        }

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), indent=2) + "\n"

    def to_text(self) -> str:
        acc, acc_sd = self.aggregate("accuracy")
        f1, f1_sd = self.aggregate("macro_f1")
        balls, _ = self.aggregate("stable_balls")
        lines = [
            f"dataset: {self.dataset}   folds: {self.k}   seed: {self.seed}",
            "",
            f"{'fold':>4}  {'n_test':>6}  {'Acc.':>8}  {'MF1':>8}  {'balls':>6}",
        ]
        for f in self.folds:
            lines.append(f"{f.fold:>4}  {f.n_test:>6}  {f.accuracy:8.4f}  {f.macro_f1:8.4f}"
                         f"  {f.stable_balls:>6}")
        lines += [
            "",
            f"{'Dataset':<16}{'Metric':<8}MDL-GBC",
            f"{self.dataset:<16}{'Acc.':<8}{acc:.4f} ± {acc_sd:.4f}",
            f"{'':<16}{'MF1':<8}{f1:.4f} ± {f1_sd:.4f}",
            f"mean stable balls per fold: {balls:.1f}",
        ]
        return "\n".join(lines) + "\n"

    def timings_text(self) -> str:
        tr, _ = self.aggregate("train_seconds")
        pr, _ = self.aggregate("predict_seconds")
        return (f"mean train {tr:.3f}s, mean predict {pr:.3f}s per fold, "
                f"total {self.total_seconds:.3f}s")


def _run_fold(i: int, table: RawTable, plan, constants: CodingConstants, seed: int) -> FoldResult:
    train_idx, test_idx = plan.train_test(i)
    train, test = table.subset(train_idx), table.subset(test_idx)
    t0 = time.perf_counter()
    params = fit_normalizer(train)
    model = fit(transform(train, params), constants, seed)
    t1 = time.perf_counter()
    pred = predict_labels(normalize(test.rows, params), model)
    t2 = time.perf_counter()
    truth = test.label_values
    return FoldResult(i, train.n, test.n, accuracy(truth, pred), macro_f1(truth, pred),
                      sum(model.ball_counts()), params.mins.tolist(), params.maxs.tolist(),
                      model.r0, t1 - t0, t2 - t1)


def apply_thread_setting() -> None:
    """Honour ``MDLGBC_THREADS`` for the compiled distance kernels."""
    value = os.environ.get(THREADS_ENV)
    if not value:
        return
    import numba

    numba.set_num_threads(max(1, min(int(value), numba.config.NUMBA_NUM_THREADS)))


def cross_validate(table: RawTable, k: int = 10, seed: int = 2035,
                   constants: CodingConstants = DEFAULT_CONSTANTS,
                   name: str = "dataset") -> EvalReport:
    """k-fold stratified CV; normalization and model are refit on every training portion."""
    if not table.has_labels:
        raise ValueError("cross-validation needs a labeled table")
    plan = stratified_folds(table.label_values, k, seed)
    results = [_run_fold(i, table, plan, constants, seed) for i in range(k)]
    return EvalReport(name, k, seed, results, constants)


def check_report(report: dict) -> None:
    """Recompute aggregates from per-fold values and compare them with the stored ones."""
    for metric, stored in report["aggregate"].items():
        vals = [f[metric] for f in report["folds"]]
        mean, std = _mean_std(vals)
        if not (math.isclose(mean, stored["mean"], abs_tol=1e-12)
                and math.isclose(std, stored["std"], abs_tol=1e-12)):
            raise ValueError(f"aggregate for {metric} does not match per-fold values")
