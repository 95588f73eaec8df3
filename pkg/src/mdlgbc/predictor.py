"""Class-level mixture coding cost and argmin prediction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coding import LOG_2PI
from .dataset import DataError
from .trainer import StableBall, TrainedModel


@dataclass(frozen=True)
class BallEnergy:
    ball_id: int
    gaussian: float
    boundary: float
    outside: float
    weight: float

    @property
    def total(self) -> float:
        return self.gaussian + self.boundary + self.outside


@dataclass(frozen=True)
class PredictionExplanation:
    scores: np.ndarray
    winner: int
    energies: list[list[BallEnergy]]


def predictive_effective(ball: StableBall, r0: float, eta: np.ndarray, eps_r: float,
                         eps_v: float) -> tuple[float, np.ndarray]:
    r = max(ball.radius, r0, eps_r)
    d = ball.variances.shape[0]
    v = np.maximum(np.maximum(ball.variances, eta), max(r * r / d, eps_v))
    return r, v


class _ClassTable:
    """Stacked per-ball arrays of one class for vectorized scoring."""

    def __init__(self, balls: list[StableBall], model: TrainedModel):
        k = model.constants
        eff = [predictive_effective(b, model.r0, model.eta, k.eps_r, k.eps_v) for b in balls]
        self.centers = np.stack([b.center for b in balls])
        self.r_pred = np.array([r for r, _ in eff])
        self.v_pred = np.stack([v for _, v in eff])
        self.log_norm = 0.5 * np.sum(LOG_2PI + np.log(self.v_pred), axis=1)
        rho = np.array([b.avg_boundary_risk for b in balls])
        self.e_boundary = -np.log(np.maximum(1.0 - rho, k.eps_num))
        self.log_w = np.log(np.array([b.weight for b in balls]))

    def energies(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n, m = X.shape[0], self.centers.shape[0]
        quad = np.zeros((n, m))
        sq = np.zeros((n, m))
        for j in range(X.shape[1]):
            diff = X[:, j, None] - self.centers[None, :, j]
            diff2 = diff * diff
            quad += diff2 / self.v_pred[None, :, j]
            sq += diff2
        e_g = 0.5 * quad + self.log_norm
        e_o = np.log1p(np.maximum(0.0, np.sqrt(sq) - self.r_pred) / self.r_pred)
        return e_g, np.broadcast_to(self.e_boundary, (n, m)), e_o


def _tables(model: TrainedModel) -> list[_ClassTable]:
    cached = getattr(model, "_score_tables", None)
    if cached is None:
        cached = [_ClassTable(balls, model) for balls in model.classes]
        model._score_tables = cached
    return cached


def mixture_cost(log_prior: float, log_w: np.ndarray, energies: np.ndarray) -> np.ndarray:
    """``-ln pi - ln sum_k w_k exp(-E_k)`` with the minimum energy factored out."""
    e_min = energies.min(axis=-1, keepdims=True)
    s = np.sum(np.exp(log_w - (energies - e_min)), axis=-1)
    return -log_prior + e_min[..., 0] - np.log(s)


def scores(X: np.ndarray, model: TrainedModel) -> np.ndarray:
    """Class coding costs, shape (n, C), for already-normalized rows."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.d:
        raise DataError(f"dimension mismatch: expected d={model.d}, got d={X.shape[1]}")
    out = np.empty((X.shape[0], model.C))
    for c, table in enumerate(_tables(model)):
        e_g, e_b, e_o = table.energies(X)
        out[:, c] = mixture_cost(np.log(model.priors[c]), table.log_w, e_g + e_b + e_o)
    return out


def class_score(x: np.ndarray, model: TrainedModel, c: int) -> float:
    return float(scores(np.asarray(x)[None, :], model)[0, c])


def predict_indices(X: np.ndarray, model: TrainedModel) -> np.ndarray:
    # np.argmin returns the first minimum: lowest class index wins ties
    return np.argmin(scores(X, model), axis=1)


def predict_labels(X: np.ndarray, model: TrainedModel) -> list[str]:
    return [model.label_names[i] for i in predict_indices(X, model)]


def explain(x: np.ndarray, model: TrainedModel) -> PredictionExplanation:
    x = np.asarray(x, dtype=np.float64)[None, :]
    sc = scores(x, model)[0]
    energies = []
    for balls, table in zip(model.classes, _tables(model)):
        e_g, e_b, e_o = table.energies(x)
        energies.append([BallEnergy(k, float(e_g[0, k]), float(e_b[0, k]), float(e_o[0, k]),
                                    balls[k].weight) for k in range(len(balls))])
    return PredictionExplanation(sc, int(np.argmin(sc)), energies)


def predict(x: np.ndarray, model: TrainedModel) -> tuple[str, PredictionExplanation]:
    ex = explain(x, model)
    return model.label_names[ex.winner], ex
