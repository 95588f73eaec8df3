"""Negative boundary evidence: nearest-negative distances, boundary risk, overlap."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import nearest_sq
from .ball import EPS_R, GranularBall

@dataclass(frozen=True)
class ClassContext:
    class_id: int
    X_pos: np.ndarray
    X_neg: np.ndarray
    prior: float
    delta_pos: np.ndarray
    n_min: int

    @property
    def n_c(self) -> int:
        return self.X_pos.shape[0]

    @property
    def n_neg(self) -> int:
        return self.X_neg.shape[0]

    @property
    def has_negatives(self) -> bool:
        return self.X_neg.shape[0] > 0


def class_prior(n_c: int, n: int, C: int) -> float:
    return (n_c + 1) / (n + C)


def squared_distances(Q: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """All squared Euclidean distances, accumulated feature by feature."""
    out = np.zeros((Q.shape[0], Z.shape[0]))
    for j in range(Q.shape[1]):
        diff = Q[:, j, None] - Z[None, :, j]
        out += diff * diff
    return out


def nearest_distances(Q: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Exact exhaustive nearest distance from every row of Q to the rows of Z.

    Returns zeros when Z is empty.
    """
    Q = np.ascontiguousarray(np.atleast_2d(Q), dtype=np.float64)
    if Z.shape[0] == 0:
        return np.zeros(Q.shape[0])
    return np.sqrt(nearest_sq(Q, np.ascontiguousarray(Z, dtype=np.float64)))


def nearest_negative_point(q: np.ndarray, ctx: ClassContext) -> float:
    return float(nearest_distances(np.asarray(q, dtype=np.float64)[None, :], ctx.X_neg)[0])


def build_context(X: np.ndarray, y: np.ndarray, c: int, C: int, n_min: int) -> ClassContext:
    mask = y == c
    X_pos = np.ascontiguousarray(X[mask])
    X_neg = np.ascontiguousarray(X[~mask])
    if X_pos.shape[0] == 0:
        raise ValueError(f"class {c} has no training samples")
    return ClassContext(c, X_pos, X_neg, class_prior(X_pos.shape[0], X.shape[0], C),
                        nearest_distances(X_pos, X_neg), n_min)


def boundary_risk(delta, r_eff):
    u = np.asarray(delta, dtype=np.float64) / r_eff
    out = 1.0 / (1.0 + u * u)
    return float(out) if out.ndim == 0 else out


def average_boundary_risk(ball: GranularBall, ctx: ClassContext, eps_r: float = EPS_R) -> float:
    if not ctx.has_negatives:
        return 0.0
    r_eff = max(ball.radius, eps_r)
    return float(np.mean(boundary_risk(ctx.delta_pos[ball.members], r_eff)))


def overlap(r_eff, center_dist):
    """Normalized overlap ``max(0, r - dist) / r``; 0 when there is no negative evidence."""
    if center_dist is None:
        return 0.0
    out = np.maximum(0.0, r_eff - np.asarray(center_dist, dtype=np.float64)) / r_eff
    return float(out) if out.ndim == 0 else out


def overlap_ratio(ball: GranularBall, ctx: ClassContext, eps_r: float = EPS_R) -> float:
    dist = ball.center_neg_dist if ball.center_neg_dist is not None else center_distance(ball, ctx)
    return overlap(max(ball.radius, eps_r), dist)


def center_distance(ball: GranularBall, ctx: ClassContext) -> float | None:
    if not ctx.has_negatives:
        return None
    return nearest_negative_point(ball.center, ctx)


def with_boundary(ball: GranularBall, ctx: ClassContext, eps_r: float = EPS_R) -> GranularBall:
    """Populate a ball's average boundary risk and center nearest-negative distance."""
    return ball.with_boundary(average_boundary_risk(ball, ctx, eps_r), center_distance(ball, ctx))
