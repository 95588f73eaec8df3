"""Local model competition between one ball, two balls, and core plus boundary."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ball import GranularBall, canonical_sign, covariance_and_pca
from ._kernels import cut_stats
from .boundary import ClassContext, nearest_distances, overlap, squared_distances
from .coding import (
    DEFAULT_CONSTANTS,
    CodingConstants,
    ball_total,
    class_length,
    data_length,
    intrusion_length,
    margin_length,
    partition_entropy_code,
    selection_code_core_boundary,
    selection_code_two_ball,
)

M1, M2, M3 = "M1", "M2", "M3"

_ZERO_NORM = 1e-12
_DUP_TOL = 1e-9


@dataclass(frozen=True)
class GranularityRule:
    alpha: int
    n_min: int


@dataclass(frozen=True)
class CandidateDecision:
    model: str
    lengths: tuple[float, float, float]
    decomposition: tuple[np.ndarray, np.ndarray] | None


def ceil_sqrt(n: int) -> int:
    return math.isqrt(n - 1) + 1 if n > 0 else 0


def granularity(n_c: int, d: int) -> GranularityRule:
    """Class-adaptive minimum child size."""
    if n_c < 1 or d < 1:
        raise ValueError("granularity needs n_c >= 1 and d >= 1")
    alpha = math.ceil(min(math.sqrt(n_c) / math.log(math.sqrt(d + 2)), d + 2))
    n_min = 1 if n_c <= 3 else min(n_c // 2, max(2, alpha))
    return GranularityRule(alpha, n_min)


def risk_order(ball: GranularBall, ctx: ClassContext) -> np.ndarray:
    """Positions within ``ball.members`` by descending nearest-negative distance."""
    return np.lexsort((ball.members, -ctx.delta_pos[ball.members]))


def _unit(v: np.ndarray | None) -> np.ndarray | None:
    if v is None:
        return None
    norm = float(np.linalg.norm(v))
    if not np.isfinite(norm) or norm <= _ZERO_NORM:
        return None
    return canonical_sign(v / norm)


def candidate_directions(ball: GranularBall, ctx: ClassContext) -> list[np.ndarray]:
    """Principal, negative-evidence, safe-boundary and max-variance directions, in that order."""
    if ball.n < 2:
        raise ValueError("candidate directions need at least two members")
    raw: list[np.ndarray | None] = []
    _, pca = covariance_and_pca(ball, ctx.X_pos)
    raw.append(pca)
    if ctx.has_negatives:
        dist = squared_distances(ball.center[None, :], ctx.X_neg)[0]
        k_b = min(ctx.n_neg, ceil_sqrt(ball.n))
        nearest = np.argsort(dist, kind="stable")[:k_b]
        raw.append(ball.center - ctx.X_neg[nearest].mean(axis=0))
        h = max(1, min(ball.n // 2, ceil_sqrt(ball.n)))
        pts = ctx.X_pos[ball.members[risk_order(ball, ctx)]]
        raw.append(pts[:h].mean(axis=0) - pts[-h:].mean(axis=0))
    e = np.zeros(ball.d)
    e[int(np.argmax(ball.variances))] = 1.0
    raw.append(e)

    kept: list[np.ndarray] = []
    for v in map(_unit, raw):
        if v is None:
            continue
        if any(abs(float(v @ u)) > 1.0 - _DUP_TOL for u in kept):
            continue
        kept.append(v)
    return kept


def prefix_suffix_lengths(ball: GranularBall, order: np.ndarray, ks: np.ndarray,
                          ctx: ClassContext, constants: CodingConstants
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Total ball lengths of the first ``k`` and remaining members for every ``k`` in ``ks``.

    Child centers come from prefix sums (the suffix by subtraction from the
    parent); radii, variances, boundary risks and center distances are exact
    per candidate.
    """
    X = ctx.X_pos[ball.members[order]]
    deltas = ctx.delta_pos[ball.members[order]]
    n = X.shape[0]
    ks = np.asarray(ks, dtype=np.int64)
    s_l = np.cumsum(X, axis=0)[ks - 1]
    s_r = ball.s - s_l
    n_l = ks.astype(np.float64)
    n_r = n - n_l
    mu_l = s_l / n_l[:, None]
    mu_r = s_r / n_r[:, None]

    r_l, r_r, var_l, var_r, rho_l, rho_r = cut_stats(
        np.ascontiguousarray(X), np.ascontiguousarray(deltas), mu_l, mu_r, ks,
        constants.eps_r, ctx.has_negatives)
    rho_l /= n_l
    rho_r /= n_r

    cls = class_length(ctx.prior)
    out = []
    for cnt, mu, var, r, rho in ((n_l, mu_l, var_l, r_l, rho_l), (n_r, mu_r, var_r, r_r, rho_r)):
        r_eff = np.maximum(r, constants.eps_r)
        if ctx.has_negatives:
            omega = overlap(r_eff, nearest_distances(mu, ctx.X_neg))
        else:
            omega = np.zeros(ks.size)
        out.append(data_length(cnt, var, constants.eps_v)
                   + intrusion_length(cnt, rho, constants.eps_num, ctx.has_negatives)
                   + margin_length(cnt, omega) + cls)
    return out[0], out[1]


def _admissible_cuts(n: int, n_min: int) -> np.ndarray:
    return np.arange(n_min, n - n_min + 1, dtype=np.int64)


def best_two_ball(ball: GranularBall, ctx: ClassContext,
                  constants: CodingConstants = DEFAULT_CONSTANTS):
    """Best projection split ``(length, (left, right))``, or ``(inf, None)`` if infeasible."""
    n = ball.n
    if n < 2 * ctx.n_min:
        return math.inf, None
    directions = candidate_directions(ball, ctx)
    if not directions:
        return math.inf, None
    ks = _admissible_cuts(n, ctx.n_min)
    fixed = selection_code_two_ball(n, len(directions)) + partition_entropy_code(n, ks)
    best, best_split = math.inf, None
    for v in directions:
        proj = ctx.X_pos[ball.members] @ v
        order = np.lexsort((ball.members, proj))
        left, right = prefix_suffix_lengths(ball, order, ks, ctx, constants)
        total = fixed + left + right
        i = int(np.argmin(total))
        if total[i] < best:
            best = float(total[i])
            best_split = (ball.members[order[:ks[i]]], ball.members[order[ks[i]:]])
    return best, best_split


def best_core_boundary(ball: GranularBall, ctx: ClassContext,
                       constants: CodingConstants = DEFAULT_CONSTANTS):
    """Best core/boundary split ``(length, (core, boundary))``, or ``(inf, None)``."""
    n = ball.n
    if n < 2 * ctx.n_min or not ctx.has_negatives:
        return math.inf, None
    ks = _admissible_cuts(n, ctx.n_min)  # core sizes
    order = risk_order(ball, ctx)
    core, bd = prefix_suffix_lengths(ball, order, ks, ctx, constants)
    total = partition_entropy_code(n, ks) + selection_code_core_boundary(n) + core + bd
    # smaller boundary wins ties, i.e. the largest core size
    i = total.size - 1 - int(np.argmin(total[::-1]))
    k = ks[i]
    return float(total[i]), (ball.members[order[:k]], ball.members[order[k:]])


def select_model(L1: float, L2: float, L3: float, eps_mdl: float) -> str:
    """Conservative MDL rule: a decomposition must beat the single ball by ``eps_mdl``."""
    lengths = (L1, L2, L3)
    best = min(range(3), key=lambda i: (lengths[i], i))
    if best != 0 and lengths[best] < L1 - eps_mdl:
        return (M1, M2, M3)[best]
    return M1


def compete(ball: GranularBall, ctx: ClassContext,
            constants: CodingConstants = DEFAULT_CONSTANTS) -> CandidateDecision:
    L1 = ball_total(ball, ctx, constants)
    L2, split2 = best_two_ball(ball, ctx, constants)
    L3, split3 = best_core_boundary(ball, ctx, constants)
    model = select_model(L1, L2, L3, constants.eps_mdl)
    decomposition = {M1: None, M2: split2, M3: split3}[model]
    return CandidateDecision(model, (L1, L2, L3), decomposition)
