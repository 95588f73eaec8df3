"""Description-length terms, all in nats.

The scalar terms also accept numpy arrays so the split search can cost every
candidate cut in one call.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .ball import EPS_R, EPS_V, GranularBall
from .boundary import ClassContext, overlap

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class CodingConstants:
    eps_r: float = EPS_R
    eps_v: float = EPS_V
    eps_num: float = 1e-12
    eps_mdl: float = 1e-6

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value}")

    def to_dict(self) -> dict:
        return {"eps_r": self.eps_r, "eps_v": self.eps_v,
                "eps_num": self.eps_num, "eps_mdl": self.eps_mdl}


DEFAULT_CONSTANTS = CodingConstants()


@dataclass(frozen=True)
class BallCost:
    L_data: float
    L_intr: float
    L_mar: float
    L_cls: float

    @property
    def L_total(self) -> float:
        return self.L_data + self.L_intr + self.L_mar + self.L_cls


def data_length(n, variances, eps_v: float = EPS_V):
    """Diagonal-Gaussian ML code plus the ``d ln max(n, 2)`` parameter cost.

    ``variances`` may be a (d,) vector or a (K, d) stack with ``n`` of length K.
    """
    v = np.maximum(variances, eps_v)
    d = v.shape[-1]
    n = np.asarray(n, dtype=np.float64)
    out = 0.5 * n * np.sum(1.0 + LOG_2PI + np.log(v), axis=-1) + d * np.log(np.maximum(n, 2.0))
    return float(out) if out.ndim == 0 else out


def intrusion_length(n, rho_bar, eps_num: float, has_negatives: bool = True):
    if not has_negatives:
        return 0.0 if np.ndim(n) == 0 else np.zeros(np.shape(n))
    out = np.asarray(n, dtype=np.float64) * -np.log(np.maximum(1.0 - np.asarray(rho_bar), eps_num))
    return float(out) if out.ndim == 0 else out


def margin_length(n, omega):
    out = np.asarray(n, dtype=np.float64) * np.log1p(omega)
    return float(out) if out.ndim == 0 else out


def class_length(prior: float) -> float:
    return float(-np.log(prior))


def ball_cost(ball: GranularBall, ctx: ClassContext,
              constants: CodingConstants = DEFAULT_CONSTANTS) -> BallCost:
    if ball.avg_boundary_risk is None:
        raise ValueError("ball boundary quantities are not populated")
    r_eff = max(ball.radius, constants.eps_r)
    return BallCost(
        data_length(ball.n, ball.variances, constants.eps_v),
        intrusion_length(ball.n, ball.avg_boundary_risk, constants.eps_num, ctx.has_negatives),
        margin_length(ball.n, overlap(r_eff, ball.center_neg_dist)),
        class_length(ctx.prior),
    )


def ball_total(ball: GranularBall, ctx: ClassContext,
               constants: CodingConstants = DEFAULT_CONSTANTS) -> float:
    return ball_cost(ball, ctx, constants).L_total


def partition_entropy_code(n_total, n_left):
    """``n H(k/n)``: the Stirling form of ``ln C(n, k)`` without its O(ln n) remainder."""
    n_total = np.asarray(n_total, dtype=np.float64)
    n_left = np.asarray(n_left, dtype=np.float64)
    if np.any(n_left < 1) or np.any(n_left > n_total - 1):
        raise ValueError("partition sizes must satisfy 1 <= n_left <= n_total - 1")
    n_right = n_total - n_left
    out = n_total * np.log(n_total) - n_left * np.log(n_left) - n_right * np.log(n_right)
    return float(out) if out.ndim == 0 else out


def selection_code_two_ball(n_b: int, n_directions: int) -> float:
    return float(np.log(max(n_b, 2)) + np.log(max(n_directions, 1)))


def selection_code_core_boundary(n_b: int) -> float:
    return float(np.log(max(n_b, 2)))
