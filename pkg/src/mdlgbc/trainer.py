"""Per-class queue-driven ball construction and prediction-floor estimation."""

from __future__ import annotations

import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .ball import build_ball
from .boundary import ClassContext, build_context, with_boundary
from .coding import DEFAULT_CONSTANTS, CodingConstants
from .competition import M1, compete, granularity
from .dataset import RNG_NAME, LabeledDataset, NormalizationParams

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
R0_QUANTILE = 0.05
ETA_SCALE = 1e-3
SMALL = "SMALL"


class InvariantError(RuntimeError):
    """An internal guarantee (conservation, MDL descent, weights) was violated."""


@dataclass(frozen=True)
class StableBall:
    center: np.ndarray
    variances: np.ndarray
    radius: float
    n: int
    avg_boundary_risk: float
    weight: float
    center_neg_dist: float | None = None
    members: np.ndarray | None = field(default=None, compare=False)


@dataclass(frozen=True)
class TraceRecord:
    class_id: int
    ball_id: int
    parent_id: int | None
    n_b: int
    lengths: tuple[float, float, float] | None
    model: str
    child_sizes: tuple[int, int] | None = None
    child_ids: tuple[int, int] | None = None

    def to_dict(self) -> dict:
        def num(x):
            return None if x is None or not math.isfinite(x) else x
        return {
            "class": self.class_id, "ball": self.ball_id, "parent": self.parent_id,
            "n_B": self.n_b,
            "L1": num(self.lengths[0]) if self.lengths else None,
            "L2": num(self.lengths[1]) if self.lengths else None,
            "L3": num(self.lengths[2]) if self.lengths else None,
            "model": self.model,
            "child_sizes": list(self.child_sizes) if self.child_sizes else None,
            "children": list(self.child_ids) if self.child_ids else None,
        }


@dataclass
class TrainedModel:
    normalization: NormalizationParams
    label_names: list[str]
    priors: np.ndarray
    classes: list[list[StableBall]]
    r0: float
    eta: np.ndarray
    constants: CodingConstants = DEFAULT_CONSTANTS
    seed: int = 2035
    format_version: int = FORMAT_VERSION
    unit: str = "nats"
    rng: str = RNG_NAME
    train_seconds: float = 0.0
    trace: list[TraceRecord] = field(default_factory=list, repr=False)
    compete_counts: list[int] = field(default_factory=list, repr=False)

    @property
    def C(self) -> int:
        return len(self.label_names)

    @property
    def d(self) -> int:
        return int(self.eta.shape[0])

    def ball_counts(self) -> list[int]:
        return [len(balls) for balls in self.classes]


def _emit(ball, ctx: ClassContext, n_c: int, constants: CodingConstants) -> StableBall:
    ball = with_boundary(ball, ctx, constants.eps_r)
    return StableBall(ball.center, ball.variances, ball.radius, ball.n, ball.avg_boundary_risk,
                      ball.n / n_c, ball.center_neg_dist, ball.members)


def train_class(ctx: ClassContext, constants: CodingConstants = DEFAULT_CONSTANTS,
                trace: list[TraceRecord] | None = None) -> tuple[list[StableBall], int]:
    """Run the unresolved-ball queue for one class.

    Returns the stable balls in emission order and the number of competitions run.
    """
    n_c = ctx.n_c
    if n_c == 0:
        raise ValueError(f"class {ctx.class_id} has no samples")
    next_id = 1
    queue = deque([(0, None, build_ball(np.arange(n_c), ctx.X_pos, ctx.class_id))])
    stable: list[StableBall] = []
    evaluations = 0
    while queue:
        ball_id, parent_id, ball = queue.popleft()
        if ball.n < 2 * ctx.n_min:
            stable.append(_emit(ball, ctx, n_c, constants))
            if trace is not None:
                trace.append(TraceRecord(ctx.class_id, ball_id, parent_id, ball.n, None, SMALL))
            continue
        ball = with_boundary(ball, ctx, constants.eps_r)
        decision = compete(ball, ctx, constants)
        evaluations += 1
        if decision.model == M1:
            stable.append(_emit(ball, ctx, n_c, constants))
            if trace is not None:
                trace.append(TraceRecord(ctx.class_id, ball_id, parent_id, ball.n,
                                         decision.lengths, M1))
            continue
        L1 = decision.lengths[0]
        chosen = decision.lengths[1 if decision.model == "M2" else 2]
        if not chosen < L1 - constants.eps_mdl:
            raise InvariantError(f"accepted split does not shorten the code: {chosen} vs {L1}")
        first, second = decision.decomposition
        if (min(first.size, second.size) < ctx.n_min
                or first.size + second.size != ball.n):
            raise InvariantError("inadmissible decomposition accepted")
        ids = (next_id, next_id + 1)
        next_id += 2
        for cid, mem in zip(ids, (first, second)):
            queue.append((cid, ball_id, build_ball(mem, ctx.X_pos, ctx.class_id)))
        if trace is not None:
            trace.append(TraceRecord(ctx.class_id, ball_id, parent_id, ball.n, decision.lengths,
                                     decision.model, (first.size, second.size), ids))
    return stable, evaluations


def nearest_rank_percentile(values: np.ndarray, q: float) -> float:
    vals = np.sort(np.asarray(values, dtype=np.float64))
    rank = max(1, math.ceil(q * vals.size))
    return float(vals[rank - 1])


def estimate_floors(all_stable: list[list[StableBall]], X_train: np.ndarray,
                    constants: CodingConstants = DEFAULT_CONSTANTS) -> tuple[float, np.ndarray]:
    radii = np.array([b.radius for balls in all_stable for b in balls], dtype=np.float64)
    positive = radii[radii > 0]
    r0 = nearest_rank_percentile(positive, R0_QUANTILE) if positive.size else constants.eps_r
    eta = np.maximum(ETA_SCALE * X_train.var(axis=0), constants.eps_v)
    return r0, eta


def fit(dataset: LabeledDataset, constants: CodingConstants = DEFAULT_CONSTANTS,
        seed: int = 2035, keep_trace: bool = False) -> TrainedModel:
    """Build the stable-ball representation of every class."""
    start = time.perf_counter()
    X, y, C = dataset.X, dataset.y, dataset.C
    d = X.shape[1]
    trace: list[TraceRecord] = []
    classes: list[list[StableBall]] = []
    counts: list[int] = []
    priors = np.empty(C)
    for c in range(C):
        n_c = int(np.sum(y == c))
        if n_c == 0:
            raise ValueError(f"class {dataset.label_names[c]!r} has no training samples")
        ctx = build_context(X, y, c, C, granularity(n_c, d).n_min)
        priors[c] = ctx.prior
        balls, evaluations = train_class(ctx, constants, trace if keep_trace else None)
        covered = np.sort(np.concatenate([b.members for b in balls]))
        if not np.array_equal(covered, np.arange(n_c)):
            raise InvariantError(f"stable balls of class {c} do not partition its samples")
        log.debug("class %s: %d stable balls, %d competitions", c, len(balls), evaluations)
        classes.append(balls)
        counts.append(evaluations)
    r0, eta = estimate_floors(classes, X, constants)
    params = dataset.params if dataset.params is not None else NormalizationParams(
        np.zeros(d), np.ones(d))
    return TrainedModel(params, list(dataset.label_names), priors, classes, r0, eta, constants,
                        seed, train_seconds=time.perf_counter() - start, trace=trace,
                        compete_counts=counts)
