"""Granular-ball statistics: sufficient sums, spread, effective floors, principal direction."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

EPS_R = 1e-10
EPS_V = 1e-10

PCA_MAX_ITER = 100
PCA_TOL = 1e-9
_TRACE_ZERO = 1e-18
# relative size below which a vector component or product counts as zero
_REL_ZERO = 1e-12


@dataclass(frozen=True)
class GranularBall:
    members: np.ndarray  # row indices into the class-positive matrix
    class_id: int
    center: np.ndarray
    variances: np.ndarray
    radius: float
    s: np.ndarray
    a: np.ndarray
    avg_boundary_risk: float | None = None
    center_neg_dist: float | None = None

    @property
    def n(self) -> int:
        return int(self.members.shape[0])

    @property
    def d(self) -> int:
        return int(self.center.shape[0])

    def with_boundary(self, rho_bar: float, center_dist: float | None) -> "GranularBall":
        return replace(self, avg_boundary_risk=float(rho_bar), center_neg_dist=center_dist)


@dataclass(frozen=True)
class EffectiveQuantities:
    radius: float
    variances: np.ndarray


def spread(points: np.ndarray, center: np.ndarray) -> tuple[np.ndarray, float]:
    """Variance and radius about ``center`` in one pass over the members.

    The variance is the corrected two-pass form of ``a/n - mu^2``; it avoids the
    cancellation the raw sums suffer when a ball is tight relative to its offset.
    """
    diff = points - center
    n = points.shape[0]
    var = np.maximum((np.sum(diff * diff, axis=0) - np.sum(diff, axis=0) ** 2 / n) / n, 0.0)
    return var, float(np.sqrt(np.max(np.sum(diff * diff, axis=1))))


def build_ball(members, X_pos: np.ndarray, class_id: int) -> GranularBall:
    members = np.asarray(members, dtype=np.int64)
    if members.size == 0:
        raise ValueError("cannot build a ball from an empty member list")
    pts = X_pos[members]
    s = pts.sum(axis=0)
    a = (pts * pts).sum(axis=0)
    mu = s / members.size
    var, r = spread(pts, mu)
    return GranularBall(members, class_id, mu, var, r, s, a)


def effective(ball: GranularBall, eps_r: float = EPS_R, eps_v: float = EPS_V) -> EffectiveQuantities:
    return EffectiveQuantities(max(ball.radius, eps_r), np.maximum(ball.variances, eps_v))


def split_stats(parent: GranularBall, left_members, X_pos: np.ndarray
                ) -> tuple[GranularBall, GranularBall]:
    """Split ``parent`` into (left, rest); the right sums come from subtraction."""
    left_members = np.asarray(left_members, dtype=np.int64)
    in_left = np.isin(parent.members, left_members)
    if (left_members.size == 0 or in_left.sum() != np.unique(left_members).size
            or in_left.all()):
        raise ValueError("left members must be a proper nonempty subset of the parent")
    right_members = parent.members[~in_left]
    lp = X_pos[left_members]
    s_l = lp.sum(axis=0)
    a_l = (lp * lp).sum(axis=0)
    s_r = parent.s - s_l
    a_r = parent.a - a_l
    out = []
    for mem, s, a in ((left_members, s_l, a_l), (right_members, s_r, a_r)):
        mu = s / mem.size
        var, r = spread(X_pos[mem], mu)
        out.append(GranularBall(mem, parent.class_id, mu, var, r, s, a))
    return out[0], out[1]


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its first non-negligible component is positive."""
    scale = np.max(np.abs(v))
    if scale == 0:
        return v
    nz = np.flatnonzero(np.abs(v) > _REL_ZERO * scale)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def covariance(ball: GranularBall, X_pos: np.ndarray) -> np.ndarray:
    if ball.n < 2:
        raise ValueError("covariance needs at least two members")
    diff = X_pos[ball.members] - ball.center
    return diff.T @ diff / ball.n


def power_iteration(cov: np.ndarray) -> np.ndarray | None:
    """Dominant eigenvector of a PSD matrix, started from the all-ones vector."""
    tr = float(np.trace(cov))
    if tr < _TRACE_ZERO:
        return None
    d = cov.shape[0]
    v = np.full(d, 1.0 / np.sqrt(d))
    for _ in range(PCA_MAX_ITER):
        w = cov @ v
        norm = float(np.linalg.norm(w))
        if not np.isfinite(norm) or norm <= _REL_ZERO * tr:
            return None
        w = w / norm
        done = np.linalg.norm(w - v) < PCA_TOL
        v = w
        if done:
            break
    return canonical_sign(v)


def covariance_and_pca(ball: GranularBall, X_pos: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    cov = covariance(ball, X_pos)
    return cov, power_iteration(cov)
