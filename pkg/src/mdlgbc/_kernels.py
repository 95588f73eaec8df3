"""Compiled inner loops for exact distance scans."""

import math
import os

import numba
import numpy as np
from numba import njit, prange

# skip the TBB probe (and its version warning) unless the user picked a layer
if "NUMBA_THREADING_LAYER" not in os.environ and "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


@njit(cache=True, parallel=True)
def nearest_sq(Q, Z):
    out = np.empty(Q.shape[0])
    d = Q.shape[1]
    for i in prange(Q.shape[0]):
        best = np.inf
        for m in range(Z.shape[0]):
            acc = 0.0
            for j in range(d):
                diff = Q[i, j] - Z[m, j]
                acc += diff * diff
            if acc < best:
                best = acc
        out[i] = best
    return out


@njit(cache=True, parallel=True)
def cut_stats(X, deltas, mu_l, mu_r, ks, eps_r, with_risk):
    """Exact radius, variance and summed boundary risk of X[:k] and X[k:] per cut.

    Variances use the corrected two-pass form about the prefix-sum centers.
    """
    K = ks.shape[0]
    n, d = X.shape
    r_l = np.empty(K)
    r_r = np.empty(K)
    v_l = np.empty((K, d))
    v_r = np.empty((K, d))
    rho_l = np.zeros(K)
    rho_r = np.zeros(K)
    for t in prange(K):
        k = ks[t]
        best_l = 0.0
        best_r = 0.0
        q_l = np.zeros(d)
        q_r = np.zeros(d)
        e_l = np.zeros(d)
        e_r = np.zeros(d)
        for i in range(n):
            acc = 0.0
            if i < k:
                for j in range(d):
                    diff = X[i, j] - mu_l[t, j]
                    e_l[j] += diff
                    q_l[j] += diff * diff
                    acc += diff * diff
                if acc > best_l:
                    best_l = acc
            else:
                for j in range(d):
                    diff = X[i, j] - mu_r[t, j]
                    e_r[j] += diff
                    q_r[j] += diff * diff
                    acc += diff * diff
                if acc > best_r:
                    best_r = acc
        m = n - k
        for j in range(d):
            v_l[t, j] = max((q_l[j] - e_l[j] * e_l[j] / k) / k, 0.0)
            v_r[t, j] = max((q_r[j] - e_r[j] * e_r[j] / m) / m, 0.0)
        rl = math.sqrt(best_l)
        rr = math.sqrt(best_r)
        r_l[t] = rl
        r_r[t] = rr
        if with_risk:
            el = max(rl, eps_r)
            er = max(rr, eps_r)
            sl = 0.0
            sr = 0.0
            for i in range(n):
                if i < k:
                    u = deltas[i] / el
                    sl += 1.0 / (1.0 + u * u)
                else:
                    u = deltas[i] / er
                    sr += 1.0 / (1.0 + u * u)
            rho_l[t] = sl
            rho_r[t] = sr
    return r_l, r_r, v_l, v_r, rho_l, rho_r
