"""Pearson correlation between all-pairs point distances and all-pairs
representative distances, computed in one pass without pair-length buffers.

The two streams are ``|x_i - x_j|`` and ``|rep_i - rep_j|`` over unordered
pairs ``i < j``. Duplicating every pair (ordered pairs) leaves the
correlation unchanged, so only ``n(n-1)/2`` pairs are visited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .datasets import Dataset
from .errors import DataError

_DEGENERATE_RTOL = 1e-13


@dataclass(frozen=True)
class CorrValue:
    value: float
    pair_count: int
    degenerate: bool = False


@dataclass(frozen=True)
class BaselineValue:
    value: float
    degenerate: bool = False


@njit(cache=True)
def _dist(a, i, j):
    s = 0.0
    for l in range(a.shape[1]):
        t = a[i, l] - a[j, l]
        s += t * t
    return math.sqrt(s)


@njit(cache=True)
def _pair_moments(x, y):
    """Shifted, Kahan-compensated sums of dx, dy, dx^2, dy^2, dx*dy."""
    n = x.shape[0]
    # shift by the mean distance of consecutive rows to curb cancellation
    shift_x = 0.0
    shift_y = 0.0
    for i in range(n - 1):
        shift_x += _dist(x, i, i + 1)
        shift_y += _dist(y, i, i + 1)
    shift_x /= n - 1
    shift_y /= n - 1

    s0 = s1 = s2 = s3 = s4 = 0.0
    c0 = c1 = c2 = c3 = c4 = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = _dist(x, i, j) - shift_x
            dy = _dist(y, i, j) - shift_y

            v = dx - c0
            t = s0 + v
            c0 = (t - s0) - v
            s0 = t

            v = dy - c1
            t = s1 + v
            c1 = (t - s1) - v
            s1 = t

            v = dx * dx - c2
            t = s2 + v
            c2 = (t - s2) - v
            s2 = t

            v = dy * dy - c3
            t = s3 + v
            c3 = (t - s3) - v
            s3 = t

            v = dx * dy - c4
            t = s4 + v
            c4 = (t - s4) - v
            s4 = t
    return s0, s1, s2, s3, s4


def _as_points(data) -> np.ndarray:
    return data.points if isinstance(data, Dataset) else np.atleast_2d(np.asarray(data, dtype=np.float64))


def pair_distance_correlation(data: Dataset | np.ndarray, reps) -> CorrValue:
    """Correlation of pairwise data distances with pairwise representative distances.

    ``reps`` is an ``n x p`` array whose row ``i`` is the representative of
    point ``i`` (its centroid for hard clusterings, its fuzzy representative
    for soft ones). A zero-variance stream yields ``value=0`` with
    ``degenerate=True``.
    """
    x = np.ascontiguousarray(_as_points(data), dtype=np.float64)
    y = np.ascontiguousarray(np.asarray(reps, dtype=np.float64))
    if y.ndim == 1:
        y = y[:, None]
    if x.ndim == 1:
        x = x[:, None]
    if x.shape != y.shape:
        raise DataError(f"representatives have shape {y.shape}, data has {x.shape}")
    n = x.shape[0]
    if n < 3:
        raise DataError(f"pair correlation needs n >= 3, got {n}")
    if not np.all(np.isfinite(y)):
        raise DataError("representatives contain non-finite entries")

    pairs = n * (n - 1) // 2
    sx, sy, sxx, syy, sxy = _pair_moments(x, y)
    vx = sxx - sx * sx / pairs
    vy = syy - sy * sy / pairs
    if vx <= _DEGENERATE_RTOL * sxx or vy <= _DEGENERATE_RTOL * syy:
        return CorrValue(0.0, pairs, True)
    r = (sxy - sx * sy / pairs) / math.sqrt(vx * vy)
    return CorrValue(min(1.0, max(-1.0, r)), pairs)


def baseline_dispersion(data: Dataset | np.ndarray) -> BaselineValue:
    """Sample SD of the distances to the global centroid over their range.

    This is the one-cluster value of the correlation profile.
    """
    x = _as_points(data)
    if x.shape[0] < 2:
        raise DataError("baseline dispersion needs at least two points")
    dv = np.linalg.norm(x - x.mean(axis=0), axis=1)
    spread = float(dv.max() - dv.min())
    if spread <= 4 * np.finfo(float).eps * float(dv.max()):
        return BaselineValue(0.0, True)
    return BaselineValue(float(np.std(dv, ddof=1)) / spread)
