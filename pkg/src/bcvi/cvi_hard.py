"""Hard-clustering validity indices: Davies-Bouldin, Starczewski and the
correlation-based WI index."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np
from scipy.spatial.distance import pdist

from .clustering import HardClustering
from .datasets import Dataset
from .errors import CviError
from .paircorr import baseline_dispersion, pair_distance_correlation

ZERO_TOL = 1e-15


class Direction(Enum):
    """Which extreme of an index marks the preferred cluster count."""

    A = "larger-is-better"
    B = "smaller-is-better"


@dataclass(frozen=True)
class CviSeries:
    """Index values for ``k = 2..K``; ``values[i]`` belongs to ``ks[i]``."""

    index_name: str
    values: np.ndarray
    direction: Direction
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if v.size < 1:
            raise CviError(f"{self.index_name}: empty series")
        if not np.all(np.isfinite(v)):
            bad = [k for k, x in zip(range(2, v.size + 2), v) if not np.isfinite(x)]
            raise CviError(f"{self.index_name}: non-finite values at k={bad}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def K(self) -> int:
        return self.values.size + 1

    @property
    def ks(self) -> np.ndarray:
        return np.arange(2, self.K + 1)

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(v) for k, v in zip(self.ks, self.values)}

    def best(self) -> int:
        i = np.argmax(self.values) if self.direction is Direction.A else np.argmin(self.values)
        return int(self.ks[i])


def _checked(clusterings: Mapping[int, object], ks) -> list:
    missing = [k for k in ks if k not in clusterings]
    if missing:
        raise CviError(f"missing clusterings for k={missing}")
    return [clusterings[k] for k in ks]


def _min_center_distance(centroids: np.ndarray, k: int | None, metric="euclidean", **kw) -> float:
    d = pdist(centroids, metric, **kw)
    if d.size and d.min() == 0.0:
        iu, ju = np.triu_indices(centroids.shape[0], 1)
        flat = int(np.argmin(d))
        raise CviError(f"centroids {iu[flat] + 1} and {ju[flat] + 1} coincide", k=k)
    return float(d.min())


# --- Davies-Bouldin -------------------------------------------------------


def db_value(data: Dataset, clustering: HardClustering, q: float = 2.0, t: float = 2.0) -> float:
    """Davies-Bouldin index with scatter order ``q`` and Minkowski order ``t``."""
    if q < 1 or t < 1:
        raise CviError(f"DB orders must be >= 1, got q={q}, t={t}")
    k = clustering.k
    if k < 2:
        raise CviError("DB needs at least two clusters", k=k)
    x = data.points
    v = clustering.centroids
    lab = clustering.labels0
    counts = np.bincount(lab, minlength=k)
    if np.any(counts == 0):
        raise CviError("DB is undefined with an empty cluster", k=k)
    dist = np.linalg.norm(x - v[lab], axis=1)
    scatter = (np.bincount(lab, weights=dist ** q, minlength=k) / counts) ** (1.0 / q)
    _min_center_distance(v, k, "minkowski", p=t)
    sep = np.sum(np.abs(v[:, None, :] - v[None, :, :]) ** t, axis=2) ** (1.0 / t)
    ratio = (scatter[:, None] + scatter[None, :]) / np.where(sep > 0, sep, np.inf)
    np.fill_diagonal(ratio, -np.inf)
    return float(np.mean(ratio.max(axis=1)))


def db_series(data: Dataset, clusterings: Mapping[int, HardClustering], K: int | None = None,
              q: float = 2.0, t: float = 2.0) -> CviSeries:
    K = max(clusterings) if K is None else K
    vals = []
    for k, cl in zip(range(2, K + 1), _checked(clusterings, range(2, K + 1))):
        try:
            vals.append(db_value(data, cl, q, t))
        except CviError as e:
            raise e.at_k(k)
    return CviSeries("DB", vals, Direction.B, {"q": q, "t": t})


# --- Starczewski ------------------------------------------------------------


def str_from_profile(E, D) -> np.ndarray:
    """STR(k) for k = 2..K from ``E`` over k = 1..K and ``D`` over k = 2..K+1.

    ``E[i]`` is E(i+1) and ``D[i]`` is D(i+2).
    """
    E = np.asarray(E, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    if E.size != D.size or E.size < 2:
        raise CviError(f"need E over 1..K and D over 2..K+1 of equal length, got {E.size} and {D.size}")
    return (E[1:] - E[:-1]) * (D[1:] - D[:-1])


def _str_E(data: Dataset, cl: HardClustering, total: float) -> float:
    within = float(np.sum(np.linalg.norm(data.points - cl.representatives(), axis=1)))
    if within == 0.0:
        raise CviError("every point sits on its centroid; E is unbounded", k=cl.k)
    return total / within


def _str_D(cl: HardClustering) -> float:
    dmin = _min_center_distance(cl.centroids, cl.k)
    return float(pdist(cl.centroids).max()) / dmin


def str_series(data: Dataset, clusterings: Mapping[int, HardClustering]) -> CviSeries:
    """Starczewski index for k = 2..K given clusterings for k = 2..K+1.

    The one-cluster term E(1) is 1 by construction; a k=1 entry in
    ``clusterings`` is not needed.
    """
    K = max(clusterings) - 1
    if K < 2:
        raise CviError("STR needs clusterings up to at least k=3")
    cls = _checked(clusterings, range(2, K + 2))
    total = float(np.sum(np.linalg.norm(data.points - data.centroid(), axis=1)))
    E = [1.0]
    D = []
    for cl in cls:
        if cl.k <= K:
            E.append(_str_E(data, cl, total))
        D.append(_str_D(cl))
    return CviSeries("STR", str_from_profile(E, D), Direction.A, {"E": E, "D": D})


# --- correlation-based indices (shared by WI and WP) -----------------------


def _ratio(num: float, den: float) -> float:
    if abs(den) < ZERO_TOL:
        if abs(num) < ZERO_TOL:
            return 0.0
        return math.copysign(math.inf, num)
    return num / den


def slope_indices(profile) -> tuple[np.ndarray, np.ndarray]:
    """First and second correlation indices for k = 2..K.

    ``profile[i]`` is the correlation at ``k = i + 1`` for k = 1..K+1. The
    first index is a slope ratio that may be infinite when the profile
    stops rising after k; the second is a slope difference.
    """
    nc = np.asarray(profile, dtype=np.float64)
    if nc.size < 3:
        raise CviError("correlation profile must cover k = 1..K+1 with K >= 2")
    first, second = [], []
    for i in range(1, nc.size - 1):
        prev, cur, nxt = nc[i - 1], nc[i], nc[i + 1]
        rise = cur - prev
        first.append(_ratio(rise * (1.0 - cur), max(0.0, nxt - cur) * (1.0 - prev)))
        second.append(_ratio(rise, 1.0 - prev) - _ratio(nxt - cur, 1.0 - cur))
    return np.array(first), np.array(second)


def resolve_infinities(first: np.ndarray, second: np.ndarray) -> tuple[np.ndarray, int]:
    """Replace infinite first-index values; returns (values, case).

    Case 1: no +inf; each -inf becomes the smallest finite value.
    Case 2: some +inf; every entry gets the second index added, with +inf
    and -inf first replaced by the largest and smallest finite values.
    Case 3: no finite value at all; the second index is used alone.
    """
    finite = np.isfinite(first)
    if not finite.any():
        return second.copy(), 3
    lo = first[finite].min()
    hi = first[finite].max()
    if not np.any(first == np.inf):
        return np.where(first == -np.inf, lo, first), 1
    base = np.where(first == np.inf, hi, np.where(first == -np.inf, lo, first))
    return base + second, 2


def correlation_index_from_profile(profile, name: str = "WI", meta: dict | None = None) -> CviSeries:
    """Resolve a correlation profile over k = 1..K+1 into a series over 2..K."""
    first, second = slope_indices(profile)
    values, case = resolve_infinities(first, second)
    if not np.all(np.isfinite(values)):
        bad = [k for k, v in zip(range(2, values.size + 2), values) if not np.isfinite(v)]
        raise CviError(f"{name} undefined at k={bad} (profile reaches 1)")
    info = {"case": case, "profile": [float(v) for v in profile],
            "first": [float(v) for v in first], "second": [float(v) for v in second]}
    if meta:
        info.update(meta)
    return CviSeries(name, values, Direction.A, info)


def correlation_profile(data: Dataset, reps_by_k: Mapping[int, np.ndarray], name: str) -> tuple[np.ndarray, list[int]]:
    """Baseline at k=1 followed by the pair-distance correlation for each k."""
    base = baseline_dispersion(data)
    profile = [base.value]
    degenerate = [1] if base.degenerate else []
    for k in sorted(reps_by_k):
        corr = pair_distance_correlation(data, reps_by_k[k])
        profile.append(corr.value)
        if corr.degenerate:
            degenerate.append(k)
    if all(k in degenerate for k in reps_by_k):
        raise CviError(f"{name} index undefined: correlation is degenerate at every k")
    return np.array(profile), degenerate


def wi_series(data: Dataset, clusterings: Mapping[int, HardClustering]) -> CviSeries:
    """WI index for k = 2..K given hard clusterings for k = 2..K+1."""
    K = max(clusterings) - 1
    if K < 2:
        raise CviError("WI needs clusterings up to at least k=3")
    ks = range(2, K + 2)
    reps = {k: cl.representatives() for k, cl in zip(ks, _checked(clusterings, ks))}
    profile, degenerate = correlation_profile(data, reps, "WI")
    return correlation_index_from_profile(profile, "WI", {"degenerate_k": degenerate})
