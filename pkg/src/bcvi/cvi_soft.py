"""Soft-clustering validity indices: Xie-Beni, KWON2 and the correlation-based
WP index built on fuzzy representatives."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.spatial.distance import pdist

from .clustering import SoftClustering, sq_distances
from .cvi_hard import (
    CviSeries,
    Direction,
    _checked,
    correlation_index_from_profile,
    correlation_profile,
)
from .datasets import Dataset
from .errors import ConfigError, CviError


@dataclass(frozen=True)
class FuzzyRepresentativeConfig:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")


def _min_sq_separation(clustering: SoftClustering) -> float:
    d2 = pdist(clustering.centroids, "sqeuclidean")
    if d2.min() == 0.0:
        raise CviError("coincident centroids", k=clustering.c)
    return float(d2.min())


def xb_value(data: Dataset, clustering: SoftClustering) -> float:
    """Xie-Beni index: fuzzy compactness over n times the minimum squared separation."""
    if clustering.c < 2:
        raise CviError("XB needs at least two clusters", k=clustering.c)
    sep = _min_sq_separation(clustering)
    compact = float(np.sum(clustering.membership ** 2 * sq_distances(data.points, clustering.centroids)))
    return compact / (data.n * sep)


def kwon2_value(data: Dataset, clustering: SoftClustering) -> float:
    """KWON2 index; the membership exponent is ``2 ** sqrt(m / 2)``."""
    n, k, m = data.n, clustering.c, clustering.fuzziness
    if not 2 <= k < n + 1:
        raise CviError(f"KWON2 needs 2 <= k <= n, got k={k}, n={n}", k=k)
    sep = _min_sq_separation(clustering)
    v = clustering.centroids
    w1 = (n - k + 1) / n
    w2 = (k / (k - 1)) ** math.sqrt(2.0)
    w3 = n * k / (n - k + 1) ** 2
    exponent = 2.0 ** math.sqrt(m / 2.0)
    compact = float(np.sum(clustering.membership ** exponent * sq_distances(data.points, v)))
    to_center = np.sum((v - data.centroid()) ** 2, axis=1)
    numer = w1 * (w2 * compact + to_center.sum() / to_center.max() + w3)
    return float(numer / (sep + 1.0 / k + 1.0 / k ** (m - 1.0)))


def _soft_series(name, fn, data, clusterings, K):
    K = max(clusterings) if K is None else K
    vals = []
    for k, cl in zip(range(2, K + 1), _checked(clusterings, range(2, K + 1))):
        try:
            vals.append(fn(data, cl))
        except CviError as e:
            raise e.at_k(k)
    return CviSeries(name, vals, Direction.B)


def xb_series(data: Dataset, clusterings: Mapping[int, SoftClustering], K: int | None = None) -> CviSeries:
    return _soft_series("XB", xb_value, data, clusterings, K)


def kwon2_series(data: Dataset, clusterings: Mapping[int, SoftClustering], K: int | None = None) -> CviSeries:
    return _soft_series("KWON2", kwon2_value, data, clusterings, K)


def fuzzy_representatives(clustering: SoftClustering, gamma: float) -> np.ndarray:
    """Membership-weighted centroid average per point, weights ``mu ** gamma``.

    Rows are rescaled by their largest membership first, which leaves the
    average unchanged and keeps large ``gamma`` from underflowing.
    """
    mu = clustering.membership
    w = (mu / mu.max(axis=1, keepdims=True)) ** gamma
    return (w @ clustering.centroids) / w.sum(axis=1, keepdims=True)


def wp_series(data: Dataset, clusterings: Mapping[int, SoftClustering],
              cfg: FuzzyRepresentativeConfig | None = None) -> CviSeries:
    """WP index for k = 2..K given soft clusterings for k = 2..K+1.

    Without ``cfg`` the exponent defaults to each clustering's fuzziness.
    """
    K = max(clusterings) - 1
    if K < 2:
        raise CviError("WP needs clusterings up to at least k=3")
    ks = range(2, K + 2)
    reps = {}
    for k, cl in zip(ks, _checked(clusterings, ks)):
        gamma = cl.fuzziness if cfg is None else cfg.gamma
        reps[k] = fuzzy_representatives(cl, gamma)
    profile, degenerate = correlation_profile(data, reps, "WP")
    gamma = None if cfg is None else cfg.gamma
    return correlation_index_from_profile(profile, "WP", {"degenerate_k": degenerate, "gamma": gamma})
