"""Lloyd's K-means and fuzzy c-means with best-of-restarts selection."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import softmax

from .datasets import Dataset
from .errors import ClusteringError, ConfigError

ALGORITHMS = ("kmeans", "fcm")


@dataclass(frozen=True)
class RunOptions:
    max_iterations: int = 200
    tolerance: float = 1e-6
    restarts: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1 or self.restarts < 1:
            raise ConfigError("max_iterations and restarts must be positive")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")


def restart_seed(seed: int, index: int) -> int:
    """Seed of restart ``index``, derived from the master seed by counter."""
    state = np.random.SeedSequence(entropy=seed, spawn_key=(index,)).generate_state(2)
    return int(state[0]) << 32 | int(state[1])


def sq_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _init_centers(x: np.ndarray, k: int, init_seed: int) -> np.ndarray:
    rng = np.random.default_rng(init_seed)
    return x[rng.choice(x.shape[0], size=k, replace=False)].copy()


@dataclass(frozen=True)
class HardClustering:
    """A partition into ``k`` nonempty clusters; assignments are 1-based."""

    k: int
    assignments: np.ndarray
    centroids: np.ndarray
    objective: float
    iterations: int = 0
    converged: bool = True
    history: tuple[float, ...] = field(default=(), repr=False, compare=False)

    @classmethod
    def from_assignments(cls, data: Dataset, assignments) -> "HardClustering":
        """Build a clustering whose centroids are the cluster means."""
        a = np.asarray(assignments).reshape(-1)
        if a.size != data.n:
            raise ClusteringError(f"{a.size} assignments for {data.n} points")
        k = int(a.max())
        if a.min() < 1 or np.unique(a).size != k:
            raise ClusteringError("assignments must cover 1..k with no empty cluster")
        centers = _means(data.points, a - 1, k)
        return cls(k, a.astype(np.int64), centers, wcss(data.points, a - 1, centers))

    @property
    def labels0(self) -> np.ndarray:
        return self.assignments - 1

    def representatives(self) -> np.ndarray:
        """Row ``i`` is the centroid of the cluster holding point ``i``."""
        return self.centroids[self.labels0]


@dataclass(frozen=True)
class SoftClustering:
    """A fuzzy partition: row ``i`` of ``membership`` sums to one."""

    c: int
    membership: np.ndarray
    centroids: np.ndarray
    fuzziness: float
    objective: float
    iterations: int = 0
    converged: bool = True
    history: tuple[float, ...] = field(default=(), repr=False, compare=False)

    @property
    def k(self) -> int:
        return self.c

    def hard_assignments(self) -> np.ndarray:
        return np.argmax(self.membership, axis=1) + 1

    @classmethod
    def crisp(cls, data: Dataset, assignments, fuzziness: float = 2.0) -> "SoftClustering":
        """0/1 memberships built from a hard partition, centroids at cluster means."""
        hard = HardClustering.from_assignments(data, assignments)
        mu = np.zeros((data.n, hard.k))
        mu[np.arange(data.n), hard.labels0] = 1.0
        return cls(hard.k, mu, hard.centroids, fuzziness, hard.objective)


def _means(x: np.ndarray, labels0: np.ndarray, k: int) -> np.ndarray:
    sums = np.zeros((k, x.shape[1]))
    np.add.at(sums, labels0, x)
    counts = np.bincount(labels0, minlength=k)
    return sums / counts[:, None]


def wcss(x: np.ndarray, labels0: np.ndarray, centers: np.ndarray) -> float:
    """Within-cluster sum of squared distances."""
    diff = x - centers[labels0]
    return float(np.einsum("ij,ij->", diff, diff))


def _repair_empty(x: np.ndarray, labels0: np.ndarray, centers: np.ndarray, k: int) -> np.ndarray:
    # Move the point farthest from its centroid into each empty cluster;
    # singletons are never robbed so no new empty cluster appears.
    labels0 = labels0.copy()
    for j in range(k):
        counts = np.bincount(labels0, minlength=k)
        if counts[j] > 0:
            continue
        d = np.einsum("ij,ij->i", x - centers[labels0], x - centers[labels0])
        d[counts[labels0] < 2] = -1.0
        labels0[int(np.argmax(d))] = j
    return labels0


def kmeans_once(data: Dataset, k: int, init_seed: int, opts: RunOptions = RunOptions()) -> HardClustering:
    """One Lloyd run from ``k`` distinct data points drawn uniformly."""
    x = data.points
    if not 1 <= k <= data.n:
        raise ClusteringError(f"k must lie in 1..{data.n}, got {k}", k=k)
    centers = _init_centers(x, k, init_seed)
    labels0 = np.argmin(sq_distances(x, centers), axis=1)
    history: list[float] = []
    converged = False
    it = 0
    for it in range(1, opts.max_iterations + 1):
        labels0 = _repair_empty(x, labels0, centers, k)
        new_centers = _means(x, labels0, k)
        history.append(wcss(x, labels0, new_centers))
        shift = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        reassigned = np.argmin(sq_distances(x, centers), axis=1)
        if shift < opts.tolerance and np.array_equal(reassigned, labels0):
            converged = True
            break
        if it < opts.max_iterations:
            labels0 = reassigned
    return HardClustering(k, labels0 + 1, centers, history[-1], it, converged, tuple(history))


def fcm_memberships(x: np.ndarray, centers: np.ndarray, m: float) -> np.ndarray:
    """Closed-form membership update for fixed centroids.

    A point sitting on a centroid gets full membership there (shared
    equally if several centroids coincide with it).
    """
    d2 = sq_distances(x, centers)
    mu = np.empty_like(d2)
    zero = d2 == 0.0
    hit = zero.any(axis=1)
    if hit.any():
        mu[hit] = zero[hit] / zero[hit].sum(axis=1, keepdims=True)
    rest = ~hit
    if rest.any():
        # mu_ij proportional to d_ij^(-2/(m-1)); softmax in log space avoids overflow
        mu[rest] = softmax(-np.log(d2[rest]) / (m - 1.0), axis=1)
    return mu


def fcm_objective(x: np.ndarray, mu: np.ndarray, centers: np.ndarray, m: float) -> float:
    return float(np.sum(mu ** m * sq_distances(x, centers)))


def _fcm_centers(x: np.ndarray, mu: np.ndarray, m: float) -> np.ndarray:
    w = mu ** m
    return (w.T @ x) / w.sum(axis=0)[:, None]


def fcm_once(data: Dataset, c: int, m: float = 2.0, init_seed: int = 0,
             opts: RunOptions = RunOptions()) -> SoftClustering:
    """One fuzzy c-means run from ``c`` distinct data points drawn uniformly.

    The returned membership is recomputed from the returned centroids, so
    the pair is always a consistent half-step of the alternation.
    """
    x = data.points
    if not 2 <= c <= data.n:
        raise ClusteringError(f"c must lie in 2..{data.n}, got {c}", k=c)
    if not m > 1:
        raise ClusteringError(f"fuzziness must exceed 1, got {m}")
    centers = _init_centers(x, c, init_seed)
    history: list[float] = []
    converged = False
    it = 0
    for it in range(1, opts.max_iterations + 1):
        mu = fcm_memberships(x, centers, m)
        new_centers = _fcm_centers(x, mu, m)
        history.append(fcm_objective(x, mu, new_centers, m))
        shift = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        if shift < opts.tolerance:
            converged = True
            break
    mu = fcm_memberships(x, centers, m)
    objective = fcm_objective(x, mu, centers, m)
    history.append(objective)
    return SoftClustering(c, mu, centers, float(m), objective, it, converged, tuple(history))


def best_of_restarts(algorithm: str, data: Dataset, k: int, m: float | None = None,
                     opts: RunOptions = RunOptions(), n_jobs: int = 1):
    """Run ``opts.restarts`` seeded initialisations and keep the lowest objective.

    Restart ``i`` uses ``restart_seed(opts.seed, i)``; ties go to the lowest
    index, so the result does not depend on ``n_jobs`` or scheduling.
    """
    if algorithm == "kmeans":
        def run(i):
            return kmeans_once(data, k, restart_seed(opts.seed, i), opts)
    elif algorithm == "fcm":
        fuzz = 2.0 if m is None else m

        def run(i):
            return fcm_once(data, k, fuzz, restart_seed(opts.seed, i), opts)
    else:
        raise ConfigError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, range(opts.restarts)))
    else:
        results = [run(i) for i in range(opts.restarts)]
    best = min(range(len(results)), key=lambda i: (results[i].objective, i))
    return results[best]
