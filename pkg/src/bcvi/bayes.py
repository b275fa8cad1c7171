"""Ratio vectors, Dirichlet / generalized Dirichlet posteriors and the
Bayesian cluster validity index.

Every array here is indexed by cluster count starting at ``k = 2``:
element ``i`` belongs to ``k = i + 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln, poch

from .cvi_hard import CviSeries, Direction
from .errors import BayesError, ConfigError

#: Cluster-count ranges favoured by the named prior profiles.
PROFILE_RANGES = {"small": (2, 4), "moderate": (5, 7), "large": (8, 10)}
PROFILES = ("flat",) + tuple(PROFILE_RANGES)
#: (in-range, out-of-range) base weights, multiplied by sqrt(n).
DEFAULT_BASE_WEIGHTS = (20.0, 1.0)

_LOG_MAX = math.log(np.finfo(float).max)


def _vector(values, name: str) -> np.ndarray:
    a = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise BayesError(f"{name} contains non-finite values")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RatioVector:
    """Nonnegative weights over k = 2..K summing to one, plus the data size."""

    r: np.ndarray
    n: int
    degenerate: bool = False

    def __post_init__(self):
        r = _vector(self.r, "ratio vector")
        if np.any(r < 0) or abs(r.sum() - 1.0) > 1e-12:
            raise BayesError("ratios must be nonnegative and sum to 1")
        if self.n < 0:
            raise BayesError(f"data size must be nonnegative, got {self.n}")
        object.__setattr__(self, "r", r)

    @property
    def K(self) -> int:
        return self.r.size + 1

    @property
    def ks(self) -> np.ndarray:
        return np.arange(2, self.K + 1)


@dataclass(frozen=True)
class DirichletPrior:
    alpha: np.ndarray

    def __post_init__(self):
        a = _vector(self.alpha, "alpha")
        if a.size < 1 or np.any(a <= 0):
            raise BayesError("Dirichlet parameters must be positive")
        object.__setattr__(self, "alpha", a)

    @property
    def K(self) -> int:
        return self.alpha.size + 1


@dataclass(frozen=True)
class GDPrior:
    """Generalized Dirichlet prior; ``alpha`` and ``beta`` cover k = 2..K-1."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = _vector(self.alpha, "alpha")
        b = _vector(self.beta, "beta")
        if a.size != b.size:
            raise BayesError(f"alpha has {a.size} entries, beta has {b.size}")
        if a.size < 2:
            raise BayesError("a generalized Dirichlet prior needs K >= 4")
        if np.any(a <= 0) or np.any(b <= 0):
            raise BayesError("generalized Dirichlet parameters must be positive")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def K(self) -> int:
        return self.alpha.size + 2

    @classmethod
    def from_dirichlet(cls, prior: DirichletPrior) -> "GDPrior":
        """The GD prior equal in law to ``prior``: beta_k is the alpha mass above k."""
        a = prior.alpha
        tail = np.cumsum(a[::-1])[::-1]
        return cls(a[:-1], tail[1:])


@dataclass(frozen=True)
class BcviResult:
    """Posterior summary: BCVI(k) is the posterior mean of p_k."""

    mean: np.ndarray
    variance: np.ndarray
    prior_kind: str
    posterior_params: dict = field(compare=False)
    n: int = 0
    degenerate: bool = False

    def __post_init__(self):
        if self.mean.shape != self.variance.shape or self.mean.size < 2:
            raise BayesError("mean and variance must cover the same k = 2..K, K >= 3")
        if not (np.all(self.mean > 0) and np.all(self.mean < 1)):
            raise BayesError("posterior means must lie strictly between 0 and 1")
        if abs(self.mean.sum() - 1.0) > 1e-10:
            raise BayesError(f"posterior means sum to {self.mean.sum()!r}, expected 1")
        if np.any(self.variance < 0):
            raise BayesError("negative posterior variance")

    @property
    def K(self) -> int:
        return self.mean.size + 1

    @property
    def ks(self) -> np.ndarray:
        return np.arange(2, self.K + 1)

    @property
    def sd(self) -> np.ndarray:
        return np.sqrt(self.variance)

    @property
    def ranking(self) -> np.ndarray:
        """Cluster counts by decreasing posterior mean, ties to the smaller k."""
        return self.ks[np.lexsort((self.ks, -self.mean))]


@dataclass(frozen=True)
class ConfidenceSet:
    ranking: tuple[int, ...]
    members: tuple[int, ...]
    mass: float


def compute_ratios(series: CviSeries, n: int) -> RatioVector:
    """Turn an index series into ratios anchored at its worst value.

    A constant series carries no ranking information and yields uniform
    ratios with ``degenerate=True``.
    """
    gi = np.asarray(series.values, dtype=np.float64)
    if gi.size < 2:
        raise BayesError("ratios need a series over k = 2..K with K >= 3")
    if not np.all(np.isfinite(gi)):
        raise BayesError(f"{series.index_name} series contains non-finite values")
    if series.direction is Direction.A:
        gap = gi - gi.min()
    else:
        gap = gi.max() - gi
    total = gap.sum()
    if not total > 0:
        return RatioVector(np.full(gi.size, 1.0 / gi.size), n, True)
    r = gap / total
    # absorb the last-ulp drift so the sum is exactly representable as 1
    return RatioVector(r / r.sum(), n)


def _check_range(K_prior: int, r: RatioVector) -> None:
    if K_prior != r.K:
        raise BayesError(f"prior covers k=2..{K_prior} but ratios cover k=2..{r.K}")


def dirichlet_posterior(prior: DirichletPrior, r: RatioVector) -> BcviResult:
    """Conjugate update alpha' = alpha + n r with closed-form moments."""
    _check_range(prior.K, r)
    post = prior.alpha + r.n * r.r
    total = post.sum()
    mean = post / total
    var = post * (total - post) / (total ** 2 * (total + 1.0))
    return BcviResult(mean, var, "dirichlet", {"alpha": post}, r.n, r.degenerate)


def gd_posterior_params(prior: GDPrior, r: RatioVector) -> tuple[np.ndarray, np.ndarray]:
    """alpha'_k = alpha_k + n r_k and beta'_k = beta_k + n * sum_{i>k} r_i."""
    _check_range(prior.K, r)
    nr = r.n * r.r
    tail = np.cumsum(nr[::-1])[::-1]
    return prior.alpha + nr[:-1], prior.beta + tail[1:]


def gd_moments(alpha, beta) -> tuple[np.ndarray, np.ndarray]:
    """Means and variances of p_2..p_K under GD(alpha, beta).

    Variances use E[p^2] - E[p]^2, written as mean^2 * expm1(log ratio) so
    small variances do not cancel away.
    """
    a = np.asarray(alpha, dtype=np.float64)
    b = np.asarray(beta, dtype=np.float64)
    s = a + b
    stay = b / s
    lead = np.concatenate(([1.0], np.cumprod(stay)))
    mean = np.concatenate((a / s, [1.0])) * lead

    # log E[p^2]/E[p]^2 per factor
    own = np.log1p(1.0 / a) - np.log1p(1.0 / s)
    pass_through = np.log1p(1.0 / b) - np.log1p(1.0 / s)
    before = np.concatenate(([0.0], np.cumsum(pass_through)))
    log_ratio = np.concatenate((own, [0.0])) + before
    var = mean ** 2 * np.expm1(log_ratio)
    return mean, var


def gd_posterior(prior: GDPrior, r: RatioVector) -> BcviResult:
    a_post, b_post = gd_posterior_params(prior, r)
    mean, var = gd_moments(a_post, b_post)
    return BcviResult(mean, var, "gd", {"alpha": a_post, "beta": b_post}, r.n, r.degenerate)


def _log_rising(x: np.ndarray, s: np.ndarray) -> np.ndarray:
    """log Gamma(x + s) / Gamma(x); direct product when representable."""
    direct = poch(x, s)
    ok = np.isfinite(direct) & (direct > 0)
    fallback = gammaln(x + s) - gammaln(x)
    return np.where(ok, np.log(np.where(ok, direct, 1.0)), fallback)


def gd_moment(alpha, beta, exponents: Sequence[int] | None = None, *, last: int | None = None) -> float:
    """Mixed moment E[p_2^s_2 ... p_{K-1}^s_{K-1}] or, with ``last``, E[p_K^s].

    Each Gamma-function ratio is a rising factorial, accumulated in log
    space so large parameters or orders do not overflow.
    """
    a = np.asarray(alpha, dtype=np.float64)
    b = np.asarray(beta, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise BayesError("alpha and beta must be 1-D arrays of equal length")
    if np.any(a <= 0) or np.any(b <= 0):
        raise BayesError("parameters must be positive")
    if (exponents is None) == (last is None):
        raise BayesError("pass exactly one of exponents or last")
    if last is not None:
        if last < 0:
            raise BayesError("moment order must be nonnegative")
        s = np.zeros(a.size)
        delta = np.full(a.size, float(last))
    else:
        s = np.asarray(exponents, dtype=np.float64)
        if s.shape != a.shape:
            raise BayesError(f"need {a.size} exponents, got {s.size}")
        if np.any(s < 0) or np.any(s != np.round(s)):
            raise BayesError("moment orders must be nonnegative integers")
        delta = np.concatenate((np.cumsum(s[::-1])[::-1][1:], [0.0]))
    log_m = float(np.sum(_log_rising(a, s) + _log_rising(b, delta) - _log_rising(a + b, s + delta)))
    if log_m > _LOG_MAX:
        raise BayesError("moment overflows double precision")
    return math.exp(log_m)


def bcvi_rank(result: BcviResult, top_m: int) -> ConfidenceSet:
    """Ranking plus the ``top_m`` best counts and their total posterior mass."""
    if not 1 <= top_m <= result.K - 1:
        raise BayesError(f"top_m must lie in 1..{result.K - 1}, got {top_m}")
    ranking = result.ranking
    members = ranking[:top_m]
    mass = float(result.mean[members - 2].sum())
    return ConfidenceSet(tuple(int(k) for k in ranking), tuple(int(k) for k in members), mass)


def profile_alpha(profile: str, K: int, n: int,
                  base: tuple[float, float] = DEFAULT_BASE_WEIGHTS) -> DirichletPrior:
    """Dirichlet weights for a named profile, scaled by sqrt(n).

    ``flat`` puts the in-range weight on every k; the other profiles put it
    on their range and the out-of-range weight elsewhere.
    """
    inside, outside = base
    if not (inside > 0 and outside > 0):
        raise ConfigError(f"profile base weights must be positive, got {base}")
    ks = np.arange(2, K + 1)
    if profile == "flat":
        w = np.full(ks.size, inside)
    elif profile in PROFILE_RANGES:
        lo, hi = PROFILE_RANGES[profile]
        mask = (ks >= lo) & (ks <= hi)
        if not mask.any():
            raise ConfigError(f"profile {profile!r} favours k={lo}..{hi}, outside 2..{K}")
        w = np.where(mask, inside, outside)
    else:
        raise ConfigError(f"unknown prior profile {profile!r}; expected one of {PROFILES}")
    return DirichletPrior(w * math.sqrt(n))


def sample_posterior(result: BcviResult, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` vectors (p_2..p_K) from the posterior in ``result``.

    Dirichlet draws normalise independent Gamma variates; GD draws use the
    stick-breaking product of independent Beta variates.
    """
    if result.prior_kind == "dirichlet":
        g = rng.standard_gamma(result.posterior_params["alpha"], size=(size, result.K - 1))
        return g / g.sum(axis=1, keepdims=True)
    a = result.posterior_params["alpha"]
    b = result.posterior_params["beta"]
    z = rng.beta(a, b, size=(size, a.size))
    remaining = np.cumprod(1.0 - z, axis=1)
    before = np.hstack((np.ones((size, 1)), remaining[:, :-1]))
    return np.hstack((z * before, remaining[:, -1:]))


def local_peaks(values, direction: Direction = Direction.A) -> list[int]:
    """Cluster counts whose value beats every existing neighbour.

    ``values[i]`` belongs to ``k = i + 2``; for smaller-is-better series a
    peak is a local minimum.
    """
    v = np.asarray(values, dtype=np.float64)
    if direction is Direction.B:
        v = -v
    if v.size < 2:
        return []
    return [i + 2 for i in range(v.size)
            if (i == 0 or v[i] > v[i - 1]) and (i == v.size - 1 or v[i] > v[i + 1])]
