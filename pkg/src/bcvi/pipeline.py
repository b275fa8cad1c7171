"""End-to-end driver: data -> clusterings over k = 2..K+1 -> index series ->
ratios -> posterior -> ranked report.

Config files are flat ``key = value`` text. Keys are the kebab-case field
names of :class:`PipelineConfig`; ``#`` starts a comment; ``component`` may
repeat, one mixture component per line, written as
``<shape> <weight> <center> <spread>`` with comma-separated vectors, e.g.
``component = gaussian 0.2 0,0 1,1``.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping

import jsonschema
import numpy as np

from . import bayes
from .clustering import ALGORITHMS, RunOptions, best_of_restarts
from .cvi_hard import CviSeries, db_series, str_series, wi_series
from .cvi_soft import FuzzyRepresentativeConfig, kwon2_series, wp_series, xb_series
from .datasets import (
    Dataset,
    MixtureComponent,
    MixtureSpec,
    clustering_accuracy,
    generate_mixture,
    load_csv,
)
from .errors import BcviError, ConfigError, DataError, OutputError

HARD_INDICES = ("db", "str", "wi")
SOFT_INDICES = ("xb", "kwon2", "wp")
INDICES = HARD_INDICES + SOFT_INDICES
SEED_ENV = "BCVI_SEED"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer")


# --- config ---------------------------------------------------------------


def parse_config_text(text: str) -> dict[str, list[str]]:
    """Parse ``key = value`` lines; every key maps to the list of its values."""
    out: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"config line {lineno}: empty key")
        out.setdefault(key.replace("_", "-"), []).append(value)
    return out


def read_config_file(path) -> dict[str, list[str]]:
    try:
        with open(path) as fh:
            return parse_config_text(fh.read())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")


def _floats(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}")


def parse_component(text: str) -> MixtureComponent:
    parts = text.split()
    if len(parts) != 4:
        raise ConfigError(f"component needs '<shape> <weight> <center> <spread>', got {text!r}")
    shape, weight, center, spread = parts
    (w,) = _floats(weight, "component weight")
    return MixtureComponent(w, _floats(center, "component center"), _floats(spread, "component spread"), shape)


def format_component(c: MixtureComponent) -> str:
    vec = lambda v: ",".join(repr(x) for x in v)  # noqa: E731
    return f"{c.shape} {c.weight!r} {vec(c.center)} {vec(c.spread)}"


def mixture_from_mapping(values: Mapping[str, list[str]], seed: int | None = None) -> MixtureSpec:
    comps = [parse_component(v) for v in values.get("component", [])]
    if not comps:
        raise ConfigError("mixture needs at least one 'component' entry")
    if "total-n" not in values:
        raise ConfigError("mixture needs 'total-n'")
    mseed = values.get("mixture-seed", values.get("seed", [None]))[-1]
    mseed = (seed if seed is not None else default_seed()) if mseed is None else mseed
    return MixtureSpec(tuple(comps), _int(values["total-n"][-1], "total-n"), _int(mseed, "mixture-seed"))


def mixture_to_text(spec: MixtureSpec) -> str:
    lines = [f"total-n = {spec.total_n}", f"mixture-seed = {spec.seed}"]
    lines += [f"component = {format_component(c)}" for c in spec.components]
    return "\n".join(lines) + "\n"


def _int(text, what: str) -> int:
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{what}: expected an integer, got {text!r}")


def _float(text, what: str) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{what}: expected a number, got {text!r}")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one pipeline run depends on.

    ``data`` is a CSV path; when it is ``None``, ``mixture`` is sampled
    instead. The prior is a named ``alpha_profile`` (scaled by sqrt(n)) or
    an explicit ``alpha`` list; ``gd`` priors need explicit ``alpha`` and
    ``beta`` over k = 2..K-1.
    """

    data: str | None = None
    mixture: MixtureSpec | None = None
    label_column: str | None = None
    algorithm: str | None = None
    m: float = 2.0
    K: int = 10
    index: str = "wi"
    q: float = 2.0
    t: float = 2.0
    gamma: float | None = None
    prior: str = "dirichlet"
    alpha_profile: str | None = None
    alpha_base: tuple[float, float] = bayes.DEFAULT_BASE_WEIGHTS
    alpha: tuple[float, ...] | None = None
    beta: tuple[float, ...] | None = None
    restarts: int = 20
    seed: int = 0
    max_iterations: int = 200
    tolerance: float = 1e-6
    top_m: int = 3
    workers: int = 1
    require_accuracy: float | None = None
    report: str | None = None
    plot: str | None = None

    def __post_init__(self):
        if self.index not in INDICES:
            raise ConfigError(f"unknown index {self.index!r}; expected one of {INDICES}")
        algo = self.algorithm or ("kmeans" if self.index in HARD_INDICES else "fcm")
        object.__setattr__(self, "algorithm", algo)
        if algo not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")
        if (self.index in HARD_INDICES) != (algo == "kmeans"):
            raise ConfigError(f"index {self.index!r} is incompatible with algorithm {algo!r}")
        if self.K < 3:
            raise ConfigError(f"K must be at least 3, got {self.K}")
        if self.data is None and self.mixture is None:
            raise ConfigError("no data source: give 'data' (CSV path) or mixture components")
        if not self.m > 1:
            raise ConfigError(f"fuzziness m must exceed 1, got {self.m}")
        if self.q < 1 or self.t < 1:
            raise ConfigError("DB orders q and t must be >= 1")
        if self.gamma is not None and not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.prior not in ("dirichlet", "gd"):
            raise ConfigError(f"unknown prior {self.prior!r}; expected 'dirichlet' or 'gd'")
        if self.prior == "gd":
            if self.alpha is None or self.beta is None:
                raise ConfigError("gd prior needs explicit alpha and beta lists")
            if len(self.alpha) != self.K - 2 or len(self.beta) != self.K - 2:
                raise ConfigError(f"gd alpha/beta must cover k=2..{self.K - 1} ({self.K - 2} values)")
            if self.alpha_profile is not None:
                raise ConfigError("alpha-profile applies to dirichlet priors only")
        else:
            if self.alpha is not None and self.alpha_profile is not None:
                raise ConfigError("give either alpha-profile or alpha, not both")
            if self.alpha is not None and len(self.alpha) != self.K - 1:
                raise ConfigError(f"alpha must cover k=2..{self.K} ({self.K - 1} values)")
            if self.beta is not None:
                raise ConfigError("beta applies to gd priors only")
            if self.alpha is None and self.alpha_profile is None:
                object.__setattr__(self, "alpha_profile", "flat")
            if self.alpha_profile is not None and self.alpha_profile not in bayes.PROFILES:
                raise ConfigError(f"unknown alpha-profile {self.alpha_profile!r}; expected one of {bayes.PROFILES}")
        if len(self.alpha_base) != 2:
            raise ConfigError("alpha-base takes two weights: in-range,out-of-range")
        if self.top_m < 1:
            raise ConfigError("top-m must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        RunOptions(self.max_iterations, self.tolerance, self.restarts, self.seed)

    @property
    def run_options(self) -> RunOptions:
        return RunOptions(self.max_iterations, self.tolerance, self.restarts, self.seed)

    @classmethod
    def from_mapping(cls, values: Mapping[str, list[str]]) -> "PipelineConfig":
        """Build a config from parsed ``key = value`` entries (last value wins)."""
        known = {f.name.replace("_", "-"): f for f in dataclasses.fields(cls)}
        mixture_keys = {"component", "total-n", "mixture-seed"}
        unknown = set(values) - set(known) - mixture_keys
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        for key, vals in values.items():
            if key in mixture_keys or key == "mixture":
                continue
            name = known[key].name
            raw = vals[-1]
            if name in ("K", "restarts", "seed", "max_iterations", "top_m", "workers"):
                kw[name] = _int(raw, key)
            elif name in ("m", "q", "t", "gamma", "tolerance", "require_accuracy"):
                kw[name] = _float(raw, key)
            elif name in ("alpha", "beta"):
                kw[name] = _floats(raw, key)
            elif name == "alpha_base":
                kw[name] = _floats(raw, key)
            else:
                kw[name] = raw
        kw.setdefault("seed", default_seed())
        if "data" not in kw and "component" in values:
            kw["mixture"] = mixture_from_mapping(values, kw["seed"])
        return cls(**kw)

    def build_prior(self, n: int):
        K = self.K
        if self.prior == "gd":
            return bayes.GDPrior(self.alpha, self.beta)
        if self.alpha is not None:
            return bayes.DirichletPrior(self.alpha)
        return bayes.profile_alpha(self.alpha_profile, K, n, tuple(self.alpha_base))


# --- report ---------------------------------------------------------------


@dataclass(frozen=True)
class Record:
    k: int
    gi_value: float
    r: float
    posterior_mean: float
    posterior_sd: float
    rank: int
    objective: float | None = None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["objective"] is None:
            del d["objective"]
        return d


@dataclass(frozen=True)
class ReportBundle:
    records: tuple[Record, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        ks = [r.k for r in self.records]
        if ks != list(range(2, len(ks) + 2)):
            raise DataError(f"records must cover k=2..K once in order, got {ks}")
        total = sum(r.posterior_mean for r in self.records)
        if abs(total - 1.0) > 1e-10:
            raise DataError(f"posterior means sum to {total}, expected 1")

    @property
    def K(self) -> int:
        return len(self.records) + 1

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "records": [r.to_dict() for r in self.records]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: Mapping) -> "ReportBundle":
        validate_report(d)
        return cls(tuple(Record(**r) for r in d["records"]), dict(d["metadata"]))

    @classmethod
    def from_json(cls, text: str) -> "ReportBundle":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise DataError(f"report is not valid JSON: {e}")


@lru_cache(maxsize=1)
def report_schema() -> dict:
    return json.loads(resources.files("bcvi").joinpath("report.schema.json").read_text())


def validate_report(d: Mapping) -> None:
    try:
        jsonschema.validate(d, report_schema())
    except jsonschema.ValidationError as e:
        raise DataError(f"report does not match schema: {e.message}")


def write_report(report: ReportBundle, path) -> None:
    validate_report(report.to_dict())
    _write_text(path, report.to_json())


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}")


def plot_rows(report: ReportBundle) -> list[tuple[int, float, float, float]]:
    """(k, mean, lo, hi) with a two-standard-deviation band clamped to [0, 1]."""
    rows = []
    for rec in report.records:
        lo = max(0.0, rec.posterior_mean - 2.0 * rec.posterior_sd)
        hi = min(1.0, rec.posterior_mean + 2.0 * rec.posterior_sd)
        rows.append((rec.k, rec.posterior_mean, lo, hi))
    return rows


def emit_plot_data(report: ReportBundle, path) -> None:
    """Write the error-bar table as CSV with header ``k,mean,lo,hi``."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "mean", "lo", "hi"])
            for k, mean, lo, hi in plot_rows(report):
                w.writerow([k, repr(mean), repr(lo), repr(hi)])
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}")


# --- run -----------------------------------------------------------------


@dataclass
class PipelineResult:
    """In-memory artefacts of a run, alongside the serialisable report."""

    report: ReportBundle
    data: Dataset
    clusterings: dict
    series: CviSeries
    ratios: bayes.RatioVector
    posterior: bayes.BcviResult


def load_data(config: PipelineConfig) -> Dataset:
    if config.data is not None:
        return load_csv(config.data, config.label_column)
    return generate_mixture(config.mixture)


def fit_clusterings(data: Dataset, config: PipelineConfig, ks: Iterable[int]) -> dict:
    """Best-of-restarts fits for each k, keyed by k; errors carry their k."""
    ks = list(ks)
    opts = config.run_options

    def fit(k):
        try:
            return best_of_restarts(config.algorithm, data, k, config.m, opts)
        except BcviError as e:
            raise e.at_k(k)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            fits = list(pool.map(fit, ks))
    else:
        fits = [fit(k) for k in ks]
    return dict(zip(ks, fits))


def index_series(data: Dataset, clusterings: Mapping, config: PipelineConfig) -> CviSeries:
    K = config.K
    if config.index == "db":
        return db_series(data, clusterings, K, config.q, config.t)
    if config.index == "str":
        return str_series(data, {k: clusterings[k] for k in range(2, K + 2)})
    if config.index == "wi":
        return wi_series(data, {k: clusterings[k] for k in range(2, K + 2)})
    if config.index == "xb":
        return xb_series(data, clusterings, K)
    if config.index == "kwon2":
        return kwon2_series(data, clusterings, K)
    cfg = FuzzyRepresentativeConfig(config.gamma if config.gamma is not None else config.m)
    return wp_series(data, {k: clusterings[k] for k in range(2, K + 2)}, cfg)


def _accuracy(data: Dataset, clusterings: dict, config: PipelineConfig):
    L = data.n_classes
    if L is None or L < 2 or L > data.n:
        return None, None
    cl = clusterings.get(L)
    if cl is None:
        cl = fit_clusterings(data, config, [L])[L]
    assign = cl.assignments if config.algorithm == "kmeans" else cl.hard_assignments()
    return clustering_accuracy(data.labels, assign), L


def _floats_list(a) -> list[float]:
    return [float(v) for v in np.asarray(a)]


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Run the full pipeline; deterministic for a fixed config."""
    data = load_data(config)
    K = config.K
    if K + 1 > data.n:
        raise ConfigError(f"K+1={K + 1} exceeds the number of points n={data.n}")
    clusterings = fit_clusterings(data, config, range(2, K + 2))
    series = index_series(data, clusterings, config)
    ratios = bayes.compute_ratios(series, data.n)
    prior = config.build_prior(data.n)
    if isinstance(prior, bayes.GDPrior):
        posterior = bayes.gd_posterior(prior, ratios)
    else:
        posterior = bayes.dirichlet_posterior(prior, ratios)
    accuracy, acc_k = _accuracy(data, clusterings, config)
    if config.require_accuracy is not None and (accuracy is None or accuracy < config.require_accuracy):
        raise DataError(f"clustering accuracy {accuracy} is below the required {config.require_accuracy}")

    top = bayes.bcvi_rank(posterior, min(config.top_m, K - 1))
    rank_of = {k: i + 1 for i, k in enumerate(top.ranking)}
    sd = posterior.sd
    records = tuple(
        Record(int(k), float(series.values[i]), float(ratios.r[i]), float(posterior.mean[i]),
               float(sd[i]), rank_of[int(k)], float(clusterings[int(k)].objective))
        for i, k in enumerate(series.ks)
    )
    if isinstance(prior, bayes.GDPrior):
        prior_meta = {"kind": "gd", "alpha": _floats_list(prior.alpha), "beta": _floats_list(prior.beta),
                      "profile": None, "base": None}
    else:
        profile = config.alpha_profile if config.alpha is None else None
        prior_meta = {"kind": "dirichlet", "alpha": _floats_list(prior.alpha), "beta": None,
                      "profile": profile, "base": list(config.alpha_base) if profile else None}
    post = posterior.posterior_params
    index_params = {}
    if config.index == "db":
        index_params = {"q": config.q, "t": config.t}
    elif config.index == "wp":
        index_params = {"gamma": config.gamma if config.gamma is not None else config.m}
    metadata = {
        "n": data.n,
        "p": data.p,
        "data": data.name,
        "algorithm": config.algorithm,
        "fuzziness": config.m if config.algorithm == "fcm" else None,
        "K": K,
        "index": config.index,
        "direction": series.direction.value,
        "index_case": series.meta.get("case"),
        "index_params": index_params,
        "prior": prior_meta,
        "posterior": {"alpha": _floats_list(post["alpha"]),
                      "beta": _floats_list(post["beta"]) if "beta" in post else None},
        "seed": config.seed,
        "restarts": config.restarts,
        "max_iterations": config.max_iterations,
        "tolerance": config.tolerance,
        "degenerate": {"ratios": ratios.degenerate,
                       "correlation_k": [int(k) for k in series.meta.get("degenerate_k", [])]},
        "accuracy": accuracy,
        "accuracy_k": acc_k,
        "confidence_set": {"members": list(top.members), "mass": top.mass},
    }
    report = ReportBundle(records, metadata)
    validate_report(report.to_dict())
    if config.report:
        write_report(report, config.report)
    if config.plot:
        emit_plot_data(report, config.plot)
    return PipelineResult(report, data, clusterings, series, ratios, posterior)

