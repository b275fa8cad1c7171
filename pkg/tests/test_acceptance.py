"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed even
when output capture is on), or ``python tests/test_acceptance.py``.
"""

import json
import math
import subprocess
import sys
import time
import tracemalloc
from fractions import Fraction

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from bcvi.bayes import (
    DirichletPrior,
    GDPrior,
    RatioVector,
    compute_ratios,
    dirichlet_posterior,
    gd_moment,
    gd_posterior,
    local_peaks,
    sample_posterior,
)
from bcvi.clustering import HardClustering, RunOptions, SoftClustering, best_of_restarts, fcm_once, kmeans_once
from bcvi.cvi_hard import CviSeries, Direction, correlation_index_from_profile, db_value, wi_series
from bcvi.cvi_soft import FuzzyRepresentativeConfig, kwon2_value, wp_series, xb_value
from bcvi.datasets import Dataset, MixtureComponent, MixtureSpec
from bcvi.paircorr import pair_distance_correlation
from bcvi.pipeline import PipelineConfig, run_pipeline, validate_report

SEED = 20261019


@pytest.fixture
def verdict(capsys):
    """Print one PASS/FAIL line for the criterion, then assert it."""
    def report(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return report


# 1 --------------------------------------------------------------------------------

def _beta_raw_moments(a, b, order=4):
    out, acc = [], 1.0
    for i in range(order):
        acc *= (a + i) / (a + b + i)
        out.append(acc)
    return out


def _se_of_mean_and_variance(raw, draws):
    m1, m2, m3, m4 = raw
    var = m2 - m1 ** 2
    mu4 = m4 - 4 * m3 * m1 + 6 * m2 * m1 ** 2 - 3 * m1 ** 4
    return math.sqrt(var / draws), math.sqrt(max(mu4 - var ** 2, 0.0) / draws)


def test_criterion_01_monte_carlo(verdict):
    rng = np.random.default_rng(SEED)
    draws = 200_000
    worst, checks = 0.0, 0
    t0 = time.perf_counter()
    for kind in ("dirichlet", "gd"):
        for _ in range(20):
            K = int(rng.integers(3 if kind == "dirichlet" else 4, 9))
            n = int(rng.integers(0, 500))
            r = RatioVector(rng.dirichlet(np.ones(K - 1)), n)
            if kind == "dirichlet":
                res = dirichlet_posterior(DirichletPrior(rng.uniform(0.2, 20, K - 1)), r)
                a = res.posterior_params["alpha"]
                raws = [_beta_raw_moments(ak, a.sum() - ak) for ak in a]
            else:
                res = gd_posterior(GDPrior(rng.uniform(0.2, 20, K - 2), rng.uniform(0.2, 20, K - 2)), r)
                a, b = res.posterior_params["alpha"], res.posterior_params["beta"]
                raws = []
                for i in range(K - 1):
                    def moment(j, i=i):
                        if i == K - 2:
                            return gd_moment(a, b, last=j)
                        s = np.zeros(K - 2, int)
                        s[i] = j
                        return gd_moment(a, b, s)
                    raws.append([moment(j) for j in range(1, 5)])
            sample = sample_posterior(res, draws, rng)
            emp_mean = sample.mean(axis=0)
            emp_var = sample.var(axis=0, ddof=1)
            for i, raw in enumerate(raws):
                se_m, se_v = _se_of_mean_and_variance(raw, draws)
                worst = max(worst, abs(emp_mean[i] - res.mean[i]) / se_m,
                            abs(emp_var[i] - res.variance[i]) / se_v)
                checks += 2
    elapsed = time.perf_counter() - t0
    ok = worst <= 3.0 and elapsed < 60.0
    verdict(1, ok, f"{checks} mean/variance checks over 40 configs, max |z| = {worst:.2f} (limit 3), "
                   f"{elapsed:.1f}s (limit 60s)")


# 2 --------------------------------------------------------------------------------

def test_criterion_02_gd_reduces_to_dirichlet(verdict):
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for _ in range(50):
        K = int(rng.integers(4, 9))
        alpha = rng.uniform(0.1, 30, K - 1)
        # beta_k = alpha_{k+1} + beta_{k+1}, beta_{K-1} = alpha_K, written out directly
        beta = np.empty(K - 2)
        beta[-1] = alpha[-1]
        for i in range(K - 4, -1, -1):
            beta[i] = alpha[i + 1] + beta[i + 1]
        r = RatioVector(rng.dirichlet(np.ones(K - 1)), int(rng.integers(0, 10 ** 4)))
        d = dirichlet_posterior(DirichletPrior(alpha), r)
        g = gd_posterior(GDPrior(alpha[:-1], beta), r)
        worst = max(worst, float(np.max(np.abs(g.mean - d.mean))))
    verdict(2, worst <= 1e-12, f"50 chained priors, max |GD mean - Dirichlet mean| = {worst:.2e} (limit 1e-12)")


# 3 --------------------------------------------------------------------------------

def _underlying_ranking(gi, direction):
    key = -gi if direction is Direction.A else gi
    return [int(i) + 2 for i in np.lexsort((np.arange(gi.size), key))]


def test_criterion_03_equal_alpha_ranking(verdict):
    rng = np.random.default_rng(SEED + 3)
    mismatches = 0
    for trial in range(100):
        direction = Direction.A if trial % 2 == 0 else Direction.B
        size = int(rng.integers(2, 15))
        gi = rng.normal(size=size) * 10 ** rng.uniform(-3, 3)
        series = CviSeries("GI", gi, direction)
        r = compute_ratios(series, int(rng.integers(1, 10 ** 5)))
        res = dirichlet_posterior(DirichletPrior(np.full(size, rng.uniform(0.1, 100))), r)
        if list(res.ranking) != _underlying_ranking(gi, direction):
            mismatches += 1
    verdict(3, mismatches == 0, f"100 series (50 per direction), ranking mismatches = {mismatches}")


# 4 --------------------------------------------------------------------------------

def test_criterion_04_local_peaks(verdict):
    rng = np.random.default_rng(SEED + 4)
    planted_total, lost = 0, 0
    for trial in range(100):
        direction = Direction.A if trial % 2 == 0 else Direction.B
        size = int(rng.integers(5, 15))
        gi = rng.uniform(0, 10, size)
        alpha = rng.uniform(0.1, 50, size)
        sign = 1.0 if direction is Direction.A else -1.0
        # peaks at least three apart so their neighbourhoods do not overlap
        candidates = np.arange(1, size - 1)
        peaks = []
        for i in rng.permutation(candidates):
            if all(abs(i - j) >= 3 for j in peaks):
                peaks.append(int(i))
            if len(peaks) == 3:
                break
        for i in peaks:
            neighbours = gi[[i - 1, i + 1]]
            gi[i] = (neighbours.max() + rng.uniform(0.5, 5)) if sign > 0 else (neighbours.min() - rng.uniform(0.5, 5))
            alpha[i - 1:i + 2] = alpha[i]
        res = dirichlet_posterior(DirichletPrior(alpha),
                                  compute_ratios(CviSeries("GI", gi, direction), int(rng.integers(1, 10 ** 4))))
        kept = set(local_peaks(res.mean))
        for i in peaks:
            planted_total += 1
            lost += (i + 2) not in kept
    verdict(4, lost == 0, f"{planted_total} planted peaks in 100 series, lost = {lost}")


# 5 --------------------------------------------------------------------------------

def test_criterion_05_asymptotic_bound(verdict):
    rng = np.random.default_rng(SEED + 5)
    alpha = rng.uniform(0.5, 10, 9)
    a0 = alpha.sum()
    details, ok = [], True
    for n in (10 ** 2, 10 ** 4, 10 ** 6):
        gap = 0.0
        for _ in range(50):
            r = compute_ratios(CviSeries("GI", rng.normal(size=9), Direction.A), n)
            res = dirichlet_posterior(DirichletPrior(alpha), r)
            gap = max(gap, float(np.max(np.abs(res.mean - r.r))))
        bound = a0 / (a0 + n)
        ok &= gap <= bound
        details.append(f"n={n}: {gap:.3e} <= {bound:.3e}")
    verdict(5, ok, "; ".join(details))


# 6 --------------------------------------------------------------------------------

def test_criterion_06_streaming_correlation(verdict):
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(3, 201))
        p = int(rng.integers(1, 6))
        x = rng.normal(size=(n, p)) * rng.uniform(0.1, 50)
        k = int(rng.integers(2, min(n, 8) + 1))
        lab = rng.integers(0, k, n)
        lab[:k] = np.arange(k)
        means = np.array([x[lab == j].mean(0) for j in range(k)])
        reps = means[lab]
        naive = float(np.corrcoef(pdist(x), pdist(reps))[0, 1])
        worst = max(worst, abs(pair_distance_correlation(x, reps).value - naive))
    n = 7225
    x = rng.normal(size=(n, 2))
    reps = np.round(x)
    pair_distance_correlation(x[:5], reps[:5])  # JIT warm-up
    tracemalloc.start()
    t0 = time.perf_counter()
    big = pair_distance_correlation(x, reps)
    elapsed = time.perf_counter() - t0
    peak = tracemalloc.get_traced_memory()[1]
    tracemalloc.stop()
    buffer_bytes = 8 * big.pair_count
    ok = worst <= 1e-10 and elapsed < 5.0 and peak < buffer_bytes // 100
    verdict(6, ok, f"max |stream - naive| = {worst:.2e} (limit 1e-10); n={n} ({big.pair_count} pairs) "
                   f"in {elapsed:.2f}s (limit 5s), peak traced memory {peak / 1e6:.2f} MB "
                   f"vs {buffer_bytes / 1e6:.0f} MB per pair buffer")


# 7 --------------------------------------------------------------------------------

def _db_oracle(groups):
    cents = [sum(g) / len(g) for g in groups]
    scat = [math.sqrt(sum((x - c) ** 2 for x in g) / len(g)) for g, c in zip(groups, cents)]
    k = len(groups)
    return sum(max((scat[i] + scat[j]) / abs(cents[i] - cents[j]) for j in range(k) if j != i)
               for i in range(k)) / k


def _xb_kwon2_oracle(x, assign, m):
    n, k = len(x), max(assign)
    cents = [sum(xi for xi, a in zip(x, assign) if a == j) / assign.count(j) for j in range(1, k + 1)]
    compact = sum((xi - cents[a - 1]) ** 2 for xi, a in zip(x, assign))  # crisp: mu^e = mu
    sep = min((cents[i] - cents[j]) ** 2 for i in range(k) for j in range(k) if i != j)
    xb = compact / (n * sep)
    v0 = sum(x) / n
    to0 = [(c - v0) ** 2 for c in cents]
    w1, w2, w3 = (n - k + 1) / n, (k / (k - 1)) ** math.sqrt(2), n * k / (n - k + 1) ** 2
    kwon2 = w1 * (w2 * compact + sum(to0) / max(to0) + w3) / (sep + 1 / k + 1 / k ** (m - 1))
    return xb, kwon2


def _wi_oracle(nc):
    nc = [Fraction(str(v)) for v in nc]
    inf = float("inf")
    first, second = [], []
    for i in range(1, len(nc) - 1):
        prev, cur, nxt = nc[i - 1], nc[i], nc[i + 1]
        num, den = (cur - prev) * (1 - cur), max(Fraction(0), nxt - cur) * (1 - prev)
        first.append(num / den if den else (inf if num > 0 else -inf if num < 0 else Fraction(0)))
        second.append((cur - prev) / (1 - prev) - (nxt - cur) / (1 - cur))
    finite = [f for f in first if f not in (inf, -inf)]
    lo, hi = min(finite), max(finite)
    assert inf in first  # the profile is a Case-2 profile
    return [float({inf: hi, -inf: lo}.get(f, f) + s) for f, s in zip(first, second)]


def test_criterion_07_hand_derived_values(verdict):
    rows = []
    d2 = Dataset(np.array([[0.0], [2.0], [10.0], [12.0]]))
    db = db_value(d2, HardClustering.from_assignments(d2, [1, 1, 2, 2]))
    rows.append(("DB", db, _db_oracle([[0, 2], [10, 12]]), 0.2))
    soft = SoftClustering.crisp(d2, [1, 1, 2, 2], 2.0)
    xb_o, kw_o = _xb_kwon2_oracle([0.0, 2.0, 10.0, 12.0], [1, 1, 2, 2], 2.0)
    rows.append(("XB", xb_value(d2, soft), xb_o, 0.01))
    rows.append(("KWON2", kwon2_value(d2, soft), kw_o, 0.100615))
    profile = [0.3, 0.9, 0.8, 0.85]
    wi = correlation_index_from_profile(profile).values
    wi_o = _wi_oracle(profile)
    rows.append(("WI(2)", wi[0], wi_o[0], -2.142857))
    rows.append(("WI(3)", wi[1], wi_o[1], -5.25))
    ok = all(abs(v - o) <= 1e-6 and abs(v - h) <= 1e-6 for _, v, o, h in rows)
    verdict(7, ok, ", ".join(f"{name}={v:.6f} (oracle {o:.6f}, hand {h})" for name, v, o, h in rows))


# 8 --------------------------------------------------------------------------------

def test_criterion_08_clustering_sanity(verdict):
    rng = np.random.default_rng(SEED + 8)
    worst_rise = -np.inf
    for _ in range(50):
        n = int(rng.integers(10, 201))
        data = Dataset(rng.normal(size=(n, int(rng.integers(1, 6)))))
        k = int(rng.integers(2, 8))
        for cl in (kmeans_once(data, k, int(rng.integers(2 ** 31))),
                   fcm_once(data, k, float(rng.uniform(1.3, 3.0)), int(rng.integers(2 ** 31)))):
            if len(cl.history) > 1:
                worst_rise = max(worst_rise, float(np.max(np.diff(cl.history))))
    four = Dataset(np.array([[0.0], [2.0], [10.0], [12.0]]))
    km = best_of_restarts("kmeans", four, 2, opts=RunOptions(restarts=20, seed=SEED))
    fcm = best_of_restarts("fcm", four, 2, 2.0, RunOptions(restarts=20, seed=SEED))
    fcm_gap = float(np.max(np.abs(np.sort(fcm.centroids[:, 0]) - [1.0, 11.0])))
    ok = worst_rise <= 1e-12 and abs(km.objective - 4.0) <= 1e-12 and fcm_gap <= 0.1
    verdict(8, ok, f"max objective increase {worst_rise:.2e} (slack 1e-12) over 100 runs; "
                   f"K-means 4-point objective {km.objective}; FCM centroid gap {fcm_gap:.4f} (limit 0.1)")


# 9 --------------------------------------------------------------------------------

SCENARIO_CENTERS = ["0,0", "6,0", "40,0", "46,0", "20,35"]


def scenario_config(**kw):
    comps = tuple(MixtureComponent(0.2, tuple(float(v) for v in c.split(",")), (0.6, 0.6))
                  for c in SCENARIO_CENTERS)
    return PipelineConfig(mixture=MixtureSpec(comps, 500, SEED, "five-blobs"), K=10, index="wi",
                          seed=SEED, **kw)


def test_criterion_09_scenario(verdict):
    t0 = time.perf_counter()
    flat = run_pipeline(scenario_config(alpha_profile="flat")).report
    small = run_pipeline(scenario_config(alpha_profile="small")).report
    elapsed = time.perf_counter() - t0
    wi = [r.gi_value for r in flat.records]
    wi_argmax = int(np.argmax(wi)) + 2
    peaks = local_peaks(wi)
    small_peak = [k for k in peaks if 2 <= k <= 4]
    bcvi_small = int(np.argmax([r.posterior_mean for r in small.records])) + 2
    acc = flat.metadata["accuracy"]
    ok = (acc >= 0.95 and wi_argmax == 5 and bool(small_peak) and bcvi_small in (2, 3, 4)
          and elapsed < 30.0)
    verdict(9, ok, f"accuracy {acc:.3f}; WI argmax {wi_argmax}; WI local peaks {peaks}; "
                   f"small-profile BCVI argmax {bcvi_small}; {elapsed:.1f}s (limit 30s)")


# 10 -------------------------------------------------------------------------------

def test_criterion_10_crisp_collapse(verdict):
    rng = np.random.default_rng(SEED + 10)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(10, 120))
        data = Dataset(rng.normal(size=(n, int(rng.integers(1, 4)))))
        K = int(rng.integers(3, 7))
        hard, soft = {}, {}
        for k in range(2, K + 2):
            a = np.concatenate([np.arange(1, k + 1), rng.integers(1, k + 1, n - k)])
            rng.shuffle(a)
            hard[k] = HardClustering.from_assignments(data, a)
            soft[k] = SoftClustering.crisp(data, a, float(rng.uniform(1.2, 3)))
        cfg = FuzzyRepresentativeConfig(float(rng.uniform(0.3, 5)))
        worst = max(worst, float(np.max(np.abs(wp_series(data, soft, cfg).values - wi_series(data, hard).values))))
    verdict(10, worst <= 1e-12, f"20 instances, max |WP - WI| = {worst:.2e} (limit 1e-12)")


# 11 -------------------------------------------------------------------------------

def test_criterion_11_cli(verdict, tmp_path):
    args = ["--component", "gaussian 0.4 0,0 1,1", "--component", "gaussian 0.6 7,2 1,1",
            "--total-n", "60", "--K", "8", "--restarts", "5", "--seed", "3",
            "--alpha", "0.05,0.05,0.05,0.05,0.05,0.05,0.05"]
    outputs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        subprocess.run([sys.executable, "-m", "bcvi", "run", *args, "--report", str(path)],
                       check=True, capture_output=True)
        outputs.append(path.read_bytes())
    identical = outputs[0] == outputs[1]
    report = json.loads(outputs[0])
    validate_report(report)
    plot = tmp_path / "plot.csv"
    subprocess.run([sys.executable, "-m", "bcvi", "plot", str(tmp_path / "a.json"), "--out", str(plot)],
                   check=True, capture_output=True)
    lines = plot.read_text().splitlines()
    rows_ok = lines[0] == "k,mean,lo,hi" and len(lines) == len(report["records"]) + 1
    clamped = 0
    for line, rec in zip(lines[1:], report["records"]):
        k, mean, lo, hi = line.split(",")
        m, s = rec["posterior_mean"], rec["posterior_sd"]
        rows_ok &= int(k) == rec["k"] and float(mean) == m
        rows_ok &= float(lo) == max(0.0, m - 2 * s) and float(hi) == min(1.0, m + 2 * s)
        clamped += m - 2 * s < 0
    ok = identical and rows_ok and clamped > 0
    verdict(11, ok, f"byte-identical reports: {identical}; plot rows match mean -/+ 2sd: {rows_ok} "
                    f"({clamped} rows clamped at 0)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
