"""Replica orchestration: estimators with standard errors, stationarity
tests, deviation profiles, and the word/cloud comparison report.

Every operation draws one independent stream per replica, keyed by
(seed, op_tag << 32 | replica), and aggregates in replica order, so the
result is bit-identical whatever the parallelism.  Statistical assertions
downstream use a 4-sigma policy; everything here only reports.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats as _st

from .bounds import BoundaryRates, _check_variant, augmented_tail_rate, mean_bound, predicted_mean
from .hammersley import run_process
from .sampling import make_rng, sample_poisson_cloud, sample_uniform_multiset_permutation
from .subsequences import lis_strict, lnds_weak

# Disjoint stream-id blocks per operation; replica r of op with tag g uses
# stream_id (g << 32) | r.
_TAG_WORD = 1
_TAG_POISSON = 2
_TAG_STATIONARY = 3
_TAG_DEVIATION = 4


def _stream(tag: int, rep: int) -> int:
    return (tag << 32) | rep


@dataclass(frozen=True)
class EstimateReport:
    """Monte Carlo mean with its standard error and provenance."""

    mean: float
    stderr: float
    reps: int
    seed: int
    params: dict
    predicted: float | None = None
    rel_error: float | None = None

    @staticmethod
    def from_values(values: np.ndarray, seed: int, params: dict,
                    predicted: float | None = None) -> "EstimateReport":
        values = np.asarray(values, dtype=float)
        reps = values.size
        mean = float(values.mean())
        stderr = float(values.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
        rel = None
        if predicted is not None and predicted != 0:
            rel = abs(mean - predicted) / abs(predicted)
        return EstimateReport(mean, stderr, reps, seed, dict(params), predicted, rel)

    def to_json_dict(self, command: str | None = None) -> dict:
        return {
            "command": command,
            "params": self.params,
            "seed": self.seed,
            "mean": self.mean,
            "stderr": self.stderr,
            "reps": self.reps,
            "predicted": self.predicted,
            "rel_error": self.rel_error,
        }

    def to_json(self, command: str | None = None) -> str:
        return json.dumps(self.to_json_dict(command), indent=2)


def _parallel_map(fn, argses: list, jobs: int) -> list:
    if jobs <= 1 or len(argses) < 2:
        return [fn(a) for a in argses]
    chunk = max(1, len(argses) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, argses, chunksize=chunk))


# --- replica workers (top level so process pools can pickle them) ---------

def _word_replica(args) -> float:
    seed, rep, n, k, order = args
    rng = make_rng(seed, _stream(_TAG_WORD, rep))
    word = sample_uniform_multiset_permutation(n, k, rng)
    return float(lis_strict(word) if order == "strict" else lnds_weak(word))


def _poisson_replica(args) -> float:
    seed, rep, x, t, lam, order = args
    rng = make_rng(seed, _stream(_TAG_POISSON, rep))
    cloud = sample_poisson_cloud(x, t, lam, rng)
    return float(lis_strict(cloud) if order == "strict" else lnds_weak(cloud))


def _stationary_replica(args) -> int:
    seed, rep, x, t, lam, variant, source_rate = args
    rng = make_rng(seed, _stream(_TAG_STATIONARY, rep))
    if variant == "strict":
        rates = BoundaryRates.strict_from_alpha(lam, source_rate)
    else:
        rates = BoundaryRates.weak_from_beta(lam, source_rate)
    if t == 0:
        from .sampling import sample_boundary
        return int(sample_boundary(x, 1, rates, rng).sources.size)
    run = run_process(x, t, lam, variant, rates, rng)
    return run.state.count


def _augmented_replica(args) -> float:
    seed, rep, x, t, lam, order = args
    rng = make_rng(seed, _stream(_TAG_DEVIATION, rep))
    from .bounds import optimal_rates_strict, optimal_rates_weak
    rates, _ = (optimal_rates_strict if order == "strict" else optimal_rates_weak)(x, t, lam)
    run = run_process(x, t, lam, order, rates, rng)
    return float(run.state.count + run.boundary.total_sinks)


# --- estimators ------------------------------------------------------------

def estimate_mean_subsequence(n: int, k: int, order: str, reps: int, seed: int,
                              parallelism: int = 1) -> EstimateReport:
    """Mean chain length of uniform multiset words against 2*sqrt(nk) -/+ k."""
    _check_variant(order)
    if reps < 2:
        raise ValueError("reps must be >= 2")
    argses = [(seed, r, n, k, order) for r in range(reps)]
    vals = np.asarray(_parallel_map(_word_replica, argses, parallelism))
    return EstimateReport.from_values(
        vals, seed, {"n": n, "k": k, "order": order},
        predicted=predicted_mean(n, k, order))


def estimate_poissonized(x: float, t: int, lam: float, order: str, reps: int,
                         seed: int, parallelism: int = 1) -> EstimateReport:
    """Mean chain length of Poisson clouds; ``predicted`` is the first-order
    value 2*sqrt(x*t*lam) -/+ x*lam, an upper bound for the mean."""
    _check_variant(order)
    if reps < 2:
        raise ValueError("reps must be >= 2")
    if order == "strict" and t < x * lam:
        raise ValueError("strict comparison requires t >= x*lam")
    argses = [(seed, r, x, t, lam, order) for r in range(reps)]
    vals = np.asarray(_parallel_map(_poisson_replica, argses, parallelism))
    mb = mean_bound(x, t, lam)
    predicted = mb.strict_mean if order == "strict" else mb.weak_mean
    return EstimateReport.from_values(
        vals, seed, {"x": x, "t": t, "lam": lam, "order": order}, predicted=predicted)


@dataclass(frozen=True, eq=False)
class StationarityReport:
    """Particle-count sample versus the exact stationary Poisson law."""

    variant: str
    x: float
    t: int
    lam: float
    source_rate: float
    reps: int
    seed: int
    target_mean: float
    mean: float
    variance: float
    z_mean: float
    z_var: float
    chi2_stat: float
    chi2_dof: int
    p_value: float
    counts: np.ndarray


def _poisson_chi_square(sample: np.ndarray, mu: float) -> tuple[float, int, float]:
    """Chi-square GOF against Poisson(mu), merging bins to expected >= 5."""
    reps = sample.size
    hi = int(max(sample.max(), mu + 8 * math.sqrt(mu))) + 1
    pmf = _st.poisson.pmf(np.arange(hi + 1), mu)
    pmf = np.append(pmf, max(0.0, 1.0 - pmf.sum()))
    obs = np.bincount(sample, minlength=pmf.size).astype(float)[: pmf.size]
    exp = reps * pmf
    # merge adjacent bins until every expected count reaches 5
    m_obs, m_exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            m_obs.append(acc_o)
            m_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if m_exp:
        m_obs[-1] += acc_o
        m_exp[-1] += acc_e
    else:
        m_obs, m_exp = [acc_o], [acc_e]
    m_obs = np.asarray(m_obs)
    m_exp = np.asarray(m_exp)
    stat = float(((m_obs - m_exp) ** 2 / m_exp).sum())
    dof = max(1, m_obs.size - 1)
    return stat, dof, float(_st.chi2.sf(stat, dof))


def stationarity_test(x: float, lam: float, source_rate: float, variant: str,
                      t: int, reps: int, seed: int,
                      parallelism: int = 1) -> StationarityReport:
    """Run the boundary process to time t over replicas and compare the
    final particle count with its exact stationary law Poisson(x * rate)."""
    _check_variant(variant)
    if reps < 2:
        raise ValueError("reps must be >= 2")
    argses = [(seed, r, x, t, lam, variant, source_rate) for r in range(reps)]
    sample = np.asarray(_parallel_map(_stationary_replica, argses, parallelism),
                        dtype=np.int64)
    mu = x * source_rate
    mean = float(sample.mean())
    var = float(sample.var(ddof=1))
    z_mean = (mean - mu) / math.sqrt(mu / reps)
    # Var(S^2) for a Poisson sample: (mu + 2 mu^2) / reps to first order
    z_var = (var - mu) / math.sqrt((mu + 2 * mu * mu) / reps)
    stat, dof, p = _poisson_chi_square(sample, mu)
    return StationarityReport(variant, x, t, lam, source_rate, reps, seed,
                              mu, mean, var, z_mean, z_var, stat, dof, p, sample)


@dataclass(frozen=True, eq=False)
class DeviationProfile:
    """Empirical exceedance frequencies around the first-order center.

    ``bound_upper`` carries the explicit boundary-process bound
    2*exp(-(eps^2/12) * (sqrt(x*t*lam) - x*lam)); it is a certified bound
    only for the boundary-augmented statistic in the strict order, and NaN
    for the weak order where no explicit rate is available.
    """

    x: float
    t: int
    lam: float
    order: str
    augmented: bool
    center: float
    eps_grid: tuple[float, ...]
    upper_freq: tuple[float, ...]
    lower_freq: tuple[float, ...]
    bound_upper: tuple[float, ...]
    reps: int
    seed: int

    def rows(self) -> list[list]:
        return [
            [e, uf, lf, b]
            for e, uf, lf, b in zip(self.eps_grid, self.upper_freq,
                                    self.lower_freq, self.bound_upper)
        ]


def deviation_profile(x: float, t: int, lam: float, order: str, eps_grid,
                      reps: int, seed: int, parallelism: int = 1,
                      augmented: bool = False) -> DeviationProfile:
    """Exceedance frequencies of the chain length (or, with ``augmented``,
    of the boundary-augmented statistic particle count + total sinks)."""
    _check_variant(order)
    eps_grid = tuple(float(e) for e in eps_grid)
    if any(not 0.0 < e < 1.0 for e in eps_grid):
        raise ValueError("eps grid must lie in (0, 1)")
    if any(b >= a for a, b in zip(eps_grid[1:], eps_grid)):
        raise ValueError("eps grid must be strictly increasing")
    if t < x * lam:
        raise ValueError("requires t >= x*lam")
    if augmented:
        if t <= x * lam:
            raise ValueError("augmented statistic needs t > x*lam")
        argses = [(seed, r, x, t, lam, order) for r in range(reps)]
        vals = np.asarray(_parallel_map(_augmented_replica, argses, parallelism))
    else:
        argses = [(seed, r, x, t, lam, order) for r in range(reps)]
        vals = np.asarray(_parallel_map(_poisson_replica, argses, parallelism))
    mb = mean_bound(x, t, lam)
    center = mb.strict_mean if order == "strict" else mb.weak_mean
    upper = tuple(float(np.mean(vals > (1 + e) * center)) for e in eps_grid)
    lower = tuple(float(np.mean(vals < (1 - e) * center)) for e in eps_grid)
    scale = math.sqrt(x * t * lam) - x * lam
    if order == "strict":
        bound = tuple(min(1.0, 2.0 * math.exp(-augmented_tail_rate(e) * scale))
                      for e in eps_grid)
    else:
        bound = tuple(math.nan for _ in eps_grid)
    return DeviationProfile(x, t, lam, order, augmented, center, eps_grid,
                            upper, lower, bound, reps, seed)


@dataclass(frozen=True)
class DepoissonizationReport:
    """Word estimator versus the matched Poisson-cloud estimator.

    The matched cloud lives on [0, n*k] x {1..n} with intensity 1/n, so each
    row holds k points on average.  ``budget`` is the smoothness allowance
    6*sqrt(n*sqrt(k)) plus 8 standard errors; it presumes k well below n,
    so for k comparable to n the report is informative only.
    """

    word: EstimateReport
    poissonized: EstimateReport
    diff: float
    budget: float
    within_budget: bool


def depoissonization_report(n: int, k: int, reps: int, seed: int,
                            parallelism: int = 1) -> DepoissonizationReport:
    w = estimate_mean_subsequence(n, k, "strict", reps, seed, parallelism)
    p = estimate_poissonized(float(n * k), n, 1.0 / n, "strict", reps, seed, parallelism)
    diff = abs(w.mean - p.mean)
    budget = 6.0 * math.sqrt(n * math.sqrt(k)) + 8.0 * (w.stderr + p.stderr)
    return DepoissonizationReport(w, p, diff, budget, diff <= budget)
