"""Closed-form rates, first-order means, and exact tail-inequality certificates.

The tail validators compare closed-form exponential bounds against exact
Poisson / Binomial / negative-binomial tail probabilities computed by a
log-space recurrence over pmf terms, so a passing certificate is an exact
statement, not a sampled one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

_REL_TOL = 1e-12
_TERM_TOL = math.log(1e-18)

VARIANTS = ("strict", "weak")


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


@dataclass(frozen=True)
class BoundaryRates:
    """Source/sink intensities tied by the stationarity constraint.

    strict: sources PPP(source_rate), sinks Bernoulli(sink_param), with
    lam / (lam + source_rate) = sink_param.
    weak:   sources PPP(source_rate), sinks Geometric_{>=0}(1 - sink_param),
    with sink_param * source_rate = lam and source_rate > lam.
    """

    variant: str
    source_rate: float
    sink_param: float
    lam: float

    def __post_init__(self) -> None:
        _check_variant(self.variant)
        if self.lam <= 0 or self.source_rate <= 0:
            raise ValueError("lam and source_rate must be positive")
        if not 0.0 < self.sink_param < 1.0:
            raise ValueError("sink_param must lie in (0, 1)")
        if self.variant == "strict":
            residual = abs(self.lam / (self.lam + self.source_rate) - self.sink_param)
        else:
            if self.source_rate <= self.lam:
                raise ValueError("weak variant requires source_rate > lam")
            residual = abs(self.sink_param * self.source_rate - self.lam) / self.lam
        if residual > _REL_TOL:
            raise ValueError(f"stationarity constraint violated (residual {residual:.3e})")

    @staticmethod
    def strict_from_alpha(lam: float, alpha: float) -> "BoundaryRates":
        if lam <= 0 or alpha <= 0:
            raise ValueError("lam and alpha must be positive")
        return BoundaryRates("strict", alpha, lam / (lam + alpha), lam)

    @staticmethod
    def weak_from_beta(lam: float, beta: float) -> "BoundaryRates":
        if lam <= 0:
            raise ValueError("lam must be positive")
        if beta <= lam:
            raise ValueError("weak variant requires beta > lam")
        return BoundaryRates("weak", beta, lam / beta, lam)


@dataclass(frozen=True)
class MeanBound:
    """First-order mean values 2*sqrt(x*t*lam) -/+ x*lam for the two orders."""

    x: float
    t: float
    lam: float
    strict_mean: float
    weak_mean: float

    @property
    def in_domain(self) -> bool:
        """True on the validated domain t >= x*lam (where strict_mean >= 0)."""
        return self.t >= self.x * self.lam


def mean_bound(x: float, t: float, lam: float) -> MeanBound:
    if x <= 0 or t <= 0 or lam <= 0:
        raise ValueError("x, t, lam must be positive")
    root = 2.0 * math.sqrt(x * t * lam)
    return MeanBound(x, t, lam, root - x * lam, root + x * lam)


def optimal_rates_strict(x: float, t: float, lam: float) -> tuple[BoundaryRates, float]:
    """Cost-minimizing (alpha, p) for the strict boundary process.

    alpha = sqrt(t*lam/x) - lam and p = sqrt(x*lam/t); the boundary cost
    x*alpha + t*p equals 2*sqrt(x*t*lam) - x*lam.  Requires t > x*lam so
    that alpha > 0 and p < 1.
    """
    if x <= 0 or t <= 0 or lam <= 0:
        raise ValueError("x, t, lam must be positive")
    if t <= x * lam:
        raise ValueError("domain error: need t > x*lam for a positive source rate")
    alpha = math.sqrt(t * lam / x) - lam
    p = math.sqrt(x * lam / t)
    cost = x * alpha + t * p
    return BoundaryRates("strict", alpha, p, lam), cost


def optimal_rates_weak(x: float, t: float, lam: float) -> tuple[BoundaryRates, float]:
    """Cost-minimizing (beta, beta*) for the weak boundary process.

    beta = sqrt(t*lam/x) + lam, beta* = 1/(1 + sqrt(t/(x*lam))); the cost
    x*beta + t*beta*/(1-beta*) equals 2*sqrt(x*t*lam) + x*lam, and
    beta > lam always holds.
    """
    if x <= 0 or t <= 0 or lam <= 0:
        raise ValueError("x, t, lam must be positive")
    beta = math.sqrt(t * lam / x) + lam
    beta_star = 1.0 / (1.0 + math.sqrt(t / (x * lam)))
    cost = x * beta + t * beta_star / (1.0 - beta_star)
    return BoundaryRates("weak", beta, beta_star, lam), cost


def predicted_mean(n: int, k: int, order: str) -> float:
    """First-order mean subsequence length: 2*sqrt(n*k) - k (strict) or + k (weak)."""
    _check_variant(order)
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    root = 2.0 * math.sqrt(n * k)
    return root - k if order == "strict" else root + k


def sqrt_gap(eps: float) -> float:
    """2 - eps - 2*sqrt(1-eps): first-order cost of forcing a path through
    an eps-fraction boundary strip.  Zero at 0, increasing, 1 at 1."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    return 2.0 - eps - 2.0 * math.sqrt(1.0 - eps)


def augmented_tail_rate(eps: float) -> float:
    """Explicit exponential rate eps^2/12 in the exceedance bound for the
    boundary-augmented chain statistic at the optimal strict rates."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return eps * eps / 12.0


# ---------------------------------------------------------------------------
# Closed-form tail bounds

TAIL_KINDS = (
    "poisson_lower",
    "poisson_upper",
    "binomial_upper",
    "binomial_lower",
    "geomsum_upper",
    "geomsum_lower",
)


def poisson_tail_bound(lam: float, a: float) -> float:
    """exp(-a^2 / (4*lam)), the bound for both Poisson tails at lam -/+ a."""
    if lam <= 0 or a <= 0:
        raise ValueError("lam and a must be positive")
    return math.exp(-a * a / (4.0 * lam))


def binomial_upper_bound(n: int, p: float, eps: float) -> float:
    """exp(-eps^2*n*p/3) bounding P(X >= (1+eps)*n*p) for 0 < eps < 1."""
    _check_eps(eps)
    return math.exp(-eps * eps * n * p / 3.0)


def binomial_lower_bound(n: int, p: float, eps: float) -> float:
    """exp(-eps^2*n*p/2) bounding P(X <= (1-eps)*n*p) for 0 < eps < 1."""
    _check_eps(eps)
    return math.exp(-eps * eps * n * p / 2.0)


def geomsum_tail_bound(k: int, alpha: float, eps: float) -> float:
    """exp(-eps^2*k*alpha/(1-alpha)/4) for both tails of a sum of k
    Geometric_{>=0}(1-alpha) variables at (1 -/+ eps) times the mean."""
    _check_eps(eps)
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    mu = alpha / (1.0 - alpha)
    return math.exp(-0.25 * eps * eps * k * mu)


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")


def tail_bound(kind: str, params: dict) -> float:
    """Dispatch a closed-form tail bound by kind name."""
    if kind in ("poisson_lower", "poisson_upper"):
        return poisson_tail_bound(params["lam"], params["a"])
    if kind == "binomial_upper":
        return binomial_upper_bound(params["n"], params["p"], params["eps"])
    if kind == "binomial_lower":
        return binomial_lower_bound(params["n"], params["p"], params["eps"])
    if kind in ("geomsum_upper", "geomsum_lower"):
        return geomsum_tail_bound(params["k"], params["alpha"], params["eps"])
    raise ValueError(f"unknown tail kind {kind!r}")


# ---------------------------------------------------------------------------
# Exact tail probabilities (log space)

def _log_tail_sum(log_first: float, ratios: Iterable[float]) -> float:
    """log of sum of terms t_0 >= t_1 >= ... given log t_0 and successive
    ratios t_{j+1}/t_j; stops once a term drops below 1e-18 of the total."""
    if log_first == -math.inf:
        return -math.inf
    acc = 0.0  # log(sum / first)
    log_term = 0.0
    for r in ratios:
        if r <= 0.0:
            break
        log_term += math.log(r)
        if log_term - acc < _TERM_TOL:
            break
        acc = acc + math.log1p(math.exp(log_term - acc))
    return log_first + acc


def _log_range_sum(log_terms: Sequence[float]) -> float:
    """log of sum(exp(t) for t in log_terms), stable for any ordering."""
    m = max(log_terms, default=-math.inf)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(math.exp(t - m) for t in log_terms))


def _log_poisson_pmf(lam: float, j: int) -> float:
    return j * math.log(lam) - lam - math.lgamma(j + 1)


def log_poisson_upper(lam: float, threshold: float) -> float:
    """log P(Poisson(lam) >= threshold)."""
    m = max(0, math.ceil(threshold))
    def ratios():
        j = m
        while True:
            j += 1
            yield lam / j
    return _log_tail_sum(_log_poisson_pmf(lam, m), ratios())


def log_poisson_lower(lam: float, threshold: float) -> float:
    """log P(Poisson(lam) <= threshold)."""
    m = math.floor(threshold)
    if m < 0:
        return -math.inf
    return _log_range_sum([_log_poisson_pmf(lam, j) for j in range(m + 1)])


def _log_binom_pmf(n: int, p: float, j: int) -> float:
    return (
        math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)
        + j * math.log(p) + (n - j) * math.log1p(-p)
    )


def log_binomial_upper(n: int, p: float, threshold: float) -> float:
    """log P(Binomial(n, p) >= threshold)."""
    m = max(0, math.ceil(threshold))
    if m > n:
        return -math.inf
    return _log_range_sum([_log_binom_pmf(n, p, j) for j in range(m, n + 1)])


def log_binomial_lower(n: int, p: float, threshold: float) -> float:
    """log P(Binomial(n, p) <= threshold)."""
    m = math.floor(threshold)
    if m < 0:
        return -math.inf
    return _log_range_sum([_log_binom_pmf(n, p, j) for j in range(0, min(m, n) + 1)])


def _log_nbinom_pmf(k: int, alpha: float, j: int) -> float:
    return (
        math.lgamma(k + j) - math.lgamma(j + 1) - math.lgamma(k)
        + k * math.log1p(-alpha) + j * math.log(alpha)
    )


def log_geomsum_upper(k: int, alpha: float, threshold: float) -> float:
    """log P(sum of k Geometric_{>=0}(1-alpha) >= threshold)."""
    m = max(0, math.ceil(threshold))
    def ratios():
        j = m
        while True:
            yield alpha * (k + j) / (j + 1)
            j += 1
    return _log_tail_sum(_log_nbinom_pmf(k, alpha, m), ratios())


def log_geomsum_lower(k: int, alpha: float, threshold: float) -> float:
    """log P(sum of k Geometric_{>=0}(1-alpha) <= threshold)."""
    m = math.floor(threshold)
    if m < 0:
        return -math.inf
    return _log_range_sum([_log_nbinom_pmf(k, alpha, j) for j in range(m + 1)])


# ---------------------------------------------------------------------------
# Certificates

@dataclass(frozen=True)
class TailRecord:
    kind: str
    params: dict
    log_exact: float
    log_bound: float

    @property
    def exact(self) -> float:
        return math.exp(self.log_exact) if self.log_exact > -700 else 0.0

    @property
    def bound(self) -> float:
        return math.exp(self.log_bound) if self.log_bound > -700 else 0.0

    @property
    def passed(self) -> bool:
        return self.log_exact <= self.log_bound


@dataclass(frozen=True)
class TailCertificate:
    records: tuple[TailRecord, ...]

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list[TailRecord]:
        return [r for r in self.records if not r.passed]


def _default_grid(kind: str) -> list[dict]:
    if kind.startswith("poisson"):
        grid = []
        for e in range(8):
            lam = float(2 ** e)
            lo, hi = math.sqrt(lam), 4.0 * lam
            for i in range(8):
                a = lo + (hi - lo) * i / 7.0
                grid.append({"lam": lam, "a": a})
        return grid
    if kind.startswith("binomial"):
        return [
            {"n": n, "p": p, "eps": eps}
            for n in (10, 20, 50, 100, 300, 1000)
            for p in (0.1, 0.3, 0.5, 0.7, 0.9)
            for eps in (0.1, 0.3, 0.5, 0.7, 0.9)
        ]
    if kind.startswith("geomsum"):
        return [
            {"k": k, "alpha": alpha, "eps": eps}
            for k in (1, 2, 5, 10, 50, 100, 200)
            for alpha in (0.1, 0.3, 0.5, 0.7, 0.9)
            for eps in (0.1, 0.3, 0.5, 0.7, 0.9)
        ]
    raise ValueError(f"unknown tail kind {kind!r}")


def _evaluate(kind: str, params: dict) -> TailRecord:
    if kind == "poisson_lower":
        lam, a = params["lam"], params["a"]
        log_exact = log_poisson_lower(lam, lam - a)
    elif kind == "poisson_upper":
        lam, a = params["lam"], params["a"]
        log_exact = log_poisson_upper(lam, lam + a)
    elif kind == "binomial_upper":
        n, p, eps = params["n"], params["p"], params["eps"]
        log_exact = log_binomial_upper(n, p, (1.0 + eps) * n * p)
    elif kind == "binomial_lower":
        n, p, eps = params["n"], params["p"], params["eps"]
        log_exact = log_binomial_lower(n, p, (1.0 - eps) * n * p)
    elif kind == "geomsum_upper":
        k, alpha, eps = params["k"], params["alpha"], params["eps"]
        log_exact = log_geomsum_upper(k, alpha, (1.0 + eps) * k * alpha / (1.0 - alpha))
    elif kind == "geomsum_lower":
        k, alpha, eps = params["k"], params["alpha"], params["eps"]
        log_exact = log_geomsum_lower(k, alpha, (1.0 - eps) * k * alpha / (1.0 - alpha))
    else:
        raise ValueError(f"unknown tail kind {kind!r}")
    log_bound = math.log(tail_bound(kind, params))
    return TailRecord(kind, dict(params), log_exact, log_bound)


def verify_tail_inequality(kind: str, grid: list[dict] | None = None) -> TailCertificate:
    """Exact-CDF certificate: every grid point must satisfy exact <= bound.

    With ``grid=None`` the full default grid for the kind is used.  The
    comparison is done on log probabilities, so deep tails (down to
    exp(-hundreds)) are certified without underflow.
    """
    if kind not in TAIL_KINDS:
        raise ValueError(f"kind must be one of {TAIL_KINDS}")
    pts = _default_grid(kind) if grid is None else grid
    return TailCertificate(tuple(_evaluate(kind, p) for p in pts))


CERTIFICATE_COLUMNS = ("kind", "lam", "a", "n", "p", "k", "alpha", "eps",
                       "log_exact", "log_bound", "exact", "bound", "pass")


def certificate_rows(certs: Iterable[TailCertificate]) -> list[list]:
    """Flatten certificates into CSV rows under CERTIFICATE_COLUMNS."""
    rows = []
    for cert in certs:
        for r in cert.records:
            p = r.params
            rows.append([
                r.kind,
                p.get("lam", ""), p.get("a", ""),
                p.get("n", ""), p.get("p", ""),
                p.get("k", ""), p.get("alpha", ""), p.get("eps", ""),
                r.log_exact, r.log_bound, r.exact, r.bound, r.passed,
            ])
    return rows


# ---------------------------------------------------------------------------
# Regime diagnostics

@dataclass(frozen=True)
class RegimeDiagnostics:
    """Scaling ratios for the small/large multiplicity regimes.

    small_ratio = k^2 * k! / sqrt(n); large_ratio = n^2 * k * exp(-k^expo)
    / sqrt(n*k).  Both are asymptotic diagnostics, so no verdict is
    attached; log values are always finite even when the linear value
    overflows.
    """

    small_ratio: float
    large_ratio: float
    log_small: float
    log_large: float


def regime_diagnostics(n: int, k: int, expo: float = 0.5) -> RegimeDiagnostics:
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    if not 0.0 < expo < 1.0:
        raise ValueError("expo must lie in (0, 1)")
    log_small = 2.0 * math.log(k) + math.lgamma(k + 1) - 0.5 * math.log(n)
    log_large = 2.0 * math.log(n) + math.log(k) - k ** expo - 0.5 * math.log(n * k)
    def lin(v: float) -> float:
        return math.exp(v) if v < 700 else math.inf
    return RegimeDiagnostics(lin(log_small), lin(log_large), log_small, log_large)
