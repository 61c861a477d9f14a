"""Joint operating characteristics across the looks of a monitoring plan.

Because each look tests the same log hazard ratio at nested information
levels, the standardized estimates (Z_1, ..., Z_K) form a multivariate
normal vector with the independent-increments correlation

    Corr(Z_i, Z_j) = sqrt(d_i / d_j),    d_i <= d_j.

Overall quantities (probability of meeting the OS criterion at every
look, of being flagged at least once, of meeting it at least once) are
lower-orthant probabilities of that vector. They are computed here with
the separation-of-variables transform of Genz (1992) driven by
randomized quasi-Monte Carlo: scrambled Sobol points, a fixed number of
independent randomizations, and a batch-means standard error. The
default budget (32 randomizations x 32768 points) reproduces 3-decimal
probabilities with standard errors around 1e-6.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import qmc

from .errors import CholeskyFailure, DomainError, NonmonotoneDeaths
from .plans import MonitoringPlan
from .stats import log_hr_std_error

DEFAULT_SEED = 20240601

# ndtri maps exactly 0 or 1 to +-inf; keep arguments strictly inside.
_UNIT_EPS = 1e-15


@dataclass(frozen=True)
class IntegrationSettings:
    """Budget and method for the orthant-probability kernel.

    Attributes:
        n_samples: Total points, split evenly over n_batches (default 2^20).
        n_batches: Independent randomizations for the batch-means error.
        seed: Root seed; every batch derives its own stream, so results
            do not depend on evaluation order.
        method: "rqmc" (scrambled Sobol) or "mc" (plain Monte Carlo).
        max_seconds: Optional wall-clock budget; batches stop early once
            exceeded (at least two batches always run).
    """

    n_samples: int = 1 << 20
    n_batches: int = 32
    seed: int = DEFAULT_SEED
    method: str = "rqmc"
    max_seconds: float | None = None

    def __post_init__(self):
        if self.n_batches < 2:
            raise DomainError("n_batches must be at least 2 for a batch-means error")
        if self.n_samples < self.n_batches:
            raise DomainError("n_samples must be at least n_batches")
        if self.method not in ("rqmc", "mc"):
            raise DomainError(f"method must be 'rqmc' or 'mc', got {self.method!r}")


@dataclass(frozen=True)
class JointProbResult:
    """A single estimated probability with its Monte Carlo uncertainty."""

    value: float
    std_error: float
    n_samples: int
    method: str


@dataclass(frozen=True)
class PrefixProbResult:
    """P(Z_1 < b_1, ..., Z_k < b_k) for every prefix k = 1..K."""

    values: tuple[float, ...]
    std_errors: tuple[float, ...]
    n_samples: int
    method: str

    def final(self) -> JointProbResult:
        return JointProbResult(self.values[-1], self.std_errors[-1],
                               self.n_samples, self.method)


@dataclass(frozen=True)
class FirstCrossingResult:
    """Distribution of the look at which the first flag is raised."""

    probs: tuple[float, ...]       # P(first flag at look k), k = 1..K
    never_flagged: float           # P(no look flags) = all-met probability
    std_errors: tuple[float, ...]  # for the per-look masses
    n_samples: int
    method: str


def correlation_matrix(deaths) -> np.ndarray:
    """Independent-increments correlation sqrt(d_i/d_j) for nested looks."""
    d = np.asarray(deaths, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise DomainError("deaths must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise DomainError(f"death counts must be positive and finite, got {d.tolist()}")
    if np.any(np.diff(d) <= 0):
        raise NonmonotoneDeaths(
            f"death counts must be strictly increasing, got {d.tolist()}")
    lo = np.minimum.outer(d, d)
    hi = np.maximum.outer(d, d)
    return np.sqrt(lo / hi)


def decision_limits(deaths, thresholds, true_hr: float, pi: float = 0.5) -> np.ndarray:
    """Standardized limits b_k = log(theta*_k / true_hr) * sqrt(pi(1-pi) d_k).

    The look-k criterion is met exactly when Z_k < b_k, where Z_k is the
    standardized log hazard-ratio estimate centered at the true value.
    """
    d = np.asarray(deaths, dtype=float)
    t = np.asarray(thresholds, dtype=float)
    if d.shape != t.shape:
        raise DomainError(f"deaths and thresholds lengths differ: "
                          f"{d.shape} vs {t.shape}")
    if not (math.isfinite(true_hr) and 0.0 < true_hr):
        raise DomainError(f"true hazard ratio must be positive, got {true_hr!r}")
    if np.any(t <= 0):
        raise DomainError("thresholds must be positive")
    return np.array([math.log(t[k] / true_hr) / log_hr_std_error(d[k], pi)
                     for k in range(d.size)])


def _cholesky(corr: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(corr)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure(
            "correlation matrix is not positive definite (death counts too "
            f"close or duplicated?): {exc}") from exc


def _batch_prefix_products(lower: np.ndarray, chol: np.ndarray,
                           u: np.ndarray) -> np.ndarray:
    """Mean over one batch of the Genz prefix products.

    Args:
        lower: Upper integration limits b (shape K) of the lower orthant.
        chol: Cholesky factor L (K x K).
        u: Uniform variates, shape (n, K-1).

    Returns:
        Length-K vector whose k-th entry estimates P(Z_1<b_1,...,Z_k<b_k).
    """
    n, km1 = u.shape
    k_dim = km1 + 1
    prefix_sums = np.empty(k_dim)
    e = np.full(n, ndtr(lower[0] / chol[0, 0]))
    f = e.copy()
    prefix_sums[0] = f.sum()
    y = np.empty((n, km1))
    for i in range(1, k_dim):
        arg = np.clip(e * u[:, i - 1], _UNIT_EPS, 1.0 - _UNIT_EPS)
        y[:, i - 1] = ndtri(arg)
        t = (lower[i] - y[:, :i] @ chol[i, :i]) / chol[i, i]
        e = ndtr(t)
        f = f * e
        prefix_sums[i] = f.sum()
    return prefix_sums / n


def mvn_lower_orthant_prefix(lower, corr,
                             settings: IntegrationSettings | None = None
                             ) -> PrefixProbResult:
    """All prefix lower-orthant probabilities of a zero-mean MVN vector.

    One kernel pass yields P(Z_1 < b_1, ..., Z_k < b_k) for every k
    simultaneously, because the separation-of-variables factors are
    accumulated coordinate by coordinate.
    """
    settings = settings or IntegrationSettings()
    b = np.asarray(lower, dtype=float)
    corr = np.asarray(corr, dtype=float)
    k_dim = b.size
    if corr.shape != (k_dim, k_dim):
        raise DomainError(f"correlation shape {corr.shape} does not match "
                          f"{k_dim} limits")
    if k_dim == 1:
        value = float(ndtr(b[0]))
        return PrefixProbResult((value,), (0.0,), 1, "exact")

    chol = _cholesky(corr)
    n_per_batch = settings.n_samples // settings.n_batches
    started = time.monotonic()
    batch_means = []
    for batch in range(settings.n_batches):
        rng = np.random.default_rng(np.random.SeedSequence([settings.seed, batch]))
        if settings.method == "rqmc":
            sampler = qmc.Sobol(d=k_dim - 1, scramble=True, seed=rng)
            u = sampler.random(n_per_batch)
        else:
            u = rng.random((n_per_batch, k_dim - 1))
        batch_means.append(_batch_prefix_products(b, chol, u))
        if (settings.max_seconds is not None and batch >= 1
                and time.monotonic() - started > settings.max_seconds):
            break
    means = np.array(batch_means)
    values = means.mean(axis=0)
    std_errors = means.std(axis=0, ddof=1) / math.sqrt(means.shape[0])
    return PrefixProbResult(tuple(float(v) for v in values),
                            tuple(float(s) for s in std_errors),
                            n_samples=means.shape[0] * n_per_batch,
                            method=settings.method)


def mvn_lower_orthant(lower, corr,
                      settings: IntegrationSettings | None = None) -> JointProbResult:
    """P(Z_1 < b_1, ..., Z_K < b_K) for a zero-mean MVN with the given correlation."""
    return mvn_lower_orthant_prefix(lower, corr, settings).final()


# ---------------------------------------------------------------------------
# plan-level quantities


def _plan_arrays(plan: MonitoringPlan) -> tuple[list[float], list[float]]:
    return plan.deaths(), plan.thresholds()


def prob_all_met(plan: MonitoringPlan, true_hr: float,
                 settings: IntegrationSettings | None = None) -> JointProbResult:
    """Probability that every look meets the OS criterion at the given true HR."""
    deaths, thresholds = _plan_arrays(plan)
    b = decision_limits(deaths, thresholds, true_hr, plan.pi)
    return mvn_lower_orthant(b, correlation_matrix(deaths), settings)


def prob_flagged_at_least_once(plan: MonitoringPlan, true_hr: float,
                               settings: IntegrationSettings | None = None
                               ) -> JointProbResult:
    """Probability that at least one look flags: the exact complement of all-met.

    Uses the same samples as ``prob_all_met``, so the two always sum to 1
    bit-for-bit rather than drifting apart across independent runs.
    """
    res = prob_all_met(plan, true_hr, settings)
    return JointProbResult(1.0 - res.value, res.std_error, res.n_samples, res.method)


def prob_at_least_one_met(plan: MonitoringPlan, true_hr: float,
                          settings: IntegrationSettings | None = None
                          ) -> JointProbResult:
    """Probability that at least one look meets the criterion.

    Evaluated under theta0 this is the familywise error rate of the plan:
    the chance that a truly detrimental treatment slips through some
    look. Computed as 1 - P(every look flags), itself a lower-orthant
    probability of the negated vector.
    """
    deaths, thresholds = _plan_arrays(plan)
    b = decision_limits(deaths, thresholds, true_hr, plan.pi)
    res = mvn_lower_orthant(-b, correlation_matrix(deaths), settings)
    return JointProbResult(1.0 - res.value, res.std_error, res.n_samples, res.method)


def first_crossing(plan: MonitoringPlan, true_hr: float,
                   settings: IntegrationSettings | None = None) -> FirstCrossingResult:
    """Distribution of the look raising the first flag.

    P(first flag at look k) = q_{k-1} - q_k where q_k is the probability
    of meeting the criterion at looks 1..k (q_0 = 1); the leftover mass
    q_K is the probability of never flagging.
    """
    deaths, thresholds = _plan_arrays(plan)
    b = decision_limits(deaths, thresholds, true_hr, plan.pi)
    prefix = mvn_lower_orthant_prefix(b, correlation_matrix(deaths), settings)
    q = (1.0,) + prefix.values
    probs = tuple(q[k - 1] - q[k] for k in range(1, len(q)))
    # the mass differences share samples; their errors are bounded by the
    # prefix errors on either side
    errs = tuple(max(prefix.std_errors[k],
                     prefix.std_errors[k - 1] if k > 0 else 0.0)
                 for k in range(len(prefix.std_errors)))
    return FirstCrossingResult(probs=probs, never_flagged=prefix.values[-1],
                               std_errors=errs, n_samples=prefix.n_samples,
                               method=prefix.method)


def operating_characteristics(plan: MonitoringPlan, true_hr: float,
                              settings: IntegrationSettings | None = None) -> dict:
    """All joint quantities for one true hazard ratio, as a plain mapping."""
    all_met = prob_all_met(plan, true_hr, settings)
    one_met = prob_at_least_one_met(plan, true_hr, settings)
    crossing = first_crossing(plan, true_hr, settings)
    return {
        "true_hr": float(true_hr),
        "prob_all_met": all_met.value,
        "prob_flagged_at_least_once": 1.0 - all_met.value,
        "prob_at_least_one_met": one_met.value,
        "first_flag_by_stage": list(crossing.probs),
        "std_error": max(all_met.std_error, one_met.std_error),
        "n_samples": all_met.n_samples,
        "method": all_met.method,
    }
