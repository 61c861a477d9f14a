"""Patient-level trial simulation for checking designs end to end.

The normal-approximation machinery in the rest of the package treats
the log hazard-ratio estimate at d pooled deaths as
N(log theta, 1/(pi(1-pi)d)). This module provides the ground truth to
test that against: piecewise-exponential survival sampling, uniform
accrual, exponential dropout, event-driven snapshots, and a Cox
partial-likelihood fit (binary arm covariate, Breslow tie handling).

Hazards are piecewise constant. The experimental arm's hazard is the
control hazard multiplied by a (possibly time-varying) hazard ratio, so
non-proportional scenarios are just multi-segment ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InsufficientEvents, MonotoneLikelihood

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class TrialScenario:
    """A two-arm survival trial generating process.

    Attributes:
        n_patients: Total enrollment across both arms.
        accrual_years: Length of the uniform accrual window.
        control_median: Median OS in the control arm (exponential).
        hazard_ratio: Experimental-vs-control hazard ratio; a scalar for
            proportional hazards or one value per segment.
        hr_cutpoints: Times (from randomization) where the hazard ratio
            switches segments; length must be len(hazard_ratio) - 1.
        dropout_rate: Exponential dropout hazard applied to both arms
            (0 disables dropout).
        pi: Fraction of patients allocated to the experimental arm.
    """

    n_patients: int
    accrual_years: float
    control_median: float
    hazard_ratio: float | tuple[float, ...]
    hr_cutpoints: tuple[float, ...] = ()
    dropout_rate: float = 0.0
    pi: float = 0.5

    def __post_init__(self):
        if self.n_patients < 2:
            raise DomainError("n_patients must be at least 2")
        if not self.accrual_years > 0:
            raise DomainError("accrual_years must be positive")
        if not self.control_median > 0:
            raise DomainError("control_median must be positive")
        if not 0.0 < self.pi < 1.0:
            raise DomainError(f"pi must be in (0,1), got {self.pi}")
        if self.dropout_rate < 0:
            raise DomainError("dropout_rate cannot be negative")
        hrs = self.hr_segments()
        if len(self.hr_cutpoints) != len(hrs) - 1:
            raise DomainError(
                f"{len(hrs)} hazard-ratio segments need {len(hrs) - 1} "
                f"cutpoints, got {len(self.hr_cutpoints)}")
        if any(h <= 0 for h in hrs):
            raise DomainError("hazard ratios must be positive")
        cuts = list(self.hr_cutpoints)
        if any(c <= 0 for c in cuts) or cuts != sorted(cuts) or len(set(cuts)) != len(cuts):
            raise DomainError("hr_cutpoints must be positive and strictly increasing")

    def hr_segments(self) -> tuple[float, ...]:
        if isinstance(self.hazard_ratio, (int, float)):
            return (float(self.hazard_ratio),)
        return tuple(float(h) for h in self.hazard_ratio)

    @property
    def control_rate(self) -> float:
        return LOG2 / self.control_median


@dataclass(frozen=True)
class TrialData:
    """One simulated trial before any snapshot: latent per-patient times."""

    entry: np.ndarray          # calendar entry times
    death: np.ndarray          # death times from randomization (latent)
    dropout: np.ndarray        # dropout times from randomization (inf if none)
    arm: np.ndarray            # 1 = experimental, 0 = control

    @property
    def n(self) -> int:
        return self.entry.size


@dataclass(frozen=True)
class Snapshot:
    """Observed data at an event-driven analysis."""

    time: np.ndarray           # observed follow-up from randomization
    event: np.ndarray          # 1 = death observed
    arm: np.ndarray
    calendar_time: float       # when the snapshot was taken
    n_events: int


@dataclass(frozen=True)
class CoxFit:
    log_hr: float
    se: float
    n_events: int
    iterations: int

    @property
    def hr(self) -> float:
        return math.exp(self.log_hr)


def piecewise_cumhaz_inverse(e, rates, cutpoints) -> np.ndarray:
    """Invert a piecewise-constant cumulative hazard at the given exposures.

    Args:
        e: Target cumulative-hazard values (e.g. Exp(1) draws).
        rates: Hazard per segment, one more entry than cutpoints.
        cutpoints: Segment boundaries, strictly increasing, from time 0.

    Returns:
        Times t with Lambda(t) = e, exactly (the inverse is closed form).
    """
    e = np.asarray(e, dtype=float)
    rates = [float(r) for r in rates]
    cuts = [float(c) for c in cutpoints]
    if len(rates) != len(cuts) + 1:
        raise DomainError(f"{len(rates)} rates need {len(rates) - 1} cutpoints, "
                          f"got {len(cuts)}")
    if any(r <= 0 for r in rates):
        raise DomainError("hazard rates must be positive")
    out = np.empty_like(e)
    remaining = e.copy()
    t_prev = 0.0
    cum_prev = 0.0
    assigned = np.zeros(e.shape, dtype=bool)
    for i, rate in enumerate(rates):
        t_next = cuts[i] if i < len(cuts) else math.inf
        cum_next = cum_prev + rate * (t_next - t_prev) if math.isfinite(t_next) else math.inf
        hit = (~assigned) & (remaining <= cum_next)
        out[hit] = t_prev + (remaining[hit] - cum_prev) / rate
        assigned |= hit
        t_prev, cum_prev = t_next, cum_next
    out[~assigned] = math.inf  # unreachable with a final open segment
    return out


def simulate_trial(scenario: TrialScenario, seed) -> TrialData:
    """Draw one complete trial: entries, latent deaths, dropouts, arms.

    The seed may be an int or a numpy SeedSequence/Generator; replicate
    streams in ``empirical_ocs`` derive from SeedSequence((seed, rep)).
    """
    rng = np.random.default_rng(seed)
    n = scenario.n_patients
    n_exp = int(round(n * scenario.pi))
    arm = np.zeros(n, dtype=np.int8)
    arm[:n_exp] = 1
    entry = rng.uniform(0.0, scenario.accrual_years, n)

    exposures = rng.exponential(1.0, n)
    death = np.empty(n)
    control_rate = scenario.control_rate
    is_ctrl = arm == 0
    death[is_ctrl] = exposures[is_ctrl] / control_rate
    exp_rates = [control_rate * h for h in scenario.hr_segments()]
    death[~is_ctrl] = piecewise_cumhaz_inverse(exposures[~is_ctrl], exp_rates,
                                               scenario.hr_cutpoints)
    if scenario.dropout_rate > 0:
        dropout = rng.exponential(1.0 / scenario.dropout_rate, n)
    else:
        dropout = np.full(n, math.inf)
    return TrialData(entry=entry, death=death, dropout=dropout, arm=arm)


def snapshot_at_deaths(trial: TrialData, d: int) -> Snapshot:
    """Administratively censor the trial when the d-th pooled death occurs.

    Args:
        trial: Latent trial data.
        d: Target pooled death count (positive integer).

    Raises:
        InsufficientEvents: Fewer than d deaths ever become observable.
    """
    if d < 1:
        raise DomainError(f"d must be a positive integer, got {d}")
    observable = trial.death <= trial.dropout
    death_calendar = trial.entry[observable] + trial.death[observable]
    if death_calendar.size < d:
        raise InsufficientEvents(
            f"trial yields only {death_calendar.size} observable deaths, "
            f"needed {d}")
    cutoff = float(np.partition(death_calendar, d - 1)[d - 1])

    enrolled = trial.entry <= cutoff
    followup = cutoff - trial.entry[enrolled]
    death_t = trial.death[enrolled]
    dropout_t = trial.dropout[enrolled]
    # decide events on the calendar scale so the death that defines the
    # cutoff is never lost to rounding in cutoff - entry
    death_calendar_enrolled = trial.entry[enrolled] + death_t
    event = (death_t <= dropout_t) & (death_calendar_enrolled <= cutoff)
    time = np.where(event, death_t, np.minimum(dropout_t, followup))
    return Snapshot(time=time, event=event.astype(np.int8),
                    arm=trial.arm[enrolled], calendar_time=cutoff,
                    n_events=int(event.sum()))


def estimate_hr(time, event, arm, tol: float = 1e-10, max_iter: int = 50) -> CoxFit:
    """Cox partial-likelihood estimate of the arm hazard ratio.

    Binary covariate, Breslow handling of ties, Newton-Raphson until the
    score is below ``tol``. The standard error is the inverse square root
    of the observed information at the estimate.

    Raises:
        InsufficientEvents: No deaths at all.
        MonotoneLikelihood: All deaths in one arm (the estimate diverges).
    """
    time = np.asarray(time, dtype=float)
    event = np.asarray(event, dtype=bool)
    arm = np.asarray(arm, dtype=np.int64)
    n_events = int(event.sum())
    if n_events == 0:
        raise InsufficientEvents("no deaths in the snapshot; nothing to estimate")
    if arm[event].min() == arm[event].max():
        which = "experimental" if arm[event][0] == 1 else "control"
        raise MonotoneLikelihood(
            f"all {n_events} deaths fall in the {which} arm; the partial "
            "likelihood is monotone and the estimate diverges")

    order = np.argsort(time, kind="stable")
    t_s = time[order]
    z_s = arm[order]
    e_s = event[order]
    n = t_s.size
    # risk-set counts at each row, then collapsed to tie-group leaders so
    # tied events share one risk set (Breslow)
    n1_suffix = np.cumsum(z_s[::-1])[::-1]
    n_suffix = np.arange(n, 0, -1)
    uniq_times, first_idx = np.unique(t_s, return_index=True)
    group_start = first_idx[np.searchsorted(uniq_times, t_s)]
    ev_rows = np.flatnonzero(e_s)
    g = group_start[ev_rows]
    n_risk = n_suffix[g].astype(float)
    n1_risk = n1_suffix[g].astype(float)
    z_events = float(z_s[ev_rows].sum())

    b = 0.0
    for iteration in range(1, max_iter + 1):
        w = math.exp(b)
        s1 = w * n1_risk
        s0 = (n_risk - n1_risk) + s1
        p = s1 / s0
        score = z_events - float(p.sum())
        info = float((p * (1.0 - p)).sum())
        # a vanishing information or runaway estimate means the score is
        # sliding to zero at infinity, not crossing it
        if info < 1e-8 or abs(b) > 15.0:
            raise MonotoneLikelihood(
                "partial likelihood has no interior maximum (separated arms?)")
        if abs(score) < tol:
            return CoxFit(log_hr=b, se=1.0 / math.sqrt(info),
                          n_events=n_events, iterations=iteration)
        b += score / info
    raise MonotoneLikelihood(
        f"Newton iteration did not converge in {max_iter} steps (|score| "
        f"still {abs(score):.2e})")


# ---------------------------------------------------------------------------
# replicated operating characteristics


@dataclass
class StageAccumulator:
    d: int
    threshold: float
    n_flagged: int = 0
    sum_log_hr: float = 0.0
    sum_sq_log_hr: float = 0.0
    n_fits: int = 0

    def update(self, fit: CoxFit, flagged: bool) -> None:
        self.n_flagged += int(flagged)
        self.sum_log_hr += fit.log_hr
        self.sum_sq_log_hr += fit.log_hr ** 2
        self.n_fits += 1

    def summary(self, n_effective: int) -> dict:
        mean = self.sum_log_hr / self.n_fits if self.n_fits else math.nan
        if self.n_fits > 1:
            var = (self.sum_sq_log_hr - self.n_fits * mean * mean) / (self.n_fits - 1)
            sd = math.sqrt(max(var, 0.0))
        else:
            sd = math.nan
        rate = self.n_flagged / n_effective if n_effective else math.nan
        return {
            "d": self.d,
            "threshold": self.threshold,
            "flag_rate": rate,
            "flag_rate_se": _binom_se(rate, n_effective),
            "mean_log_hr": mean,
            "sd_log_hr": sd,
        }


def _binom_se(p: float, n: int) -> float:
    if not n or math.isnan(p):
        return math.nan
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


@dataclass(frozen=True)
class EmpiricalOCs:
    """Replicate-based operating characteristics of a monitoring schedule."""

    n_reps: int
    n_effective: int            # replicates with a usable fit at every stage
    n_degenerate: int           # one-armed-death or non-converged replicates
    n_insufficient: int         # replicates that never reached the last look
    prob_all_met: float
    prob_all_met_se: float
    prob_flagged_at_least_once: float
    prob_at_least_one_met: float
    prob_at_least_one_met_se: float
    stages: tuple[dict, ...] = field(default=())


def empirical_ocs(scenario: TrialScenario, deaths, thresholds,
                  n_reps: int = 10_000, seed: int = 20240601) -> EmpiricalOCs:
    """Monte Carlo OCs: simulate, snapshot at each look, fit, compare.

    Each replicate simulates one full trial, takes the event-driven
    snapshots in order, estimates the hazard ratio by Cox partial
    likelihood, and flags a look when the estimate is at or above its
    threshold. Streaming accumulators keep memory flat in n_reps.
    """
    deaths = [int(d) for d in deaths]
    thresholds = [float(t) for t in thresholds]
    if len(deaths) != len(thresholds):
        raise DomainError("deaths and thresholds must have equal length")
    if n_reps < 1:
        raise DomainError("n_reps must be positive")
    log_thresholds = [math.log(t) for t in thresholds]
    accs = [StageAccumulator(d=d, threshold=t)
            for d, t in zip(deaths, thresholds)]

    n_all_met = 0
    n_any_met = 0
    n_effective = 0
    n_degenerate = 0
    n_insufficient = 0
    for rep in range(n_reps):
        trial = simulate_trial(scenario, np.random.SeedSequence((seed, rep)))
        try:
            flags = []
            fits = []
            for d in deaths:
                snap = snapshot_at_deaths(trial, d)
                fit = estimate_hr(snap.time, snap.event, snap.arm)
                fits.append(fit)
                flags.append(fit.log_hr >= log_thresholds[len(flags)])
        except InsufficientEvents:
            n_insufficient += 1
            continue
        except MonotoneLikelihood:
            n_degenerate += 1
            continue
        n_effective += 1
        for acc, fit, flagged in zip(accs, fits, flags):
            acc.update(fit, flagged)
        n_all_met += not any(flags)
        n_any_met += not all(flags)

    if n_effective == 0:
        raise InsufficientEvents(
            f"no replicate produced usable fits ({n_insufficient} short of "
            f"events, {n_degenerate} degenerate)")
    p_all = n_all_met / n_effective
    p_any = n_any_met / n_effective
    return EmpiricalOCs(
        n_reps=n_reps,
        n_effective=n_effective,
        n_degenerate=n_degenerate,
        n_insufficient=n_insufficient,
        prob_all_met=p_all,
        prob_all_met_se=_binom_se(p_all, n_effective),
        prob_flagged_at_least_once=1.0 - p_all,
        prob_at_least_one_met=p_any,
        prob_at_least_one_met_se=_binom_se(p_any, n_effective),
        stages=tuple(acc.summary(n_effective) for acc in accs),
    )
