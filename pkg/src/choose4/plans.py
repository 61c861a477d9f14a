"""Multi-look monitoring plans assembled from single-analysis choices.

A monitoring plan chains K analyses, each defined by its own
choose-4-of-6 pattern. Five named strategies cover the patterns seen in
practice; ``custom`` accepts an explicit per-stage choice list. The
strategies differ only in *which* four parameters are designated at each
look:

========== =========================== ===========================
strategy    interim looks               final look
========== =========================== ===========================
fleming     {theta0, theta1, d, beta}   {theta0, theta1, d, alpha}
rodriguez   {theta0, theta1, a, beta}   same (d solved every look)
standard_ci {theta0, theta1, d, alpha}  same
discrete    {theta0, theta1, d, th*}    same
fda_t2d     {theta1, d, alpha, beta}    {theta0, theta1, d, alpha}
========== =========================== ===========================

fleming and fda_t2d produce identical thresholds (both anchor interim
thresholds on the power equation and the final one on the type I
equation); they differ in which parameter is reported as derived at the
interims (the achieved alpha vs. the effectively-tested theta0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .design import (
    PARAMETERS,
    Rounding,
    SolveResult,
    alpha_from,
    power_from,
    solve,
    threshold_from_beta,
)
from .errors import DomainError, NonmonotoneDeaths, PatternMismatch

STRATEGY_NAMES = ("fleming", "rodriguez", "standard_ci", "discrete_threshold",
                  "fda_t2d", "custom")


@dataclass(frozen=True)
class PlanStage:
    """One resolved look of a monitoring plan."""

    index: int            # 1-based position
    label: str            # "IA1", ..., "FA"
    is_final: bool
    result: SolveResult

    @property
    def spec(self):
        return self.result.spec


@dataclass(frozen=True)
class MonitoringPlan:
    """A full pre-specified OS monitoring plan."""

    strategy: str
    stages: tuple[PlanStage, ...]
    pi: float

    def deaths(self) -> list[float]:
        return [s.spec.d for s in self.stages]

    def thresholds(self) -> list[float]:
        return [s.spec.theta_star for s in self.stages]

    def alphas(self) -> list[float]:
        return [s.spec.alpha for s in self.stages]

    def warnings(self) -> list[str]:
        out: list[str] = []
        for stage in self.stages:
            out.extend(f"{stage.label}: {w}" for w in stage.result.warnings)
        return out


def _stage_labels(k: int) -> list[str]:
    if k == 1:
        return ["FA"]
    return [f"IA{i}" for i in range(1, k)] + ["FA"]


def _as_list(value, k: int, name: str) -> list:
    """Broadcast a scalar to k stages, or validate a k-length sequence."""
    if isinstance(value, (int, float)):
        return [float(value)] * k
    seq = list(value)
    if len(seq) != k:
        raise DomainError(f"{name} must be a scalar or a length-{k} sequence, "
                          f"got {len(seq)} entries")
    return [float(x) for x in seq]


def _check_monotone(deaths: list[float], context: str) -> None:
    for a, b in zip(deaths, deaths[1:]):
        if b <= a:
            raise NonmonotoneDeaths(
                f"{context}: stage death counts must be strictly increasing, "
                f"got {deaths}")


def _assemble(strategy: str, results: list[SolveResult], pi: float) -> MonitoringPlan:
    labels = _stage_labels(len(results))
    stages = tuple(
        PlanStage(index=i + 1, label=labels[i], is_final=(i == len(results) - 1),
                  result=res)
        for i, res in enumerate(results))
    plan = MonitoringPlan(strategy=strategy, stages=stages, pi=pi)
    _check_monotone(plan.deaths(), f"{strategy} plan")
    return plan


def fleming_plan(theta0: float, theta1: float, deaths: list[float], beta,
                 final_alpha: float, pi: float = 0.5) -> MonitoringPlan:
    """Interim thresholds from the power equation, final from the type I.

    Interims designate {theta0, theta1, d, beta} and read off the achieved
    alpha; the final look designates {theta0, theta1, d, alpha} so the
    type I error is controlled exactly where it matters most.
    """
    deaths = [float(d) for d in deaths]
    if len(deaths) < 1:
        raise DomainError("at least one analysis is required")
    betas = _as_list(beta, len(deaths) - 1, "beta") if len(deaths) > 1 else []
    results = []
    for d, b in zip(deaths[:-1], betas):
        results.append(solve({"theta0": theta0, "theta1": theta1, "d": d, "beta": b},
                             pi=pi))
    results.append(solve({"theta0": theta0, "theta1": theta1, "d": deaths[-1],
                          "alpha": final_alpha}, pi=pi))
    return _assemble("fleming", results, pi)


def rodriguez_plan(theta0: float, theta1: float, alphas: list[float], beta,
                   pi: float = 0.5,
                   rounding: Rounding | str = Rounding.NEAREST) -> MonitoringPlan:
    """Death counts and thresholds both solved, one alpha per look."""
    alphas = list(alphas)
    if len(alphas) < 1:
        raise DomainError("at least one alpha is required")
    betas = _as_list(beta, len(alphas), "beta")
    results = [
        solve({"theta0": theta0, "theta1": theta1, "alpha": a, "beta": b},
              pi=pi, rounding=rounding)
        for a, b in zip(alphas, betas)]
    return _assemble("rodriguez", results, pi)


def standard_ci_plan(theta0: float, theta1: float, deaths: list[float], alphas,
                     pi: float = 0.5) -> MonitoringPlan:
    """Flag when the one-sided confidence bound excludes theta0.

    Equivalent to designating {theta0, theta1, d, alpha} at every look:
    the threshold is the largest hazard-ratio estimate whose upper
    1-alpha confidence limit still sits below theta0.
    """
    deaths = [float(d) for d in deaths]
    alphas = _as_list(alphas, len(deaths), "alphas")
    results = [
        solve({"theta0": theta0, "theta1": theta1, "d": d, "alpha": a}, pi=pi)
        for d, a in zip(deaths, alphas)]
    return _assemble("standard_ci", results, pi)


def discrete_threshold_plan(theta0: float, theta1: float, deaths: list[float],
                            thresholds, pi: float = 0.5) -> MonitoringPlan:
    """Round-number thresholds chosen directly; both error rates derived."""
    deaths = [float(d) for d in deaths]
    thresholds = _as_list(thresholds, len(deaths), "thresholds")
    results = [
        solve({"theta0": theta0, "theta1": theta1, "d": d, "theta_star": t}, pi=pi)
        for d, t in zip(deaths, thresholds)]
    return _assemble("discrete_threshold", results, pi)


def fda_t2d_plan(theta0: float, theta1: float, deaths: list[float], alpha,
                 beta, pi: float = 0.5) -> MonitoringPlan:
    """Interims designate {theta1, d, alpha, beta}; the tested theta0 floats.

    The interim thresholds coincide with fleming's; instead of reporting
    the achieved alpha against a fixed theta0, each interim reports the
    detriment hazard ratio theta0 that its threshold effectively tests at
    level alpha. The final look pins theta0 back down and derives beta.
    """
    deaths = [float(d) for d in deaths]
    if len(deaths) < 1:
        raise DomainError("at least one analysis is required")
    k = len(deaths)
    alphas = _as_list(alpha, k, "alpha")
    betas = _as_list(beta, k - 1, "beta") if k > 1 else []
    results = []
    for d, a, b in zip(deaths[:-1], alphas[:-1], betas):
        results.append(solve({"theta1": theta1, "d": d, "alpha": a, "beta": b}, pi=pi))
    results.append(solve({"theta0": theta0, "theta1": theta1, "d": deaths[-1],
                          "alpha": alphas[-1]}, pi=pi))
    return _assemble("fda_t2d", results, pi)


def custom_plan(stages: list[dict], pi: float = 0.5,
                rounding: Rounding | str = Rounding.NEAREST) -> MonitoringPlan:
    """Fully explicit plan: one 4-parameter choice mapping per stage."""
    if not stages:
        raise DomainError("at least one stage is required")
    results = [solve(dict(stage), pi=pi, rounding=rounding) for stage in stages]
    return _assemble("custom", results, pi)


# Registry consumed by the service layer and the CLI: builder plus the
# config fields each strategy requires beyond (pi, rounding).
STRATEGY_INFO = {
    "fleming": {
        "builder": fleming_plan,
        "fields": ["theta0", "theta1", "deaths", "beta", "final_alpha"],
        "summary": "Interim thresholds hold power against theta1; the final "
                   "threshold holds alpha against theta0.",
    },
    "rodriguez": {
        "builder": rodriguez_plan,
        "fields": ["theta0", "theta1", "alphas", "beta"],
        "summary": "Each look is fully sized from (alpha, beta): death count "
                   "and threshold are both solved.",
    },
    "standard_ci": {
        "builder": standard_ci_plan,
        "fields": ["theta0", "theta1", "deaths", "alphas"],
        "summary": "Flag when the upper confidence bound for the hazard ratio "
                   "excludes theta0; power is whatever it is.",
    },
    "discrete_threshold": {
        "builder": discrete_threshold_plan,
        "fields": ["theta0", "theta1", "deaths", "thresholds"],
        "summary": "Round-number hazard-ratio thresholds chosen outright; both "
                   "error rates are derived.",
    },
    "fda_t2d": {
        "builder": fda_t2d_plan,
        "fields": ["theta0", "theta1", "deaths", "alpha", "beta"],
        "summary": "Interims report the detriment hazard ratio effectively "
                   "tested at level alpha; thresholds match fleming's.",
    },
    "custom": {
        "builder": custom_plan,
        "fields": ["stages"],
        "summary": "Explicit per-stage choice of any solvable 4-parameter "
                   "pattern.",
    },
}


def build_plan(strategy: str, config: dict) -> MonitoringPlan:
    """Construct a plan from a strategy name and its config mapping.

    Args:
        strategy: One of STRATEGY_NAMES.
        config: Strategy-specific fields (see STRATEGY_INFO), plus optional
            ``pi`` and, where meaningful, ``rounding``.

    Raises:
        DomainError: Unknown strategy, missing/unused fields, bad values.
    """
    if strategy not in STRATEGY_INFO:
        raise DomainError(f"unknown strategy {strategy!r}; expected one of "
                          f"{', '.join(STRATEGY_NAMES)}")
    info = STRATEGY_INFO[strategy]
    allowed = set(info["fields"]) | {"pi", "rounding"}
    unused = set(config) - allowed
    if unused:
        raise DomainError(f"unexpected config fields for {strategy}: {sorted(unused)}")
    missing = set(info["fields"]) - set(config)
    if missing:
        raise DomainError(f"missing config fields for {strategy}: {sorted(missing)}")
    kwargs = {k: config[k] for k in info["fields"]}
    if "pi" in config:
        kwargs["pi"] = float(config["pi"])
    if "rounding" in config:
        if strategy not in ("rodriguez", "custom"):
            raise DomainError(f"rounding applies only when d is solved; "
                              f"{strategy} fixes the death counts")
        kwargs["rounding"] = config["rounding"]
    return info["builder"](**kwargs)


def recompute_for_observed(plan: MonitoringPlan, stage_index: int,
                           observed_d: float) -> MonitoringPlan:
    """Re-solve one stage at the death count actually observed.

    The stage keeps its original 4-parameter designation with only the
    death count replaced, so this is valid exactly when d was among the
    stage's chosen inputs.

    Args:
        plan: The plan as pre-specified.
        stage_index: 1-based stage to update.
        observed_d: Pooled deaths actually available at the look.

    Returns:
        A new plan with the stage re-solved.

    Raises:
        PatternMismatch: The stage solved *for* d rather than choosing it.
        NonmonotoneDeaths: The observed count breaks stage ordering.
    """
    if not 1 <= stage_index <= len(plan.stages):
        raise DomainError(f"stage_index must be in 1..{len(plan.stages)}, "
                          f"got {stage_index}")
    stage = plan.stages[stage_index - 1]
    if "d" not in stage.result.inputs:
        raise PatternMismatch(
            f"stage {stage.label} solved for its death count "
            f"(unknowns {sorted(stage.result.unknowns)}); substituting an "
            "observed d would contradict its chosen parameters")
    inputs = {name: getattr(stage.spec, name) for name in stage.result.inputs}
    inputs["d"] = float(observed_d)
    new_result = solve(inputs, pi=plan.pi)
    new_stage = PlanStage(index=stage.index, label=stage.label,
                          is_final=stage.is_final, result=new_result)
    stages = list(plan.stages)
    stages[stage_index - 1] = new_stage
    new_plan = MonitoringPlan(strategy=plan.strategy, stages=tuple(stages), pi=plan.pi)
    _check_monotone(new_plan.deaths(), "observed-deaths update")
    return new_plan


# ---------------------------------------------------------------------------
# display helpers


def format_value(name: str, value: float) -> str:
    """Display convention: integers for deaths, 3 decimals otherwise."""
    if name == "d":
        return f"{value:.0f}" if float(value).is_integer() else f"{value:.1f}"
    return f"{value:.3f}"


def plan_table(plan: MonitoringPlan) -> list[dict]:
    """Per-stage rows with every parameter value and its chosen/derived role."""
    rows = []
    for stage in plan.stages:
        cells = {}
        for name in PARAMETERS:
            value = getattr(stage.spec, name)
            cells[name] = {
                "value": value,
                "display": format_value(name, value),
                "chosen": name in stage.result.inputs,
            }
        power = 1.0 - stage.spec.beta
        cells["power"] = {
            "value": power,
            "display": format_value("power", power),
            "chosen": "beta" in stage.result.inputs,
        }
        rows.append({
            "stage": stage.index,
            "label": stage.label,
            "is_final": stage.is_final,
            "solve_route": stage.result.solve_route,
            "unknowns": sorted(stage.result.unknowns),
            "cells": cells,
            "warnings": list(stage.result.warnings),
        })
    return rows


# ---------------------------------------------------------------------------
# threshold curves and grid snapping


@dataclass(frozen=True)
class DiscreteBand:
    """A maximal run of death counts sharing one snapped threshold."""

    d_lo: int
    d_hi: int
    threshold: float
    alpha_lo: float       # marginal alpha at d_lo
    alpha_hi: float       # marginal alpha at d_hi
    power_lo: float
    power_hi: float
    exceeds_cap: bool


def threshold_curve(theta1: float, beta: float, d_values, pi: float = 0.5) -> list[dict]:
    """Continuous power-holding threshold theta*(d) = theta1 * exp(z_{1-beta}/s(d))."""
    out = []
    for d in d_values:
        out.append({"d": float(d),
                    "theta_star": threshold_from_beta(beta, theta1, float(d), pi)})
    return out


def snap_to_grid(value: float, grid_start: float = 1.0, grid_step: float = 0.05) -> float:
    """Smallest grid point >= value, on the lattice grid_start + k*grid_step."""
    k = math.ceil((value - grid_start) / grid_step - 1e-12)
    return round(grid_start + k * grid_step, 10)


def discrete_approximation(theta0: float, theta1: float, beta: float,
                           d_min: int, d_max: int, grid_start: float = 1.0,
                           grid_step: float = 0.05, alpha_cap: float | None = None,
                           pi: float = 0.5) -> list[DiscreteBand]:
    """Snap the continuous threshold curve to a communication-friendly grid.

    For every integer death count in [d_min, d_max] the continuous
    power-preserving threshold is rounded *up* to the nearest grid point
    (so the snapped rule never loses power against theta1), and runs of
    consecutive counts sharing a grid point are merged into bands. Each
    band reports the marginal alpha and power at its endpoints; bands
    whose worst-case alpha exceeds ``alpha_cap`` are flagged.
    """
    if d_min < 1 or d_max < d_min:
        raise DomainError(f"need 1 <= d_min <= d_max, got [{d_min}, {d_max}]")
    if grid_step <= 0:
        raise DomainError(f"grid_step must be positive, got {grid_step}")
    bands: list[DiscreteBand] = []
    run_start = None
    run_threshold = None
    for d in range(int(d_min), int(d_max) + 1):
        snapped = snap_to_grid(threshold_from_beta(beta, theta1, d, pi),
                               grid_start, grid_step)
        if run_threshold is None:
            run_start, run_threshold = d, snapped
        elif snapped != run_threshold:
            bands.append(_close_band(run_start, d - 1, run_threshold,
                                     theta0, theta1, alpha_cap, pi))
            run_start, run_threshold = d, snapped
    bands.append(_close_band(run_start, int(d_max), run_threshold,
                             theta0, theta1, alpha_cap, pi))
    return bands


def _close_band(d_lo: int, d_hi: int, threshold: float, theta0: float,
                theta1: float, alpha_cap: float | None, pi: float) -> DiscreteBand:
    a_lo = alpha_from(threshold, theta0, d_lo, pi)
    a_hi = alpha_from(threshold, theta0, d_hi, pi)
    p_lo = power_from(threshold, theta1, d_lo, pi)
    p_hi = power_from(threshold, theta1, d_hi, pi)
    worst_alpha = max(a_lo, a_hi)
    return DiscreteBand(d_lo=d_lo, d_hi=d_hi, threshold=threshold,
                        alpha_lo=a_lo, alpha_hi=a_hi,
                        power_lo=p_lo, power_hi=p_hi,
                        exceeds_cap=(alpha_cap is not None and worst_alpha > alpha_cap))
