"""Six-parameter design core for one overall-survival safety analysis.

A single analysis is characterized by six parameters: the hazard ratio
under the null hypothesis of unacceptable detriment (theta0), the hazard
ratio under the alternative of plausible benefit (theta1), the pooled
death count (d), the decision threshold on the hazard-ratio scale
(theta_star), and the marginal one-sided error rates (alpha, beta). Two
normal-approximation equations tie them together:

    alpha    = Phi(log(theta_star / theta0) * sqrt(pi*(1-pi)*d))
    1 - beta = Phi(log(theta_star / theta1) * sqrt(pi*(1-pi)*d))

Fixing any four of the six (as long as the two unknowns do not make one
equation underdetermined and the other overdetermined) pins down the
remaining two. This module enumerates the 15 unknown pairs, classifies
the 13 solvable ones by their evaluation route, and solves any of them
in closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import ArityError, DomainError, Infeasible, InvalidPattern
from .stats import log_hr_std_error, normal_cdf, normal_quantile

PARAMETERS = ("theta0", "theta1", "d", "theta_star", "alpha", "beta")

_HR_PARAMS = frozenset({"theta0", "theta1", "theta_star"})
_PROB_PARAMS = frozenset({"alpha", "beta"})

# Input-domain guards; values outside are rejected, never clamped.
HR_BOUNDS = (0.01, 100.0)
PROB_BOUNDS = (0.0001, 0.9999)
DEATHS_BOUNDS = (0.0, 1e7)

# The two underdetermined unknown pairs: the four inputs then all sit in
# one equation, leaving the other with two free parameters.
INVALID_UNKNOWNS = (frozenset({"alpha", "theta0"}), frozenset({"beta", "theta1"}))


class Rounding(str, enum.Enum):
    """Policy applied when the solved death count is fractional."""

    NEAREST = "nearest"
    CEIL = "ceil"
    FLOOR = "floor"
    EXACT = "exact"


@dataclass(frozen=True)
class AnalysisSpec:
    """A fully resolved single-analysis specification.

    All six parameters plus the allocation fraction; a resolved instance
    satisfies both design equations to within 1e-9 on the probability
    scale.
    """

    theta0: float
    theta1: float
    d: float
    theta_star: float
    alpha: float
    beta: float
    pi: float = 0.5

    def values(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in PARAMETERS}


@dataclass(frozen=True)
class ChoicePattern:
    """One way of designating 4 inputs and 2 unknowns among the six parameters."""

    inputs: frozenset[str]
    unknowns: frozenset[str]
    solve_route: str

    @property
    def solvable(self) -> bool:
        return self.solve_route != "invalid"


@dataclass(frozen=True)
class RoundingNote:
    """Record of an integer-rounding adjustment to a solved death count."""

    d_exact: float
    d_rounded: float
    policy: str
    floated: str          # which probability was re-derived at the integer d
    floated_chosen: float | None  # its originally chosen value, if it was an input


@dataclass(frozen=True)
class SolveResult:
    """Outcome of solving one analysis: the resolved spec plus bookkeeping."""

    spec: AnalysisSpec
    inputs: frozenset[str]
    unknowns: frozenset[str]
    solve_route: str
    rounding: RoundingNote | None = None
    warnings: tuple[str, ...] = field(default=())


def classify_unknowns(unknowns: frozenset[str]) -> str:
    """Solve route for a two-element unknown set.

    The type I equation involves (alpha, theta0, theta_star, d); the power
    equation involves (beta, theta1, theta_star, d). Routes:

    * ``direct-both``: one unknown per equation, independent evaluation.
    * ``eq2-then-eq1``: the power equation pins the shared unknown
      (d or theta_star) first.
    * ``eq1-then-eq2``: the type I equation pins the shared unknown first.
    * ``simultaneous-closed-form``: both shared parameters unknown.
    * ``invalid``: the underdetermined pairs {alpha, theta0}, {beta, theta1}.
    """
    if unknowns in INVALID_UNKNOWNS:
        return "invalid"
    shared = unknowns & {"d", "theta_star"}
    if len(shared) == 2:
        return "simultaneous-closed-form"
    if not shared:
        return "direct-both"
    other = next(iter(unknowns - shared))
    if other in ("alpha", "theta0"):
        return "eq2-then-eq1"
    return "eq1-then-eq2"


def enumerate_patterns() -> list[ChoicePattern]:
    """All 15 choice patterns: 13 solvable, 2 invalid."""
    names = list(PARAMETERS)
    patterns = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            unknowns = frozenset({names[i], names[j]})
            inputs = frozenset(names) - unknowns
            patterns.append(ChoicePattern(inputs, unknowns, classify_unknowns(unknowns)))
    return patterns


def _check_hr(name: str, value: float) -> None:
    lo, hi = HR_BOUNDS
    if not (isinstance(value, (int, float)) and math.isfinite(value) and lo < value < hi):
        raise DomainError(f"{name} must lie in ({lo}, {hi}), got {value!r}")


def _check_prob(name: str, value: float) -> None:
    lo, hi = PROB_BOUNDS
    if not (isinstance(value, (int, float)) and math.isfinite(value) and lo < value < hi):
        raise DomainError(f"{name} must lie in ({lo}, {hi}), got {value!r}")


def _check_deaths(value: float) -> None:
    lo, hi = DEATHS_BOUNDS
    if not (isinstance(value, (int, float)) and math.isfinite(value) and lo < value < hi):
        raise DomainError(f"d must lie in ({lo:g}, {hi:g}), got {value!r}")


def validate_parameter(name: str, value: float) -> None:
    """Domain check for a single named input parameter."""
    if name in _HR_PARAMS:
        _check_hr(name, value)
    elif name in _PROB_PARAMS:
        _check_prob(name, value)
    elif name == "d":
        _check_deaths(value)
    else:
        raise DomainError(f"unknown parameter name {name!r}")


def alpha_from(theta_star: float, theta0: float, d: float, pi: float = 0.5) -> float:
    """Marginal type I error of threshold theta_star at d deaths under theta0."""
    _check_hr("theta_star", theta_star)
    _check_hr("theta0", theta0)
    se = log_hr_std_error(d, pi)
    return normal_cdf(math.log(theta_star / theta0) / se)


def power_from(theta_star: float, theta1: float, d: float, pi: float = 0.5) -> float:
    """Marginal power (1 - beta) of threshold theta_star at d deaths under theta1."""
    _check_hr("theta_star", theta_star)
    _check_hr("theta1", theta1)
    se = log_hr_std_error(d, pi)
    return normal_cdf(math.log(theta_star / theta1) / se)


def threshold_from_alpha(alpha: float, theta0: float, d: float, pi: float = 0.5) -> float:
    """Threshold achieving marginal type I error alpha at d deaths under theta0."""
    _check_prob("alpha", alpha)
    _check_hr("theta0", theta0)
    se = log_hr_std_error(d, pi)
    return theta0 * math.exp(normal_quantile(alpha) * se)


def threshold_from_beta(beta: float, theta1: float, d: float, pi: float = 0.5) -> float:
    """Threshold achieving marginal power 1 - beta at d deaths under theta1."""
    _check_prob("beta", beta)
    _check_hr("theta1", theta1)
    se = log_hr_std_error(d, pi)
    return theta1 * math.exp(normal_quantile(1.0 - beta) * se)


def deaths_from(alpha: float, beta: float, theta0: float, theta1: float,
                pi: float = 0.5) -> float:
    """Exact (real-valued) death count separating theta0 from theta1.

    Solves both design equations simultaneously for d:

        d = ((z_{1-alpha} + z_{1-beta}) / log(theta0/theta1))^2 / (pi*(1-pi))

    Args:
        alpha: Marginal one-sided type I error.
        beta: Marginal type II error.
        theta0: Hazard ratio under the null (detriment) hypothesis.
        theta1: Hazard ratio under the alternative; must be < theta0.
        pi: Allocation fraction.

    Returns:
        The exact real solution; callers choose their own integer policy.
    """
    _check_prob("alpha", alpha)
    _check_prob("beta", beta)
    _check_hr("theta0", theta0)
    _check_hr("theta1", theta1)
    if not (0.0 < pi < 1.0):
        raise DomainError(f"allocation fraction must be in (0,1), got {pi!r}")
    if theta0 <= theta1:
        raise Infeasible(
            f"no finite death count separates theta0={theta0} from theta1={theta1}; "
            "theta0 must exceed theta1")
    z_sum = normal_quantile(1.0 - alpha) + normal_quantile(1.0 - beta)
    if z_sum <= 0.0:
        raise Infeasible(
            f"alpha={alpha} and beta={beta} leave no positive quantile mass "
            "(z_{1-alpha} + z_{1-beta} must be > 0)")
    return (z_sum / math.log(theta0 / theta1)) ** 2 / (pi * (1.0 - pi))


def _deaths_from_single(z: float, log_ratio: float, pi: float, context: str) -> float:
    """d solving z = log_ratio * sqrt(pi*(1-pi)*d); sign-consistent or Infeasible."""
    if log_ratio == 0.0 or z == 0.0 or (z > 0.0) != (log_ratio > 0.0):
        raise Infeasible(
            f"no positive death count satisfies the {context} equation: "
            "the chosen threshold sits on the wrong side of the hypothesis HR")
    return (z / log_ratio) ** 2 / (pi * (1.0 - pi))


def _apply_rounding(d_exact: float, policy: Rounding) -> float:
    if policy is Rounding.EXACT:
        return d_exact
    if policy is Rounding.CEIL:
        rounded = math.ceil(d_exact)
    elif policy is Rounding.FLOOR:
        rounded = math.floor(d_exact)
    else:
        rounded = round(d_exact)
    return float(max(rounded, 1))


def solve(inputs: dict[str, float], pi: float = 0.5,
          rounding: Rounding | str = Rounding.NEAREST) -> SolveResult:
    """Resolve a full analysis from exactly four named parameter values.

    Args:
        inputs: Mapping of exactly 4 names from
            {theta0, theta1, d, theta_star, alpha, beta} to values.
        pi: Allocation fraction (never an unknown).
        rounding: Integer policy applied when d is solved for. Whatever
            probability the integer d can no longer honor exactly is
            re-derived and reported via ``SolveResult.rounding``; with
            the ``exact`` policy the fractional d is kept.

    Returns:
        SolveResult whose spec satisfies both equations to within 1e-9.

    Raises:
        ArityError: not exactly four input names.
        InvalidPattern: the unknowns are {alpha, theta0} or {beta, theta1}.
        DomainError: a value outside its domain.
        Infeasible: no admissible solution (e.g. theta0 <= theta1 with d unknown).
    """
    rounding = Rounding(rounding)
    unknown_names = frozenset(PARAMETERS) - frozenset(inputs)
    bad = set(inputs) - set(PARAMETERS)
    if bad:
        raise DomainError(f"unknown parameter name(s): {sorted(bad)}")
    if len(inputs) != 4:
        raise ArityError(
            f"exactly 4 of the 6 parameters must be chosen, got {len(inputs)}: "
            f"{sorted(inputs)}")
    route = classify_unknowns(unknown_names)
    if route == "invalid":
        raise InvalidPattern(
            f"unknowns {sorted(unknown_names)} leave one equation with two free "
            "parameters and the other fully determined; choose a different split")
    for name, value in inputs.items():
        validate_parameter(name, value)
    if not (0.0 < pi < 1.0):
        raise DomainError(f"allocation fraction must be in (0,1), got {pi!r}")

    if "theta0" in inputs and "theta1" in inputs and inputs["theta0"] <= inputs["theta1"]:
        msg = (f"theta0={inputs['theta0']} must strictly exceed theta1={inputs['theta1']}")
        if "d" in unknown_names:
            raise Infeasible(msg)
        raise DomainError(msg)

    v = dict(inputs)
    warnings: list[str] = []
    note: RoundingNote | None = None

    def se(d: float) -> float:
        return log_hr_std_error(d, pi)

    if route == "simultaneous-closed-form":
        # unknowns {d, theta_star}: size first, then the threshold from the
        # power side; the achieved type I error absorbs any rounding.
        d_exact = deaths_from(v["alpha"], v["beta"], v["theta0"], v["theta1"], pi)
        chosen_alpha = v["alpha"]
        d_final = _apply_rounding(d_exact, rounding)
        v["d"] = d_final
        v["theta_star"] = threshold_from_beta(v["beta"], v["theta1"], d_final, pi)
        v["alpha"] = alpha_from(v["theta_star"], v["theta0"], d_final, pi)
        if rounding is not Rounding.EXACT and d_final != d_exact:
            note = RoundingNote(d_exact, d_final, rounding.value, "alpha", chosen_alpha)
    elif route == "direct-both":
        if "alpha" in unknown_names:
            v["alpha"] = alpha_from(v["theta_star"], v["theta0"], v["d"], pi)
        if "beta" in unknown_names:
            v["beta"] = 1.0 - power_from(v["theta_star"], v["theta1"], v["d"], pi)
        if "theta0" in unknown_names:
            v["theta0"] = v["theta_star"] * math.exp(-normal_quantile(v["alpha"]) * se(v["d"]))
        if "theta1" in unknown_names:
            v["theta1"] = v["theta_star"] * math.exp(-normal_quantile(1.0 - v["beta"]) * se(v["d"]))
    else:
        # One shared unknown (d or theta_star) pinned by one equation, then
        # the remaining unknown read off the other equation.
        first_is_power = route == "eq2-then-eq1"
        if "d" in unknown_names:
            if first_is_power:
                z = normal_quantile(1.0 - v["beta"])
                log_ratio = math.log(v["theta_star"] / v["theta1"])
                ctx = "power"
            else:
                z = normal_quantile(v["alpha"])
                log_ratio = math.log(v["theta_star"] / v["theta0"])
                ctx = "type I"
            d_exact = _deaths_from_single(z, log_ratio, pi, ctx)
            d_final = _apply_rounding(d_exact, rounding)
            v["d"] = d_final
            if rounding is not Rounding.EXACT and d_final != d_exact:
                # The equation that produced d can no longer hold exactly at
                # the integer count; its probability floats.
                floated = "beta" if first_is_power else "alpha"
                note = RoundingNote(d_exact, d_final, rounding.value, floated, v[floated])
            if first_is_power:
                v["beta"] = 1.0 - power_from(v["theta_star"], v["theta1"], v["d"], pi)
            else:
                v["alpha"] = alpha_from(v["theta_star"], v["theta0"], v["d"], pi)
        else:
            if first_is_power:
                v["theta_star"] = threshold_from_beta(v["beta"], v["theta1"], v["d"], pi)
            else:
                v["theta_star"] = threshold_from_alpha(v["alpha"], v["theta0"], v["d"], pi)
        # Second unknown, always from the opposite equation.
        second = next(iter(unknown_names - {"d", "theta_star"}))
        if second == "alpha":
            v["alpha"] = alpha_from(v["theta_star"], v["theta0"], v["d"], pi)
        elif second == "beta":
            v["beta"] = 1.0 - power_from(v["theta_star"], v["theta1"], v["d"], pi)
        elif second == "theta0":
            v["theta0"] = v["theta_star"] * math.exp(-normal_quantile(v["alpha"]) * se(v["d"]))
        else:
            v["theta1"] = v["theta_star"] * math.exp(-normal_quantile(1.0 - v["beta"]) * se(v["d"]))

    if v["theta1"] > 1.0:
        warnings.append("theta1 exceeds 1: the 'benefit' alternative is itself a detriment")
    if v["theta0"] <= v["theta1"]:
        warnings.append("resolved theta0 does not exceed theta1; hypotheses are inverted")
    if v["d"] >= DEATHS_BOUNDS[1]:
        warnings.append(f"solved death count {v['d']:.6g} exceeds the practical bound 1e7")

    spec = AnalysisSpec(theta0=v["theta0"], theta1=v["theta1"], d=v["d"],
                        theta_star=v["theta_star"], alpha=v["alpha"], beta=v["beta"], pi=pi)
    return SolveResult(spec=spec, inputs=frozenset(inputs), unknowns=unknown_names,
                       solve_route=route, rounding=note, warnings=tuple(warnings))


def residuals(spec: AnalysisSpec) -> tuple[float, float]:
    """Probability-scale residuals of the two design equations for a resolved spec."""
    r1 = alpha_from(spec.theta_star, spec.theta0, spec.d, spec.pi) - spec.alpha
    r2 = power_from(spec.theta_star, spec.theta1, spec.d, spec.pi) - (1.0 - spec.beta)
    return (r1, r2)
