"""Request and response models for the HTTP service.

All request models reject unknown fields so typos fail loudly at the
boundary (422) instead of silently dropping a parameter. Responses carry
a provenance block: schema version, engine version, and the SHA-256 of
the canonicalized request body, so a stored document can always be tied
back to what produced it.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

SCHEMA_VERSION = "1"


class Provenance(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: str = SCHEMA_VERSION
    engine_version: str
    request_sha256: str


class Cell(BaseModel):
    """One parameter value plus how it should be read."""

    model_config = ConfigDict(extra="forbid")

    value: float
    display: str
    chosen: bool


class RoundingOut(BaseModel):
    model_config = ConfigDict(extra="forbid")

    d_exact: float
    d_rounded: float
    policy: str
    floated: str
    floated_chosen: float | None = None


# ---------------------------------------------------------------------------
# /v1/solve


class SolveRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    inputs: dict[str, float] = Field(
        description="Exactly 4 of: theta0, theta1, d, theta_star, alpha, beta")
    pi: float = 0.5
    rounding: Literal["nearest", "ceil", "floor", "exact"] = "nearest"


class SolveResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    provenance: Provenance
    parameters: dict[str, Cell]
    pi: float
    unknowns: list[str]
    solve_route: str
    rounding: RoundingOut | None = None
    warnings: list[str] = []


# ---------------------------------------------------------------------------
# /v1/strategies


class StrategyInfo(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    summary: str
    fields: list[str]


class StrategiesResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    strategies: list[StrategyInfo]


# ---------------------------------------------------------------------------
# /v1/plan/evaluate


class IntegrationOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_samples: int = 1 << 20
    n_batches: int = 32
    seed: int = 20240601
    method: Literal["rqmc", "mc"] = "rqmc"
    max_seconds: float | None = None


class PlanRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    strategy: str
    config: dict = Field(description="Strategy-specific fields; see /v1/strategies")
    true_hrs: list[float] | None = Field(
        default=None,
        description="Hazard ratios to evaluate joint OCs at; defaults to the "
                    "final look's (theta0, theta1)")
    integration: IntegrationOptions = IntegrationOptions()


class StageRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    stage: int
    label: str
    is_final: bool
    solve_route: str
    unknowns: list[str]
    cells: dict[str, Cell]
    warnings: list[str] = []


class OCRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    true_hr: float
    prob_all_met: float
    prob_flagged_at_least_once: float
    prob_at_least_one_met: float
    first_flag_by_stage: list[float]
    std_error: float
    n_samples: int
    method: str
    display: dict[str, str]


class PlanResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    provenance: Provenance
    strategy: str
    pi: float
    stages: list[StageRow]
    ocs: list[OCRow]
    warnings: list[str] = []


# ---------------------------------------------------------------------------
# /v1/curve


class CurveRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    theta1: float
    beta: float
    d_min: int = Field(ge=1)
    d_max: int
    theta0: float | None = None
    pi: float = 0.5
    grid_start: float = 1.0
    grid_step: float = 0.05
    alpha_cap: float | None = None
    include_bands: bool = True


class CurvePoint(BaseModel):
    model_config = ConfigDict(extra="forbid")

    d: float
    theta_star: float


class Band(BaseModel):
    model_config = ConfigDict(extra="forbid")

    d_lo: int
    d_hi: int
    threshold: float
    alpha_lo: float | None = None
    alpha_hi: float | None = None
    power_lo: float
    power_hi: float
    exceeds_cap: bool


class CurveResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    provenance: Provenance
    points: list[CurvePoint]
    bands: list[Band] = []


# ---------------------------------------------------------------------------
# /v1/simulate


class ScenarioIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_patients: int
    accrual_years: float
    control_median: float
    hazard_ratio: float | list[float]
    hr_cutpoints: list[float] = []
    dropout_rate: float = 0.0
    pi: float = 0.5


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioIn
    strategy: str | None = None
    config: dict | None = None
    deaths: list[int] | None = None
    thresholds: list[float] | None = None
    n_reps: int = 10_000
    seed: int = 20240601


class StageStats(BaseModel):
    model_config = ConfigDict(extra="forbid")

    d: int
    threshold: float
    flag_rate: float
    flag_rate_se: float
    mean_log_hr: float
    sd_log_hr: float


class SimulateResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    provenance: Provenance
    n_reps: int
    n_effective: int
    n_degenerate: int
    n_insufficient: int
    prob_all_met: float
    prob_all_met_se: float
    prob_flagged_at_least_once: float
    prob_at_least_one_met: float
    prob_at_least_one_met_se: float
    stages: list[StageStats]
    display: dict[str, str]


# ---------------------------------------------------------------------------
# errors


class Problem(BaseModel):
    """Problem-document error body used for every non-2xx response."""

    model_config = ConfigDict(extra="forbid")

    status: int
    code: str
    title: str
    detail: str
