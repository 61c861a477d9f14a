"""HTTP service exposing the design engine.

Endpoints (all JSON):

* ``GET  /healthz``           liveness + engine version
* ``GET  /v1/strategies``     available strategy templates and their fields
* ``POST /v1/solve``          resolve one 4-of-6 analysis
* ``POST /v1/plan/evaluate``  build a plan and compute joint OCs
* ``POST /v1/curve``          power-holding threshold curve (+ grid bands)
* ``POST /v1/simulate``       patient-level Monte Carlo check of a plan

Domain failures map to 400, validation to 422, oversized work to 413;
every error body is a problem document with a stable ``code``.
"""

from __future__ import annotations

import hashlib
import json
import os

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..design import solve
from ..errors import Choose4Error, DomainError
from ..jointprob import IntegrationSettings, operating_characteristics
from ..plans import (
    STRATEGY_INFO,
    build_plan,
    discrete_approximation,
    format_value,
    plan_table,
    threshold_curve,
)
from ..simulate import TrialScenario, empirical_ocs
from . import schemas

# Work-size ceilings; anything larger is refused with 413 rather than
# letting one request monopolize the process.
MAX_STAGES = 25
MAX_CURVE_POINTS = 5_000
MAX_REPS = 200_000
MAX_TRUE_HRS = 25
MAX_SAMPLES = 1 << 24


class PayloadTooLarge(Exception):
    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(detail)


def _sha256_of(model) -> str:
    canonical = json.dumps(model.model_dump(), sort_keys=True,
                           separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canonical.encode()).hexdigest()


def _provenance(request_model) -> schemas.Provenance:
    return schemas.Provenance(engine_version=__version__,
                              request_sha256=_sha256_of(request_model))


def _problem(status: int, code: str, title: str, detail: str) -> JSONResponse:
    body = schemas.Problem(status=status, code=code, title=title, detail=detail)
    return JSONResponse(status_code=status, content=body.model_dump())


def _stage_rows(plan) -> list[schemas.StageRow]:
    return [schemas.StageRow(**row) for row in plan_table(plan)]


def _oc_row(plan, true_hr: float, settings: IntegrationSettings) -> schemas.OCRow:
    ocs = operating_characteristics(plan, true_hr, settings)
    display = {
        "true_hr": format_value("hr", ocs["true_hr"]),
        "prob_all_met": format_value("p", ocs["prob_all_met"]),
        "prob_flagged_at_least_once": format_value("p", ocs["prob_flagged_at_least_once"]),
        "prob_at_least_one_met": format_value("p", ocs["prob_at_least_one_met"]),
    }
    return schemas.OCRow(**ocs, display=display)


def create_app(static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="choose4", version=__version__,
                  description="Pre-specified OS safety monitoring designs: "
                              "choose any admissible 4 of the 6 parameters "
                              "per look; the engine derives the rest.")

    @app.exception_handler(PayloadTooLarge)
    async def too_large_handler(request: Request, exc: PayloadTooLarge):
        return _problem(413, "payload_too_large", "Request exceeds size limits",
                        exc.detail)

    @app.exception_handler(Choose4Error)
    async def domain_handler(request: Request, exc: Choose4Error):
        return _problem(400, exc.code, type(exc).__name__, str(exc))

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        detail = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
            for err in exc.errors())
        return _problem(422, "validation", "Request body failed validation", detail)

    @app.exception_handler(Exception)
    async def internal_handler(request: Request, exc: Exception):
        return _problem(500, "internal", "Internal error", str(exc))

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "engine_version": __version__}

    @app.get("/v1/strategies", response_model=schemas.StrategiesResponse)
    async def strategies():
        return schemas.StrategiesResponse(strategies=[
            schemas.StrategyInfo(name=name, summary=info["summary"],
                                 fields=list(info["fields"]))
            for name, info in STRATEGY_INFO.items()])

    @app.post("/v1/solve", response_model=schemas.SolveResponse)
    async def solve_endpoint(req: schemas.SolveRequest):
        result = solve(req.inputs, pi=req.pi, rounding=req.rounding)
        cells = {
            name: schemas.Cell(value=getattr(result.spec, name),
                               display=format_value(name, getattr(result.spec, name)),
                               chosen=name in result.inputs)
            for name in ("theta0", "theta1", "d", "theta_star", "alpha", "beta")}
        rounding = None
        if result.rounding is not None:
            rounding = schemas.RoundingOut(
                d_exact=result.rounding.d_exact,
                d_rounded=result.rounding.d_rounded,
                policy=result.rounding.policy,
                floated=result.rounding.floated,
                floated_chosen=result.rounding.floated_chosen)
        return schemas.SolveResponse(
            provenance=_provenance(req),
            parameters=cells,
            pi=req.pi,
            unknowns=sorted(result.unknowns),
            solve_route=result.solve_route,
            rounding=rounding,
            warnings=list(result.warnings))

    @app.post("/v1/plan/evaluate", response_model=schemas.PlanResponse)
    async def plan_evaluate(req: schemas.PlanRequest):
        if req.true_hrs is not None and len(req.true_hrs) > MAX_TRUE_HRS:
            raise PayloadTooLarge(f"at most {MAX_TRUE_HRS} true_hrs per request")
        if req.integration.n_samples > MAX_SAMPLES:
            raise PayloadTooLarge(f"n_samples capped at {MAX_SAMPLES}")
        plan = build_plan(req.strategy, req.config)
        if len(plan.stages) > MAX_STAGES:
            raise PayloadTooLarge(f"plans are capped at {MAX_STAGES} stages")
        final = plan.stages[-1].spec
        true_hrs = req.true_hrs if req.true_hrs is not None else [final.theta0,
                                                                  final.theta1]
        settings = IntegrationSettings(**req.integration.model_dump())
        return schemas.PlanResponse(
            provenance=_provenance(req),
            strategy=plan.strategy,
            pi=plan.pi,
            stages=_stage_rows(plan),
            ocs=[_oc_row(plan, hr, settings) for hr in true_hrs],
            warnings=plan.warnings())

    @app.post("/v1/curve", response_model=schemas.CurveResponse)
    async def curve(req: schemas.CurveRequest):
        n_points = req.d_max - req.d_min + 1
        if n_points > MAX_CURVE_POINTS:
            raise PayloadTooLarge(
                f"curve requests are capped at {MAX_CURVE_POINTS} death counts")
        points = [
            schemas.CurvePoint(**p)
            for p in threshold_curve(req.theta1, req.beta,
                                     range(req.d_min, req.d_max + 1), req.pi)]
        bands: list[schemas.Band] = []
        if req.include_bands and req.theta0 is not None:
            bands = [
                schemas.Band(d_lo=b.d_lo, d_hi=b.d_hi, threshold=b.threshold,
                             alpha_lo=b.alpha_lo, alpha_hi=b.alpha_hi,
                             power_lo=b.power_lo, power_hi=b.power_hi,
                             exceeds_cap=b.exceeds_cap)
                for b in discrete_approximation(
                    req.theta0, req.theta1, req.beta, req.d_min, req.d_max,
                    grid_start=req.grid_start, grid_step=req.grid_step,
                    alpha_cap=req.alpha_cap, pi=req.pi)]
        return schemas.CurveResponse(provenance=_provenance(req),
                                     points=points, bands=bands)

    @app.post("/v1/simulate", response_model=schemas.SimulateResponse)
    async def simulate(req: schemas.SimulateRequest):
        if req.n_reps > MAX_REPS:
            raise PayloadTooLarge(f"n_reps capped at {MAX_REPS}")
        if (req.deaths is None) != (req.thresholds is None):
            raise DomainError(
                "deaths and thresholds must be provided together")
        if req.deaths is not None and (req.strategy or req.config):
            raise DomainError(
                "give either explicit deaths/thresholds or a strategy+config, "
                "not both")
        if req.deaths is not None:
            deaths, thresholds = req.deaths, req.thresholds
        elif req.strategy is not None and req.config is not None:
            plan = build_plan(req.strategy, req.config)
            deaths, thresholds = plan.deaths(), plan.thresholds()
        else:
            raise DomainError(
                "either deaths+thresholds or strategy+config is required")
        if len(deaths) > MAX_STAGES:
            raise PayloadTooLarge(f"schedules are capped at {MAX_STAGES} stages")
        scenario = TrialScenario(
            n_patients=req.scenario.n_patients,
            accrual_years=req.scenario.accrual_years,
            control_median=req.scenario.control_median,
            hazard_ratio=(req.scenario.hazard_ratio
                          if isinstance(req.scenario.hazard_ratio, (int, float))
                          else tuple(req.scenario.hazard_ratio)),
            hr_cutpoints=tuple(req.scenario.hr_cutpoints),
            dropout_rate=req.scenario.dropout_rate,
            pi=req.scenario.pi)
        oc = empirical_ocs(scenario, deaths, thresholds,
                           n_reps=req.n_reps, seed=req.seed)
        display = {
            "prob_all_met": format_value("p", oc.prob_all_met),
            "prob_flagged_at_least_once": format_value("p", oc.prob_flagged_at_least_once),
            "prob_at_least_one_met": format_value("p", oc.prob_at_least_one_met),
        }
        return schemas.SimulateResponse(
            provenance=_provenance(req),
            n_reps=oc.n_reps,
            n_effective=oc.n_effective,
            n_degenerate=oc.n_degenerate,
            n_insufficient=oc.n_insufficient,
            prob_all_met=oc.prob_all_met,
            prob_all_met_se=oc.prob_all_met_se,
            prob_flagged_at_least_once=oc.prob_flagged_at_least_once,
            prob_at_least_one_met=oc.prob_at_least_one_met,
            prob_at_least_one_met_se=oc.prob_at_least_one_met_se,
            stages=[schemas.StageStats(**s) for s in oc.stages],
            display=display)

    if static_dir is None:
        static_dir = os.environ.get("CHOOSE4_STATIC_DIR")
    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")

    return app


app = create_app()
