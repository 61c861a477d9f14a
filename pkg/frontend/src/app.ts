/** Browser bootstrap: wires the draft state, the API client, and the
 * pure renderers to the page. All logic lives in the imported modules;
 * this file only owns DOM plumbing.
 */

import { ApiClient, type Outcome } from "./api.js";
import {
  exportDraft,
  importDraft,
  loadDraft,
  newDraft,
  newStage,
  saveDraft,
  setValue,
  solveRequest,
  strategy1Draft,
  toggleParam,
  planRequest,
  type PlanDraft,
} from "./draft.js";
import {
  renderChips,
  renderInputs,
  renderOcCards,
  renderPlanTable,
  renderProblem,
  renderSolveResult,
  renderWarnings,
  escapeHtml,
} from "./render.js";
import { bandAt, curveValueAt, renderCurveSvg } from "./curve.js";
import type {
  CurveResponse,
  ParamName,
  PlanResponse,
  Problem,
  SolveResponse,
} from "./types.js";

const api = new ApiClient("");

let draft: PlanDraft = loadDraft(window.localStorage) ?? strategy1Draft();
let solveOutcomes: (Outcome<SolveResponse> | null)[] =
  draft.stages.map(() => null);
let planProblem: Problem | null = null;
let curveData: CurveResponse | null = null;
let sliderD: number | null = null;
let statusNote = "";

const root = document.getElementById("app") as HTMLElement;

function persist(): void {
  saveDraft(draft, window.localStorage);
}

// ---------------------------------------------------------------------------
// rendering

function solveSection(index: number): string {
  const outcome = solveOutcomes[index];
  let body = `<p class="muted">enter all four values to solve</p>`;
  if (outcome !== null) {
    if (outcome.kind === "ok") body = renderSolveResult(outcome.data);
    else if (outcome.kind === "problem") body = renderProblem(outcome.problem);
  }
  const stage = draft.stages[index];
  return (
    `<section class="stage" data-stage="${index}">` +
    `<header><h3>look ${index + 1}</h3>` +
    `<button type="button" class="remove-stage" data-stage="${index}"` +
    `${draft.stages.length === 1 ? " disabled" : ""}>remove</button></header>` +
    renderChips(stage, index) +
    renderInputs(stage, index) +
    body +
    `</section>`
  );
}

function planSection(): string {
  const plan = draft.lastResponse;
  const parts: string[] = [`<section class="plan-board"><h2>plan board</h2>`];
  parts.push(
    `<div class="plan-actions">` +
    `<button type="button" id="evaluate">evaluate plan</button>` +
    `<label>probe HRs <input id="true-hrs" value="${escapeHtml(
      draft.trueHrs.join(", "),
    )}" placeholder="e.g. 1.3, 0.8"></label>` +
    `<label>allocation π <input id="pi" value="${escapeHtml(
      String(draft.pi),
    )}" size="5"></label></div>`,
  );
  if (planProblem !== null) parts.push(renderProblem(planProblem));
  if (plan !== null) {
    parts.push(`<div class="plan-table-wrap">${renderPlanTable(plan)}</div>`);
    parts.push(renderWarnings(plan.warnings));
    parts.push(renderOcCards(plan.ocs));
  } else {
    parts.push(`<p class="muted">no evaluation yet</p>`);
  }
  parts.push(`</section>`);
  return parts.join("");
}

function curveSection(): string {
  const parts: string[] = [
    `<section class="curve-board"><h2>threshold curve</h2>`,
  ];
  if (curveData === null) {
    parts.push(
      `<p class="muted">add a look that fixes θ₁ and β to ` +
      `draw the power-holding curve</p>`,
    );
  } else {
    const points = curveData.points;
    const dMin = points[0].d;
    const dMax = points[points.length - 1].d;
    const current = sliderD ?? Math.round((dMin + dMax) / 2);
    parts.push(renderCurveSvg(curveData, current));
    parts.push(
      `<label class="slider-row">what if observed deaths = ` +
      `<output id="slider-value">${current}</output>` +
      `<input type="range" id="d-slider" min="${dMin}" max="${dMax}" ` +
      `step="1" value="${current}"></label>`,
    );
    const value = curveValueAt(curveData, current);
    const band = bandAt(curveData, current);
    if (value !== null) {
      const snapped = band === null ? "" :
        `; snapped grid threshold ${band.threshold.toFixed(2)}`;
      parts.push(
        `<p id="what-if">at d=${current}: continuous θ* = ` +
        `${value.toFixed(3)}${snapped}</p>`,
      );
    }
  }
  parts.push(`</section>`);
  return parts.join("");
}

function render(): void {
  // full innerHTML swaps lose focus; remember where the caret was
  const active = document.activeElement as HTMLInputElement | null;
  const focusKey =
    active !== null && active.tagName === "INPUT" && root.contains(active)
      ? { id: active.id, stage: active.dataset.stage, param: active.dataset.param,
          pos: active.selectionStart }
      : null;
  const stages = draft.stages.map((_, i) => solveSection(i)).join("");
  root.innerHTML =
    `<div class="toolbar">` +
    `<button type="button" id="load-reference">load reference design</button>` +
    `<button type="button" id="new-draft">new draft</button>` +
    `<button type="button" id="add-stage">add look</button>` +
    `<button type="button" id="export">export draft</button>` +
    `<label class="import-label">import draft` +
    `<input type="file" id="import" accept="application/json"></label>` +
    `<span id="status">${escapeHtml(statusNote)}</span></div>` +
    `<section class="stages">${stages}</section>` +
    planSection() +
    curveSection();
  if (focusKey !== null) {
    let selector = "";
    if (focusKey.id) selector = `#${focusKey.id}`;
    else if (focusKey.stage !== undefined && focusKey.param !== undefined) {
      selector =
        `.inputs input[data-stage="${focusKey.stage}"]` +
        `[data-param="${focusKey.param}"]`;
    }
    const next = selector ? root.querySelector<HTMLInputElement>(selector) : null;
    if (next !== null) {
      next.focus();
      if (focusKey.pos !== null && focusKey.pos !== undefined) {
        try {
          next.setSelectionRange(focusKey.pos, focusKey.pos);
        } catch {
          // range sliders and the like refuse selection ranges
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// service calls (all latest-wins per key)

async function solveStage(index: number): Promise<void> {
  const body = solveRequest(draft.stages[index], draft.pi);
  if (body === null) {
    solveOutcomes[index] = null;
    render();
    return;
  }
  const outcome = await api.post<SolveResponse>(`solve:${index}`, "/v1/solve", body);
  if (outcome.kind === "superseded") return;
  solveOutcomes[index] = outcome;
  render();
}

async function evaluatePlan(): Promise<void> {
  const body = planRequest(draft);
  if (body === null) {
    planProblem = {
      status: 0,
      code: "incomplete",
      title: "plan not ready",
      detail: "every look needs four valid values before evaluation",
    };
    render();
    return;
  }
  statusNote = "evaluating…";
  render();
  const outcome = await api.post<PlanResponse>("plan", "/v1/plan/evaluate", body);
  statusNote = "";
  if (outcome.kind === "superseded") return;
  if (outcome.kind === "problem") {
    planProblem = outcome.problem;
  } else {
    planProblem = null;
    draft = { ...draft, lastResponse: outcome.data };
    persist();
  }
  render();
}

function curveAnchor(): { theta1: number; beta: number; theta0: number | null } | null {
  for (const stage of draft.stages) {
    if (stage.chosen.includes("theta1") && stage.chosen.includes("beta")) {
      const req = solveRequest(stage, draft.pi);
      if (req !== null) {
        return {
          theta1: req.inputs.theta1,
          beta: req.inputs.beta,
          theta0: "theta0" in req.inputs ? req.inputs.theta0 : null,
        };
      }
    }
  }
  return null;
}

async function refreshCurve(): Promise<void> {
  const anchor = curveAnchor();
  if (anchor === null) {
    curveData = null;
    render();
    return;
  }
  const body: Record<string, unknown> = {
    theta1: anchor.theta1,
    beta: anchor.beta,
    d_min: 40,
    d_max: 200,
  };
  if (anchor.theta0 !== null) body.theta0 = anchor.theta0;
  const outcome = await api.post<CurveResponse>("curve", "/v1/curve", body);
  if (outcome.kind === "superseded") return;
  curveData = outcome.kind === "ok" ? outcome.data : null;
  render();
}

// ---------------------------------------------------------------------------
// event wiring (delegated)

function replaceDraft(next: PlanDraft): void {
  draft = next;
  solveOutcomes = draft.stages.map(() => null);
  planProblem = null;
  sliderD = null;
  persist();
  render();
  draft.stages.forEach((_, i) => void solveStage(i));
  void refreshCurve();
}

root.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.matches(".chip")) {
    const index = Number(target.dataset.stage);
    const param = target.dataset.param as ParamName;
    const result = toggleParam(draft.stages[index], param);
    if (result.blocked !== null) {
      statusNote = result.blocked;
      render();
      return;
    }
    if (!result.changed) return;
    statusNote = "";
    draft.stages[index] = result.stage;
    solveOutcomes[index] = null;
    persist();
    render();
    void solveStage(index);
    void refreshCurve();
  } else if (target.id === "evaluate") {
    void evaluatePlan();
  } else if (target.id === "add-stage") {
    draft.stages.push(newStage());
    solveOutcomes.push(null);
    persist();
    render();
  } else if (target.matches(".remove-stage")) {
    const index = Number(target.dataset.stage);
    if (draft.stages.length > 1) {
      draft.stages.splice(index, 1);
      solveOutcomes.splice(index, 1);
      persist();
      render();
      void refreshCurve();
    }
  } else if (target.id === "load-reference") {
    replaceDraft(strategy1Draft());
  } else if (target.id === "new-draft") {
    replaceDraft(newDraft());
  } else if (target.id === "export") {
    const blob = new Blob([exportDraft(draft)], { type: "application/json" });
    const url = URL.createObjectURL(blob);
    const link = document.createElement("a");
    link.href = url;
    link.download = "choose4-draft.json";
    link.click();
    URL.revokeObjectURL(url);
  }
});

root.addEventListener("input", (event) => {
  const target = event.target as HTMLInputElement;
  if (target.matches(".inputs input")) {
    const index = Number(target.dataset.stage);
    const param = target.dataset.param as ParamName;
    draft.stages[index] = setValue(draft.stages[index], param, target.value);
    persist();
    void solveStage(index);
    void refreshCurve();
  } else if (target.id === "d-slider") {
    sliderD = Number(target.value);
    // live re-query keeps the marker honest if the range ever moves
    void refreshCurve();
  } else if (target.id === "pi") {
    const pi = Number(target.value);
    if (Number.isFinite(pi) && pi > 0 && pi < 1) {
      draft = { ...draft, pi };
      persist();
      draft.stages.forEach((_, i) => void solveStage(i));
    }
  } else if (target.id === "true-hrs") {
    const hrs = target.value
      .split(",")
      .map((s) => Number(s.trim()))
      .filter((v) => Number.isFinite(v) && v > 0);
    draft = { ...draft, trueHrs: hrs };
    persist();
  }
});

root.addEventListener("change", (event) => {
  const target = event.target as HTMLInputElement;
  if (target.id === "import" && target.files && target.files[0]) {
    void target.files[0].text().then((text) => {
      try {
        replaceDraft(importDraft(text));
        statusNote = "draft imported";
      } catch (err) {
        statusNote = String(err instanceof Error ? err.message : err);
        render();
      }
    });
  }
});

// first paint
render();
draft.stages.forEach((_, i) => void solveStage(i));
void refreshCurve();
