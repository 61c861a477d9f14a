/** Pure HTML builders: service documents in, markup strings out.
 *
 * Every number rendered here is a display string produced by the
 * service. The builders never compute or reformat statistics, so the
 * page shows exactly what the engine reported; chosen parameters get
 * the bold treatment and derived ones stay plain, and the solve panel
 * then inverts that emphasis to spotlight what was just solved.
 */

import {
  PARAMS,
  PARAM_LABELS,
  toggleDisabledReason,
  validateValue,
  type StageDraft,
} from "./draft.js";
import type {
  OCRow,
  ParamName,
  PlanResponse,
  Problem,
  SolveResponse,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Plan-board column order mirrors the classic design-table layout. */
export const TABLE_COLUMNS: ReadonlyArray<{ key: string; label: string }> = [
  { key: "d", label: "deaths (d)" },
  { key: "theta0", label: "θ₀" },
  { key: "theta1", label: "θ₁" },
  { key: "theta_star", label: "threshold θ*" },
  { key: "alpha", label: "α" },
  { key: "power", label: "1−β" },
];

function cellHtml(display: string, chosen: boolean): string {
  const cls = chosen ? "cell chosen" : "cell";
  return `<td class="${cls}">${escapeHtml(display)}</td>`;
}

/** Per-stage table; cells carry the service's display strings verbatim. */
export function renderPlanTable(plan: PlanResponse): string {
  const head = TABLE_COLUMNS.map((c) => `<th>${escapeHtml(c.label)}</th>`).join("");
  const rows = plan.stages
    .map((stage) => {
      const cells = TABLE_COLUMNS.map((column) => {
        const cell = stage.cells[column.key];
        return cellHtml(cell.display, cell.chosen);
      }).join("");
      return `<tr data-stage="${stage.stage}"><th>${escapeHtml(stage.label)}</th>${cells}</tr>`;
    })
    .join("");
  return (
    `<table class="plan-table"><thead><tr><th>look</th>${head}</tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<p class="legend"><span class="chosen">bold</span> = chosen directly; ` +
    `plain = derived by the engine.</p>`
  );
}

const OC_FIELDS: ReadonlyArray<{ key: string; label: string }> = [
  { key: "prob_all_met", label: "all thresholds met" },
  { key: "prob_flagged_at_least_once", label: "flagged at least once" },
  { key: "prob_at_least_one_met", label: "met at least once" },
];

/** One card per probed hazard ratio, quoting the integration error. */
export function renderOcCards(ocs: readonly OCRow[]): string {
  const cards = ocs
    .map((oc) => {
      const lines = OC_FIELDS.map(
        (f) =>
          `<dt>${escapeHtml(f.label)}</dt>` +
          `<dd>${escapeHtml(oc.display[f.key])}</dd>`,
      ).join("");
      return (
        `<article class="oc-card" data-hr="${escapeHtml(oc.display.true_hr)}">` +
        `<h3>true HR ${escapeHtml(oc.display.true_hr)}</h3><dl>${lines}</dl>` +
        `<footer>± ${escapeHtml(oc.std_error.toExponential(1))} ` +
        `(${escapeHtml(oc.method)}, ${oc.n_samples.toLocaleString("en-US")} samples)</footer>` +
        `</article>`
      );
    })
    .join("");
  return `<div class="oc-cards">${cards}</div>`;
}

/** Six toggle chips; a chip whose selection is refused renders disabled. */
export function renderChips(stage: StageDraft, stageIndex: number): string {
  const chips = PARAMS.map((param) => {
    const selected = stage.chosen.includes(param);
    const reason = toggleDisabledReason(stage, param);
    const cls = ["chip"];
    if (selected) cls.push("selected");
    if (reason !== null) cls.push("disabled");
    const title = reason === null ? "" : ` title="${escapeHtml(reason)}"`;
    const disabled = reason === null ? "" : " disabled";
    return (
      `<button type="button" class="${cls.join(" ")}" data-stage="${stageIndex}" ` +
      `data-param="${param}"${title}${disabled}>${escapeHtml(PARAM_LABELS[param])}</button>`
    );
  }).join("");
  const hint =
    "pick exactly 4 — selecting a 5th drops the oldest selection";
  return `<div class="chips" data-stage="${stageIndex}">${chips}` +
    `<span class="chips-hint">${hint}</span></div>`;
}

/** Value inputs for the four chosen parameters, with local validation. */
export function renderInputs(stage: StageDraft, stageIndex: number): string {
  const fields = stage.chosen
    .map((param) => {
      const raw = stage.values[param] ?? "";
      const error = raw === "" ? null : validateValue(param, raw);
      const errorHtml =
        error === null ? "" : `<span class="input-error">${escapeHtml(error)}</span>`;
      return (
        `<label class="field">${escapeHtml(PARAM_LABELS[param])}` +
        `<input data-stage="${stageIndex}" data-param="${param}" ` +
        `value="${escapeHtml(raw)}" inputmode="decimal">${errorHtml}</label>`
      );
    })
    .join("");
  return `<div class="inputs" data-stage="${stageIndex}">${fields}</div>`;
}

/**
 * Solve-panel result: all six parameters, with the two the engine just
 * solved shown bold (the chosen four stay plain — the inverse of the
 * plan table's emphasis).
 */
export function renderSolveResult(result: SolveResponse): string {
  const items = (PARAMS as readonly ParamName[])
    .map((param) => {
      const cell = result.parameters[param];
      const solved = !cell.chosen;
      const cls = solved ? "param solved" : "param";
      return (
        `<div class="${cls}" data-param="${param}">` +
        `<span class="param-name">${escapeHtml(PARAM_LABELS[param])}</span>` +
        `<span class="param-value">${escapeHtml(cell.display)}</span></div>`
      );
    })
    .join("");
  const notes: string[] = [];
  if (result.rounding !== null) {
    const r = result.rounding;
    notes.push(
      `rounded d ${r.d_exact.toFixed(4)} → ${r.d_rounded} (${r.policy}); ` +
      `${r.floated} floated`,
    );
  }
  for (const warning of result.warnings) notes.push(warning);
  const noteHtml = notes.length
    ? `<ul class="notes">${notes.map((n) => `<li>${escapeHtml(n)}</li>`).join("")}</ul>`
    : "";
  return (
    `<div class="solve-result" data-route="${escapeHtml(result.solve_route)}">` +
    `${items}${noteHtml}</div>`
  );
}

/** Inline banner for a structured problem document. */
export function renderProblem(problem: Problem): string {
  return (
    `<div class="problem" data-code="${escapeHtml(problem.code)}">` +
    `<strong>${escapeHtml(problem.title)}</strong> ` +
    `<span>${escapeHtml(problem.detail)}</span></div>`
  );
}

export function renderWarnings(warnings: readonly string[]): string {
  if (warnings.length === 0) return "";
  const items = warnings.map((w) => `<li>${escapeHtml(w)}</li>`).join("");
  return `<ul class="warnings">${items}</ul>`;
}
