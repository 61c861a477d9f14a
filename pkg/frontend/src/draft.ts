/** Draft state for the plan board: which 4 parameters each look fixes.
 *
 * The draft is the only state the UI owns. Every number shown to the
 * user comes back from the service; the draft merely remembers what was
 * chosen, the raw input strings, and the last server snapshot so a
 * reloaded or imported draft re-renders identically without a request.
 */

import type { ParamName, PlanResponse } from "./types.js";

export const PARAMS: readonly ParamName[] = [
  "theta0",
  "theta1",
  "d",
  "theta_star",
  "alpha",
  "beta",
];

export const PARAM_LABELS: Record<ParamName, string> = {
  theta0: "θ₀",
  theta1: "θ₁",
  d: "d",
  theta_star: "θ*",
  alpha: "α",
  beta: "β",
};

/** The two parameter pairs that cannot be left unknown together. */
const INVALID_UNKNOWNS: ReadonlyArray<readonly [ParamName, ParamName]> = [
  ["alpha", "theta0"],
  ["beta", "theta1"],
];

export interface StageDraft {
  /** Exactly four names, oldest selection first. */
  chosen: ParamName[];
  /** Raw input strings keyed by parameter; empty string = not entered. */
  values: Partial<Record<ParamName, string>>;
}

export interface PlanDraft {
  schema: "choose4-draft/1";
  name: string;
  pi: number;
  stages: StageDraft[];
  /** Hazard ratios the joint operating characteristics are probed at. */
  trueHrs: number[];
  /** Last /v1/plan/evaluate document, kept so drafts re-render offline. */
  lastResponse: PlanResponse | null;
}

export function unknownsOf(chosen: readonly ParamName[]): ParamName[] {
  return PARAMS.filter((p) => !chosen.includes(p));
}

export function isInvalidUnknowns(unknowns: readonly ParamName[]): boolean {
  return INVALID_UNKNOWNS.some(
    ([a, b]) =>
      unknowns.length === 2 && unknowns.includes(a) && unknowns.includes(b),
  );
}

/** Explanation for why a pattern is underdetermined, or null if it is fine. */
export function invalidReason(chosen: readonly ParamName[]): string | null {
  const unknowns = unknownsOf(chosen);
  if (!isInvalidUnknowns(unknowns)) return null;
  const [a, b] = unknowns;
  return (
    `underdetermined: leaving {${PARAM_LABELS[a]}, ${PARAM_LABELS[b]}} ` +
    "unknown puts both free parameters in one equation"
  );
}

export interface ToggleResult {
  stage: StageDraft;
  changed: boolean;
  /** Set when the click was refused to keep the pattern solvable. */
  blocked: string | null;
}

/**
 * Click a parameter chip. Selecting a fifth parameter deselects the
 * oldest selection; a click that would leave an underdetermined pair
 * unknown is refused. Clicking an already-selected chip is a no-op
 * (deselecting would drop below four).
 */
export function toggleParam(stage: StageDraft, param: ParamName): ToggleResult {
  if (stage.chosen.includes(param)) {
    return { stage, changed: false, blocked: null };
  }
  const next = [...stage.chosen.slice(1), param];
  const reason = invalidReason(next);
  if (reason !== null) {
    return { stage, changed: false, blocked: reason };
  }
  return { stage: { ...stage, values: { ...stage.values }, chosen: next },
           changed: true, blocked: null };
}

/** Would clicking this (unselected) chip be refused? Used to disable it. */
export function toggleDisabledReason(
  stage: StageDraft,
  param: ParamName,
): string | null {
  if (stage.chosen.includes(param)) return null;
  return invalidReason([...stage.chosen.slice(1), param]);
}

const HR_PARAMS: ReadonlySet<ParamName> = new Set([
  "theta0",
  "theta1",
  "theta_star",
]);
const PROB_PARAMS: ReadonlySet<ParamName> = new Set(["alpha", "beta"]);

/**
 * Local input validation only — the service remains the numeric
 * authority. Returns an error message, or null when the text is usable.
 */
export function validateValue(param: ParamName, text: string): string | null {
  if (text.trim() === "") return "enter a value";
  const value = Number(text);
  if (!Number.isFinite(value)) return "not a number";
  if (HR_PARAMS.has(param) && (value <= 0.01 || value >= 100)) {
    return "hazard ratios must be in (0.01, 100)";
  }
  if (PROB_PARAMS.has(param) && (value <= 0.0001 || value >= 0.9999)) {
    return "probabilities must be in (0.0001, 0.9999)";
  }
  if (param === "d" && (value <= 0 || value >= 1e7)) {
    return "death count must be in (0, 1e7)";
  }
  return null;
}

export function setValue(
  stage: StageDraft,
  param: ParamName,
  text: string,
): StageDraft {
  return { chosen: [...stage.chosen], values: { ...stage.values, [param]: text } };
}

/** /v1/solve body for one stage, or null while any input is unusable. */
export function solveRequest(
  stage: StageDraft,
  pi: number,
): { inputs: Record<string, number>; pi: number } | null {
  const inputs: Record<string, number> = {};
  for (const param of stage.chosen) {
    const text = stage.values[param] ?? "";
    if (validateValue(param, text) !== null) return null;
    inputs[param] = Number(text);
  }
  return { inputs, pi };
}

/** /v1/plan/evaluate body covering every stage, or null if any is unready. */
export function planRequest(
  draft: PlanDraft,
): { strategy: string; config: { stages: Record<string, number>[] };
     true_hrs: number[] } | null {
  const stages: Record<string, number>[] = [];
  for (const stage of draft.stages) {
    const req = solveRequest(stage, draft.pi);
    if (req === null) return null;
    stages.push(req.inputs);
  }
  if (stages.length === 0) return null;
  return { strategy: "custom", config: { stages }, true_hrs: draft.trueHrs };
}

export function newStage(
  chosen: ParamName[] = ["theta0", "theta1", "d", "beta"],
  values: Partial<Record<ParamName, string>> = {},
): StageDraft {
  if (chosen.length !== 4) throw new Error("a stage fixes exactly 4 parameters");
  if (invalidReason(chosen) !== null) {
    throw new Error("stage template is underdetermined");
  }
  return { chosen: [...chosen], values: { ...values } };
}

export function newDraft(name = "untitled design"): PlanDraft {
  return {
    schema: "choose4-draft/1",
    name,
    pi: 0.5,
    stages: [newStage()],
    trueHrs: [],
    lastResponse: null,
  };
}

/** The worked four-look example, ready to evaluate. */
export function strategy1Draft(): PlanDraft {
  const base = { theta0: "1.3", theta1: "0.8", beta: "0.1" };
  const interim = (d: string) =>
    newStage(["theta0", "theta1", "d", "beta"], { ...base, d });
  return {
    schema: "choose4-draft/1",
    name: "four-look reference design",
    pi: 0.5,
    stages: [
      interim("89"),
      interim("110"),
      interim("131"),
      newStage(["theta0", "theta1", "d", "alpha"], {
        theta0: "1.3",
        theta1: "0.8",
        d: "178",
        alpha: "0.025",
      }),
    ],
    trueHrs: [1.3, 0.8],
    lastResponse: null,
  };
}

// ---------------------------------------------------------------------------
// persistence: file export/import and browser storage

export function exportDraft(draft: PlanDraft): string {
  return JSON.stringify(draft, null, 2);
}

export function importDraft(text: string): PlanDraft {
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch {
    throw new Error("draft file is not valid JSON");
  }
  const draft = parsed as PlanDraft;
  if (draft?.schema !== "choose4-draft/1") {
    throw new Error("not a recognized draft document");
  }
  if (!Array.isArray(draft.stages) || draft.stages.length === 0) {
    throw new Error("draft has no stages");
  }
  for (const stage of draft.stages) {
    if (!Array.isArray(stage.chosen) || stage.chosen.length !== 4) {
      throw new Error("every stage must fix exactly 4 parameters");
    }
    for (const p of stage.chosen) {
      if (!PARAMS.includes(p)) throw new Error(`unknown parameter ${p}`);
    }
    if (invalidReason(stage.chosen) !== null) {
      throw new Error("draft contains an underdetermined stage");
    }
  }
  if (typeof draft.pi !== "number" || !(draft.pi > 0 && draft.pi < 1)) {
    throw new Error("allocation fraction must be in (0, 1)");
  }
  return {
    schema: "choose4-draft/1",
    name: typeof draft.name === "string" ? draft.name : "imported design",
    pi: draft.pi,
    stages: draft.stages.map((s) => ({
      chosen: [...s.chosen],
      values: { ...s.values },
    })),
    trueHrs: Array.isArray(draft.trueHrs) ? [...draft.trueHrs] : [],
    lastResponse: draft.lastResponse ?? null,
  };
}

export const STORAGE_KEY = "choose4.draft.v1";

interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export function saveDraft(draft: PlanDraft, storage: StorageLike): void {
  storage.setItem(STORAGE_KEY, exportDraft(draft));
}

export function loadDraft(storage: StorageLike): PlanDraft | null {
  const text = storage.getItem(STORAGE_KEY);
  if (text === null) return null;
  try {
    return importDraft(text);
  } catch {
    return null;
  }
}
