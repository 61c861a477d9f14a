/** Wire types for the /v1 service documents the UI consumes. */

export type ParamName =
  | "theta0"
  | "theta1"
  | "d"
  | "theta_star"
  | "alpha"
  | "beta";

/** One parameter value as the service reports it. */
export interface Cell {
  value: number;
  display: string;
  chosen: boolean;
}

export interface Provenance {
  schema_version: string;
  engine_version: string;
  request_sha256: string;
}

export interface RoundingOut {
  d_exact: number;
  d_rounded: number;
  policy: string;
  floated: string;
  floated_chosen: number | null;
}

export interface SolveResponse {
  provenance: Provenance;
  parameters: Record<string, Cell>;
  pi: number;
  unknowns: string[];
  solve_route: string;
  rounding: RoundingOut | null;
  warnings: string[];
}

export interface StageRow {
  stage: number;
  label: string;
  is_final: boolean;
  solve_route: string;
  unknowns: string[];
  cells: Record<string, Cell>;
  warnings: string[];
}

export interface OCRow {
  true_hr: number;
  prob_all_met: number;
  prob_flagged_at_least_once: number;
  prob_at_least_one_met: number;
  first_flag_by_stage: number[];
  std_error: number;
  n_samples: number;
  method: string;
  display: Record<string, string>;
}

export interface PlanResponse {
  provenance: Provenance;
  strategy: string;
  pi: number;
  stages: StageRow[];
  ocs: OCRow[];
  warnings: string[];
}

export interface CurvePoint {
  d: number;
  theta_star: number;
}

export interface Band {
  d_lo: number;
  d_hi: number;
  threshold: number;
  alpha_lo: number | null;
  alpha_hi: number | null;
  power_lo: number;
  power_hi: number;
  exceeds_cap: boolean;
}

export interface CurveResponse {
  provenance: Provenance;
  points: CurvePoint[];
  bands: Band[];
}

/** Error body shared by every non-2xx response. */
export interface Problem {
  status: number;
  code: string;
  title: string;
  detail: string;
}
