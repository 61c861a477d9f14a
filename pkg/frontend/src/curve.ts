/** SVG builder for the threshold-versus-deaths picture.
 *
 * Draws the service's continuous power-holding curve, the discrete
 * grid-snapped staircase on top of it, and an optional "what if the
 * observed death count is X" slider marker. Only coordinate mapping
 * happens here; the curve and staircase values come from /v1/curve.
 */

import type { CurveResponse } from "./types.js";

export interface CurveLayout {
  width: number;
  height: number;
  margin: number;
}

export const DEFAULT_LAYOUT: CurveLayout = { width: 640, height: 320, margin: 40 };

interface Scales {
  x(d: number): number;
  y(t: number): number;
  dMin: number;
  dMax: number;
}

function makeScales(curve: CurveResponse, layout: CurveLayout): Scales {
  const ds = curve.points.map((p) => p.d);
  const thetas = curve.points
    .map((p) => p.theta_star)
    .concat(curve.bands.map((b) => b.threshold));
  const dMin = Math.min(...ds);
  const dMax = Math.max(...ds);
  const tMin = Math.min(...thetas);
  const tMax = Math.max(...thetas);
  const { width, height, margin } = layout;
  const pad = (tMax - tMin || 1) * 0.05;
  const x = (d: number) =>
    margin + ((d - dMin) / (dMax - dMin || 1)) * (width - 2 * margin);
  const y = (t: number) =>
    height - margin -
    ((t - (tMin - pad)) / (tMax + pad - (tMin - pad))) * (height - 2 * margin);
  return { x, y, dMin, dMax };
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}

/** Continuous curve as one polyline. */
function curvePath(curve: CurveResponse, s: Scales): string {
  const points = curve.points
    .map((p) => `${round2(s.x(p.d))},${round2(s.y(p.theta_star))}`)
    .join(" ");
  return `<polyline class="curve" fill="none" points="${points}"/>`;
}

/** Staircase overlay: one horizontal segment per snapped band. */
function staircase(curve: CurveResponse, s: Scales): string {
  const parts: string[] = [];
  for (const band of curve.bands) {
    const y = round2(s.y(band.threshold));
    const x1 = round2(s.x(band.d_lo));
    const x2 = round2(s.x(band.d_hi));
    const cls = band.exceeds_cap ? "band capped" : "band";
    parts.push(
      `<line class="${cls}" x1="${x1}" y1="${y}" x2="${x2}" y2="${y}" ` +
      `data-threshold="${band.threshold}"/>`,
    );
  }
  return parts.join("");
}

/** The service's threshold at an integer death count, straight from the data. */
export function curveValueAt(curve: CurveResponse, d: number): number | null {
  const point = curve.points.find((p) => p.d === d);
  return point === undefined ? null : point.theta_star;
}

export function bandAt(curve: CurveResponse, d: number) {
  return curve.bands.find((b) => b.d_lo <= d && d <= b.d_hi) ?? null;
}

/**
 * Full SVG document. `slider` is an integer death count; its marker
 * label quotes the service's curve value at that count to three
 * decimals, the same precision the plan table uses.
 */
export function renderCurveSvg(
  curve: CurveResponse,
  slider: number | null = null,
  layout: CurveLayout = DEFAULT_LAYOUT,
): string {
  if (curve.points.length === 0) {
    return `<svg class="curve-svg" viewBox="0 0 10 10"></svg>`;
  }
  const s = makeScales(curve, layout);
  const { width, height, margin } = layout;
  const parts: string[] = [];
  parts.push(
    `<svg class="curve-svg" viewBox="0 0 ${width} ${height}" role="img" ` +
    `aria-label="decision threshold against pooled death count">`,
  );
  parts.push(
    `<line class="axis" x1="${margin}" y1="${height - margin}" ` +
    `x2="${width - margin}" y2="${height - margin}"/>`,
  );
  parts.push(
    `<line class="axis" x1="${margin}" y1="${margin}" x2="${margin}" ` +
    `y2="${height - margin}"/>`,
  );
  parts.push(curvePath(curve, s));
  parts.push(staircase(curve, s));
  if (slider !== null) {
    const value = curveValueAt(curve, slider);
    if (value !== null) {
      const x = round2(s.x(slider));
      parts.push(
        `<line class="slider" x1="${x}" y1="${margin}" x2="${x}" ` +
        `y2="${height - margin}"/>`,
      );
      parts.push(
        `<circle class="slider-dot" cx="${x}" cy="${round2(s.y(value))}" r="4"/>`,
      );
      parts.push(
        `<text class="slider-label" x="${x + 6}" y="${margin + 12}">` +
        `d=${slider}: θ*=${value.toFixed(3)}</text>`,
      );
    }
  }
  parts.push("</svg>");
  return parts.join("");
}
