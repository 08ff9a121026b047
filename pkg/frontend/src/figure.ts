/**
 * Figure construction: turns parsed traces into log-log data series plus
 * optional reference-slope guide lines.  Everything here is pure data; the
 * SVG backend consumes the FigureSpec without re-reading the traces.
 */

import { Trace } from "./trace.js";

export interface Point {
  /** iteration count (x axis, log scale) */
  x: number;
  /** suboptimality f - f* (y axis, log scale) */
  y: number;
}

export interface Series {
  label: string;
  points: Point[];
  /** rows removed because f_gap <= 0 cannot be drawn on a log axis */
  droppedNonPositive: number;
  /** true when the underlying run diverged and was truncated */
  truncated: boolean;
}

export interface GuideLine {
  slope: number;
  /** anchor point the guide passes through, in data coordinates */
  anchor: Point;
}

export interface FigureSpec {
  series: Series[];
  guides: GuideLine[];
}

export class FigureError extends Error {}

function toSeries(trace: Trace): Series {
  const points: Point[] = [];
  let dropped = 0;
  for (const row of trace.rows) {
    if (row.iter < 1) continue; // log(0) is undrawable; the k=0 row is layout only
    if (!(row.fGap > 0) || !Number.isFinite(row.fGap)) {
      dropped += 1;
      continue;
    }
    points.push({ x: row.iter, y: row.fGap });
  }
  return {
    label: trace.label,
    points,
    droppedNonPositive: dropped,
    truncated: trace.outcome === "diverged",
  };
}

/** Least-squares slope of log y against log x over a series. */
export function fitSlope(series: Series): number {
  const pts = series.points;
  if (pts.length < 2) {
    throw new FigureError(`series "${series.label}" has too few points for a slope`);
  }
  const lx = pts.map((p) => Math.log(p.x));
  const ly = pts.map((p) => Math.log(p.y));
  const n = pts.length;
  const mx = lx.reduce((a, b) => a + b, 0) / n;
  const my = ly.reduce((a, b) => a + b, 0) / n;
  let num = 0;
  let den = 0;
  for (let i = 0; i < n; i++) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  if (den === 0) {
    throw new FigureError(`series "${series.label}" spans a single x value`);
  }
  return num / den;
}

/** Midpoint of a series in log space, used to anchor guide lines. */
function midpoint(series: Series): Point {
  const pts = series.points;
  const mid = pts[Math.floor(pts.length / 2)];
  return { x: mid.x, y: mid.y };
}

export function buildFigure(traces: Trace[], guideSlopes: number[] = []): FigureSpec {
  if (traces.length === 0) {
    throw new FigureError("no traces to plot");
  }
  const seen = new Set<string>();
  for (const trace of traces) {
    if (seen.has(trace.label)) {
      throw new FigureError(`duplicate trace label "${trace.label}"`);
    }
    seen.add(trace.label);
  }
  const series = traces.map(toSeries);
  const drawable = series.filter((s) => s.points.length >= 2);
  if (drawable.length === 0) {
    throw new FigureError("every trace is empty after dropping non-positive rows");
  }
  const anchorSeries = drawable.reduce((a, b) =>
    a.points.length >= b.points.length ? a : b
  );
  const guides = guideSlopes.map((slope) => ({
    slope,
    anchor: midpoint(anchorSeries),
  }));
  return { series, guides };
}
