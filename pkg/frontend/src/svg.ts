/**
 * Minimal deterministic SVG backend for log-log convergence figures.
 *
 * No drawing library: the output is a fixed-size viewport with hand-placed
 * axes, decade tick labels, one polyline per series, and dashed guide lines.
 * Identical specs render to identical strings.
 */

import { FigureSpec, Series } from "./figure.js";

const WIDTH = 760;
const HEIGHT = 520;
const MARGIN = { top: 28, right: 170, bottom: 48, left: 70 };

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

interface Extent {
  minX: number;
  maxX: number;
  minY: number;
  maxY: number;
}

function dataExtent(spec: FigureSpec): Extent {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const series of spec.series) {
    for (const p of series.points) {
      minX = Math.min(minX, p.x);
      maxX = Math.max(maxX, p.x);
      minY = Math.min(minY, p.y);
      maxY = Math.max(maxY, p.y);
    }
  }
  return { minX, maxX, minY, maxY };
}

function decadeTicks(min: number, max: number, maxCount: number): number[] {
  const lo = Math.ceil(Math.log10(min));
  const hi = Math.floor(Math.log10(max));
  const step = Math.max(1, Math.ceil((hi - lo + 1) / maxCount));
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e += step) ticks.push(e);
  return ticks;
}

function fmt(value: number): string {
  return value.toFixed(2);
}

export function renderSvg(spec: FigureSpec): string {
  const ext = dataExtent(spec);
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const lx0 = Math.log10(ext.minX);
  const lx1 = Math.log10(ext.maxX);
  const ly0 = Math.log10(ext.minY);
  const ly1 = Math.log10(ext.maxY);
  const sx = (x: number) =>
    MARGIN.left + ((Math.log10(x) - lx0) / Math.max(lx1 - lx0, 1e-12)) * plotW;
  const sy = (y: number) =>
    MARGIN.top + plotH - ((Math.log10(y) - ly0) / Math.max(ly1 - ly0, 1e-12)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">`
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // axes
  const xAxisY = MARGIN.top + plotH;
  parts.push(
    `<line x1="${MARGIN.left}" y1="${xAxisY}" x2="${MARGIN.left + plotW}" y2="${xAxisY}" stroke="black"/>`
  );
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${xAxisY}" stroke="black"/>`
  );
  for (const e of decadeTicks(ext.minX, ext.maxX, 8)) {
    const x = sx(10 ** e);
    parts.push(`<line x1="${fmt(x)}" y1="${xAxisY}" x2="${fmt(x)}" y2="${xAxisY + 5}" stroke="black"/>`);
    parts.push(
      `<text x="${fmt(x)}" y="${xAxisY + 20}" text-anchor="middle">1e${e}</text>`
    );
  }
  for (const e of decadeTicks(ext.minY, ext.maxY, 10)) {
    const y = sy(10 ** e);
    parts.push(`<line x1="${MARGIN.left - 5}" y1="${fmt(y)}" x2="${MARGIN.left}" y2="${fmt(y)}" stroke="black"/>`);
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end">1e${e}</text>`
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 10}" text-anchor="middle">iteration</text>`
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">f - f*</text>`
  );

  // guide lines, dashed, clipped to the x extent
  for (const guide of spec.guides) {
    const yAt = (x: number) =>
      guide.anchor.y * (x / guide.anchor.x) ** guide.slope;
    parts.push(
      `<line x1="${fmt(sx(ext.minX))}" y1="${fmt(sy(yAt(ext.minX)))}" ` +
        `x2="${fmt(sx(ext.maxX))}" y2="${fmt(sy(yAt(ext.maxX)))}" ` +
        `stroke="#999999" stroke-dasharray="6 4"/>`
    );
    parts.push(
      `<text x="${fmt(sx(guide.anchor.x) + 6)}" y="${fmt(sy(guide.anchor.y) - 6)}" ` +
        `fill="#666666">slope ${guide.slope}</text>`
    );
  }

  // series polylines and legend
  spec.series.forEach((series: Series, idx: number) => {
    if (series.points.length === 0) return;
    const color = PALETTE[idx % PALETTE.length];
    const coords = series.points
      .map((p) => `${fmt(sx(p.x))},${fmt(sy(p.y))}`)
      .join(" ");
    parts.push(
      `<polyline points="${coords}" fill="none" stroke="${color}" stroke-width="1.5"/>`
    );
    const last = series.points[series.points.length - 1];
    if (series.truncated) {
      // mark diverged runs at their last finite sample
      parts.push(
        `<circle cx="${fmt(sx(last.x))}" cy="${fmt(sy(last.y))}" r="4" ` +
          `fill="none" stroke="${color}" stroke-width="1.5"/>`
      );
    }
    const legendY = MARGIN.top + 16 * idx + 10;
    const legendX = MARGIN.left + plotW + 14;
    parts.push(
      `<line x1="${legendX}" y1="${legendY - 4}" x2="${legendX + 22}" y2="${legendY - 4}" ` +
        `stroke="${color}" stroke-width="1.5"/>`
    );
    const suffix = series.truncated ? " (diverged)" : "";
    parts.push(
      `<text x="${legendX + 28}" y="${legendY}">${series.label}${suffix}</text>`
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
