/**
 * Deterministic SVG line charts.  No DOM, no canvas: the chart is assembled
 * as a string, so identical inputs give byte-identical files.  The plotted
 * series are embedded verbatim in a <metadata> JSON block, which is what
 * the readback tests (and anyone scripting against the figures) consume.
 */

import { Series } from "./aggregate";

export const WIDTH = 720;
export const HEIGHT = 480;
const MARGIN = { top: 24, right: 24, bottom: 56, left: 72 };

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const DASHES = ["", "6 3", "2 2", "8 3 2 3", "4 2", ""];

interface Extent {
  min: number;
  max: number;
}

function extent(values: number[]): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (min === max) {
    // degenerate span: pad so the single value sits mid-axis
    min -= 0.5;
    max += 0.5;
  }
  return { min, max };
}

function scale(value: number, e: Extent, lo: number, hi: number): number {
  return lo + ((value - e.min) / (e.max - e.min)) * (hi - lo);
}

function ticks(e: Extent, count: number): number[] {
  const span = e.max - e.min;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const out: number[] = [];
  for (let t = Math.ceil(e.min / chosen) * chosen; t <= e.max + 1e-12 * span; t += chosen) {
    out.push(Number(t.toPrecision(12)));
  }
  return out;
}

function fmt(value: number): string {
  return String(Number(value.toPrecision(6)));
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderChart(series: Series[], xLabel: string, yLabel: string): string {
  if (series.length === 0) throw new Error("nothing to plot: no series");
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  if (xs.length === 0) throw new Error("nothing to plot: empty series");
  const ex = extent(xs);
  const ey = extent(ys);
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(
    `<metadata id="plot-data">${esc(
      JSON.stringify({ xLabel, yLabel, series }),
    )}</metadata>`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  for (const t of ticks(ex, 6)) {
    const px = scale(t, ex, x0, x1);
    parts.push(`<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y1}" stroke="#eee"/>`);
    parts.push(
      `<text x="${fmt(px)}" y="${y0 + 18}" text-anchor="middle" fill="#333">${fmt(t)}</text>`,
    );
  }
  for (const t of ticks(ey, 6)) {
    const py = scale(t, ey, y0, y1);
    parts.push(`<line x1="${x0}" y1="${fmt(py)}" x2="${x1}" y2="${fmt(py)}" stroke="#eee"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${fmt(py)}" text-anchor="end" dominant-baseline="middle" fill="#333">${fmt(t)}</text>`,
    );
  }
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="#333"/>`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="#333"/>`);
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" text-anchor="middle" fill="#000">${esc(xLabel)}</text>`,
  );
  parts.push(
    `<text transform="translate(16 ${(y0 + y1) / 2}) rotate(-90)" text-anchor="middle" fill="#000">${esc(yLabel)}</text>`,
  );

  series.forEach((s, i) => {
    const color = COLORS[i % COLORS.length];
    const dash = DASHES[i % DASHES.length];
    const pts = s.x
      .map((x, k) => `${fmt(scale(x, ex, x0, x1))},${fmt(scale(s.y[k], ey, y0, y1))}`)
      .join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="2"${dashAttr}/>`,
    );
    for (const pt of pts.split(" ")) {
      const [px, py] = pt.split(",");
      parts.push(`<circle cx="${px}" cy="${py}" r="3" fill="${color}"/>`);
    }
    const ly = y1 + 16 + 18 * i;
    parts.push(
      `<line x1="${x1 - 150}" y1="${ly - 4}" x2="${x1 - 122}" y2="${ly - 4}" stroke="${color}" stroke-width="2"${dashAttr}/>`,
    );
    parts.push(`<text x="${x1 - 114}" y="${ly}" fill="#000">${esc(s.scheme)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

/** Pull the embedded series back out of a rendered chart. */
export function readChartData(svg: string): { xLabel: string; yLabel: string; series: Series[] } {
  const match = svg.match(/<metadata id="plot-data">([\s\S]*?)<\/metadata>/);
  if (!match) throw new Error("no plot-data metadata block found");
  const json = match[1].replace(/&lt;/g, "<").replace(/&gt;/g, ">").replace(/&amp;/g, "&");
  return JSON.parse(json);
}
