/** Figure assembly: sweep and convergence CSVs to SVG charts. */

import * as fs from "node:fs";
import * as path from "node:path";

import { aggregate, Series } from "./aggregate";
import { CsvError, readConvergence, readSweep } from "./csv";
import { renderChart } from "./svg";

export interface FigureSpec {
  input: string;
  param: string | null; // null: derive from the CSV's param column
  output: string;
}

const Y_LABEL = "sum rate (bits/s/Hz)";

export function plotSweep(spec: FigureSpec): Series[] {
  const text = fs.readFileSync(spec.input, "utf-8");
  const rows = readSweep(text, spec.input);
  const params = [...new Set(rows.map((r) => r.param))];
  if (params.length !== 1) {
    throw new CsvError(`expected one sweep param per file, found [${params.join(", ")}]`, spec.input);
  }
  if (spec.param !== null && spec.param !== params[0]) {
    throw new CsvError(`file sweeps '${params[0]}', not '${spec.param}'`, spec.input);
  }
  const series = aggregate(rows);
  fs.writeFileSync(spec.output, renderChart(series, params[0], Y_LABEL), "utf-8");
  return series;
}

export function plotConvergence(spec: FigureSpec): Series[] {
  const text = fs.readFileSync(spec.input, "utf-8");
  const rows = readConvergence(text, spec.input);
  const series: Series[] = [
    { scheme: "Proposed", x: rows.map((r) => r.iteration), y: rows.map((r) => r.sumRate) },
  ];
  fs.writeFileSync(spec.output, renderChart(series, "iteration", Y_LABEL), "utf-8");
  return series;
}

/** Sniff the schema from the header line. */
export function plotAuto(spec: FigureSpec): Series[] {
  const text = fs.readFileSync(spec.input, "utf-8");
  const header = text.slice(0, text.indexOf("\n")).trim();
  if (header.startsWith("iteration,")) return plotConvergence(spec);
  return plotSweep(spec);
}

/** Plot every CSV in a directory; returns the written SVG paths. */
export function plotAll(inDir: string, outDir: string): string[] {
  const files = fs
    .readdirSync(inDir)
    .filter((f) => f.endsWith(".csv"))
    .sort();
  if (files.length === 0) throw new CsvError("no CSV files found", inDir);
  fs.mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  for (const f of files) {
    const output = path.join(outDir, f.replace(/\.csv$/, ".svg"));
    plotAuto({ input: path.join(inDir, f), param: null, output });
    written.push(output);
  }
  return written;
}
