/**
 * Readers for the two CSV schemas the experiment CLI emits:
 *
 *   sweep:       scheme,seed,param,value,sum_rate,iterations,runtime_ms
 *   convergence: iteration,sum_rate
 *
 * Values are plain decimal text (never quoted), but the parser tolerates
 * RFC-4180 quoting and both LF / CRLF endings.
 */

export interface SweepRow {
  scheme: string;
  seed: number;
  param: string;
  value: number;
  sumRate: number;
  iterations: number;
  runtimeMs: number;
}

export interface ConvergenceRow {
  iteration: number;
  sumRate: number;
}

export class CsvError extends Error {
  constructor(message: string, readonly path: string) {
    super(`${path}: ${message}`);
  }
}

export function parseCsv(text: string, path: string): string[][] {
  const rows: string[][] = [];
  let row: string[] = [];
  let field = "";
  let inQuotes = false;
  let i = 0;
  const push = () => {
    row.push(field);
    field = "";
  };
  const endRow = () => {
    push();
    if (row.length > 1 || row[0] !== "") rows.push(row);
    row = [];
  };
  while (i < text.length) {
    const ch = text[i];
    if (inQuotes) {
      if (ch === '"' && text[i + 1] === '"') {
        field += '"';
        i += 2;
        continue;
      }
      if (ch === '"') {
        inQuotes = false;
        i += 1;
        continue;
      }
      field += ch;
      i += 1;
    } else if (ch === '"' && field === "") {
      inQuotes = true;
      i += 1;
    } else if (ch === ",") {
      push();
      i += 1;
    } else if (ch === "\r" && text[i + 1] === "\n") {
      endRow();
      i += 2;
    } else if (ch === "\n") {
      endRow();
      i += 1;
    } else {
      field += ch;
      i += 1;
    }
  }
  if (inQuotes) throw new CsvError("unterminated quoted field", path);
  if (field !== "" || row.length > 0) endRow();
  return rows;
}

function columnIndex(header: string[], name: string, path: string): number {
  const idx = header.indexOf(name);
  if (idx < 0) throw new CsvError(`missing column '${name}' (header: ${header.join(",")})`, path);
  return idx;
}

function toNumber(raw: string, column: string, path: string): number {
  const value = Number(raw);
  if (raw.trim() === "" || Number.isNaN(value)) {
    throw new CsvError(`cannot parse '${raw}' in column '${column}'`, path);
  }
  return value;
}

export function readSweep(text: string, path: string): SweepRow[] {
  const rows = parseCsv(text, path);
  if (rows.length === 0) throw new CsvError("empty input", path);
  const header = rows[0];
  const col = {
    scheme: columnIndex(header, "scheme", path),
    seed: columnIndex(header, "seed", path),
    param: columnIndex(header, "param", path),
    value: columnIndex(header, "value", path),
    sumRate: columnIndex(header, "sum_rate", path),
    iterations: columnIndex(header, "iterations", path),
    runtimeMs: columnIndex(header, "runtime_ms", path),
  };
  if (rows.length === 1) throw new CsvError("no data rows", path);
  return rows.slice(1).map((r) => ({
    scheme: r[col.scheme],
    seed: toNumber(r[col.seed], "seed", path),
    param: r[col.param],
    value: toNumber(r[col.value], "value", path),
    sumRate: toNumber(r[col.sumRate], "sum_rate", path),
    iterations: toNumber(r[col.iterations], "iterations", path),
    runtimeMs: toNumber(r[col.runtimeMs], "runtime_ms", path),
  }));
}

export function readConvergence(text: string, path: string): ConvergenceRow[] {
  const rows = parseCsv(text, path);
  if (rows.length === 0) throw new CsvError("empty input", path);
  const header = rows[0];
  const iter = columnIndex(header, "iteration", path);
  const rate = columnIndex(header, "sum_rate", path);
  if (rows.length === 1) throw new CsvError("no data rows", path);
  return rows.slice(1).map((r) => ({
    iteration: toNumber(r[iter], "iteration", path),
    sumRate: toNumber(r[rate], "sum_rate", path),
  }));
}
