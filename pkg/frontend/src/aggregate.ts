/** Mean-over-seeds aggregation of sweep rows into per-scheme series. */

import { SweepRow } from "./csv";

/** Canonical scheme order; also fixes curve styling. */
export const SCHEME_ORDER = ["Proposed", "RABM", "RSV", "RABM_RSV", "FSTAR"];

export interface Series {
  scheme: string;
  x: number[];
  y: number[];
}

export function schemeRank(scheme: string): number {
  const idx = SCHEME_ORDER.indexOf(scheme);
  return idx < 0 ? SCHEME_ORDER.length : idx;
}

/**
 * One (x, mean sum rate) series per scheme, x ascending.  The mean is the
 * plain arithmetic mean over all rows sharing (scheme, value), i.e. over
 * seeds.
 */
export function aggregate(rows: SweepRow[]): Series[] {
  const byScheme = new Map<string, Map<number, number[]>>();
  for (const row of rows) {
    let values = byScheme.get(row.scheme);
    if (!values) {
      values = new Map();
      byScheme.set(row.scheme, values);
    }
    let bucket = values.get(row.value);
    if (!bucket) {
      bucket = [];
      values.set(row.value, bucket);
    }
    bucket.push(row.sumRate);
  }
  const schemes = [...byScheme.keys()].sort(
    (a, b) => schemeRank(a) - schemeRank(b) || a.localeCompare(b),
  );
  return schemes.map((scheme) => {
    const values = byScheme.get(scheme)!;
    const xs = [...values.keys()].sort((a, b) => a - b);
    return {
      scheme,
      x: xs,
      y: xs.map((x) => mean(values.get(x)!)),
    };
  });
}

export function mean(values: number[]): number {
  let total = 0;
  for (const v of values) total += v;
  return total / values.length;
}
