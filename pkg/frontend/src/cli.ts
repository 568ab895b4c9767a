/**
 * Figure CLI.
 *
 *   plot --in sweep.csv --param pmax --out fig4a.svg
 *   plot --in trace.csv --out fig3.svg
 *   plot --all --in results/ --out figures/
 *
 * Output is SVG: vector, dependency-free, and byte-deterministic, so the
 * readback tests can compare plotted data exactly.
 */

import { plotAll, plotAuto } from "./plot";

function parseArgs(argv: string[]): Map<string, string | boolean> {
  const args = new Map<string, string | boolean>();
  for (let i = 0; i < argv.length; i += 1) {
    const token = argv[i];
    if (!token.startsWith("--")) throw new Error(`unexpected argument '${token}'`);
    const key = token.slice(2);
    if (key === "all") {
      args.set(key, true);
    } else {
      const value = argv[i + 1];
      if (value === undefined || value.startsWith("--")) {
        throw new Error(`missing value for --${key}`);
      }
      args.set(key, value);
      i += 1;
    }
  }
  return args;
}

export function main(argv: string[]): number {
  let args: Map<string, string | boolean>;
  try {
    args = parseArgs(argv);
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n`);
    return 2;
  }
  const input = args.get("in");
  const output = args.get("out");
  if (typeof input !== "string" || typeof output !== "string") {
    process.stderr.write("usage: plot [--all] --in <csv|dir> --out <svg|dir> [--param name]\n");
    return 2;
  }
  try {
    if (args.get("all") === true) {
      const written = plotAll(input, output);
      process.stderr.write(`wrote ${written.length} figure(s)\n`);
    } else {
      const param = args.get("param");
      plotAuto({ input, param: typeof param === "string" ? param : null, output });
    }
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n`);
    return 1;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
