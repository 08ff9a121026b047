/**
 * plots <sweep_dir> --out fig.svg [--guides -1,-2]
 *
 * Reads every trace CSV in the sweep directory (summary.csv is metadata, not
 * a trace), builds the log-log figure, and writes a standalone SVG.
 */

import { readFileSync, readdirSync, writeFileSync } from "node:fs";
import { basename, join } from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { buildFigure } from "./figure.js";
import { renderSvg } from "./svg.js";
import { Trace, parseTrace } from "./trace.js";

export function loadSweepDir(dir: string): Trace[] {
  const names = readdirSync(dir)
    .filter((name) => name.endsWith(".csv") && name !== "summary.csv")
    .sort();
  return names.map((name) => {
    const text = readFileSync(join(dir, name), "utf8");
    try {
      return parseTrace(text, basename(name, ".csv"));
    } catch (err) {
      throw new Error(`${name}: ${(err as Error).message}`);
    }
  });
}

export function main(argv: string[]): number {
  // fold "--guides -1,-2" into "--guides=-1,-2" so negative slopes are not
  // mistaken for option flags
  const normalized: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--guides" && i + 1 < argv.length) {
      normalized.push(`--guides=${argv[i + 1]}`);
      i += 1;
    } else {
      normalized.push(argv[i]);
    }
  }
  const args = yargs(normalized)
    .usage("plots <sweep_dir> --out <fig.svg> [--guides -1,-2]")
    .command("$0 <sweep_dir>", "render a sweep directory to a log-log SVG figure")
    .positional("sweep_dir", { type: "string", demandOption: true })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .option("guides", {
      type: "string",
      default: "",
      describe: "comma-separated reference slopes, e.g. -1,-2",
    })
    .strict()
    .exitProcess(false)
    .parseSync();

  const guideSlopes = args.guides
    .split(",")
    .map((tok: string) => tok.trim())
    .filter((tok: string) => tok.length > 0)
    .map((tok: string) => {
      const value = Number(tok);
      if (Number.isNaN(value)) throw new Error(`bad guide slope "${tok}"`);
      return value;
    });

  const traces = loadSweepDir(args.sweep_dir as string);
  const spec = buildFigure(traces, guideSlopes);
  const dropped = spec.series.reduce((n, s) => n + s.droppedNonPositive, 0);
  writeFileSync(args.out, renderSvg(spec));
  console.log(
    `wrote ${args.out}: ${spec.series.length} curves, ` +
      `${dropped} non-positive rows dropped`
  );
  return 0;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("cli.ts")) {
  try {
    process.exitCode = main(hideBin(process.argv));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    process.exitCode = 1;
  }
}
