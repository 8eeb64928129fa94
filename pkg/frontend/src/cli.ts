/**
 * Batch figure generator.
 *
 *   plots --run-dir DIR [--figures 1,2,5] [--out DIR]
 *
 * Reads only the documented run artifacts (timeseries.csv, spectrum_t*.csv,
 * solution_t*.csv) under --run-dir (a sweep directory with N* children or a
 * single run) and writes one SVG per requested figure. Missing or ill-formed
 * inputs exit nonzero naming the file.
 */

import { mkdirSync, writeFileSync } from "fs";
import { join } from "path";

import { DataError } from "./data.js";
import { FIGURE_IDS, FigureId, renderFigure } from "./figures.js";

interface Args {
  runDir: string;
  out: string;
  figures: FigureId[];
}

export function parseArgs(argv: string[]): Args {
  let runDir: string | undefined;
  let out: string | undefined;
  let figures: FigureId[] = [...FIGURE_IDS];
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new Error(`${a}: missing value`);
      return argv[++i];
    };
    if (a === "--run-dir") runDir = next();
    else if (a === "--out") out = next();
    else if (a === "--figures") {
      figures = next()
        .split(",")
        .map((s) => {
          const n = Number(s.trim());
          if (!FIGURE_IDS.includes(n as FigureId)) throw new Error(`--figures: unknown figure ${s}`);
          return n as FigureId;
        });
    } else if (a === "--help" || a === "-h") {
      console.log("usage: plots --run-dir DIR [--figures 1,2,5] [--out DIR]");
      process.exit(0);
    } else {
      throw new Error(`unknown argument ${a}`);
    }
  }
  if (!runDir) throw new Error("--run-dir is required");
  return { runDir, out: out ?? join(runDir, "figures"), figures };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 2;
  }
  try {
    mkdirSync(args.out, { recursive: true });
    for (const id of args.figures) {
      const { spec, svg } = renderFigure(id, args.runDir);
      const path = join(args.out, `figure${id}.svg`);
      writeFileSync(path, svg);
      console.log(`figure${id}.svg <- ${spec.inputs.length} input file(s)`);
    }
  } catch (e) {
    if (e instanceof DataError) {
      console.error(`error: ${e.message}`);
      return 1;
    }
    throw e;
  }
  return 0;
}
