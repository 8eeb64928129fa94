/**
 * Readers and schema validation for solver run artifacts.
 *
 * Every reader checks the documented header/shape and throws a DataError
 * naming the offending file, so the CLI can exit nonzero with a useful
 * message. An empty body under a valid header is legal (degenerate input).
 */

import { readFileSync, readdirSync, existsSync } from "fs";
import { join, basename } from "path";

export class DataError extends Error {
  constructor(public readonly file: string, detail: string) {
    super(`${file}: ${detail}`);
  }
}

export const TIMESERIES_HEADER =
  "time,dt,mass_physical,mass_discrete,hamiltonian_quadrature," +
  "hamiltonian_spectral,gradient_l2,dissipation_rate,tail_mass";

export const TIMESERIES_COLUMNS = TIMESERIES_HEADER.split(",");

export interface Table {
  columns: string[];
  rows: number[][];
}

export function parseCsv(path: string, expectedHeader: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new DataError(path, "missing or unreadable");
  }
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0 || lines[0].trim() !== expectedHeader) {
    throw new DataError(path, `expected header "${expectedHeader}"`);
  }
  const columns = expectedHeader.split(",");
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new DataError(path, `row ${i + 1} has ${parts.length} fields, expected ${columns.length}`);
    }
    const row = parts.map(Number);
    if (row.some((v) => Number.isNaN(v))) {
      throw new DataError(path, `row ${i + 1} contains a non-numeric field`);
    }
    rows.push(row);
  }
  return { columns, rows };
}

export function column(table: Table, name: string): number[] {
  const i = table.columns.indexOf(name);
  if (i < 0) throw new Error(`no column ${name}`);
  return table.rows.map((r) => r[i]);
}

export interface EjectionEvent {
  t_peak: number;
  peak_rate: number;
  mass_before: number;
  mass_after: number;
  ejected: number;
  window: [number, number];
}

export function readEvents(path: string): EjectionEvent[] {
  let parsed: unknown;
  try {
    parsed = JSON.parse(readFileSync(path, "utf8"));
  } catch {
    throw new DataError(path, "missing or not valid JSON");
  }
  if (!Array.isArray(parsed)) throw new DataError(path, "expected a JSON array");
  for (const e of parsed) {
    for (const key of ["t_peak", "peak_rate", "mass_before", "mass_after", "ejected", "window"]) {
      if (!(key in (e as object))) throw new DataError(path, `event missing field ${key}`);
    }
  }
  return parsed as EjectionEvent[];
}

/** One run directory: a label (resolution) plus its artifact paths. */
export interface RunDir {
  dir: string;
  label: string;
  N: number;
}

/**
 * A plot source is either a sweep directory (N**** children) or a single
 * run directory; both collapse to a list of runs sorted by resolution.
 */
export function discoverRuns(root: string): RunDir[] {
  if (!existsSync(root)) throw new DataError(root, "directory does not exist");
  const runs: RunDir[] = [];
  for (const name of readdirSync(root).sort()) {
    const m = /^N(\d+)$/.exec(name);
    if (m && existsSync(join(root, name, "timeseries.csv"))) {
      runs.push({ dir: join(root, name), label: `N=${Number(m[1])}`, N: Number(m[1]) });
    }
  }
  if (runs.length > 0) return runs;
  if (existsSync(join(root, "timeseries.csv"))) {
    let n = 0;
    const manifest = join(root, "manifest.json");
    if (existsSync(manifest)) {
      try {
        n = JSON.parse(readFileSync(manifest, "utf8")).config?.N ?? 0;
      } catch {
        /* label only */
      }
    }
    return [{ dir: root, label: n ? `N=${n}` : basename(root), N: n }];
  }
  throw new DataError(root, "contains neither N* run directories nor timeseries.csv");
}

/** Snapshot files like spectrum_t0.1355.csv, keyed by their time tag. */
export function snapshotFiles(dir: string, prefix: "spectrum" | "solution"): Map<number, string> {
  const out = new Map<number, string>();
  for (const name of readdirSync(dir).sort()) {
    const m = new RegExp(`^${prefix}_t(.+)\\.csv$`).exec(name);
    if (m) {
      const t = Number(m[1]);
      if (!Number.isNaN(t)) out.set(t, join(dir, name));
    }
  }
  return out;
}

export function nearestSnapshot(files: Map<number, string>, t: number, tol = 5e-3): string | undefined {
  let best: [number, string] | undefined;
  for (const [tt, path] of files) {
    const d = Math.abs(tt - t);
    if (d <= tol && (!best || d < Math.abs(best[0] - t))) best = [tt, path];
  }
  return best?.[1];
}
