/**
 * Figure definitions over the solver's run artifacts.
 *
 * Figures 1-3 overlay a timeseries column across resolutions with the
 * reference blow-up instant marked; figure 4 shows the field magnitude of
 * the finest run at the available snapshot instants; figures 5-6 are
 * linear-log mass spectra across resolutions; figure 7 is the tail mass
 * against resolution with its least-squares line and correlation.
 */

import { join } from "path";

import {
  DataError,
  RunDir,
  Table,
  TIMESERIES_HEADER,
  column,
  discoverRuns,
  nearestSnapshot,
  parseCsv,
  snapshotFiles,
} from "./data.js";
import { ChartSpec, PALETTE, Series, renderChart } from "./svg.js";

export const REFERENCE_BLOWUP_T = 0.13504;
export const FIGURE_IDS = [1, 2, 3, 4, 5, 6, 7] as const;
export type FigureId = (typeof FIGURE_IDS)[number];

export interface FigureSpec {
  id: FigureId;
  inputs: string[]; // resolved file paths consumed
  chart: ChartSpec;
}

const TS_CACHE = new Map<string, Table>();

function timeseries(run: RunDir): Table {
  const path = join(run.dir, "timeseries.csv");
  let t = TS_CACHE.get(path);
  if (!t) {
    t = parseCsv(path, TIMESERIES_HEADER);
    TS_CACHE.set(path, t);
  }
  return t;
}

function timeseriesFigure(
  id: FigureId,
  runs: RunDir[],
  col: string,
  title: string,
  yLabel: string,
): FigureSpec {
  const series: Series[] = runs.map((r, i) => {
    const t = timeseries(r);
    return { label: r.label, x: column(t, "time"), y: column(t, col), color: PALETTE[i % PALETTE.length] };
  });
  return {
    id,
    inputs: runs.map((r) => join(r.dir, "timeseries.csv")),
    chart: {
      title,
      xLabel: "t",
      yLabel,
      series,
      vlines: [{ x: REFERENCE_BLOWUP_T, label: `T=${REFERENCE_BLOWUP_T}` }],
    },
  };
}

function solutionFigure(id: FigureId, runs: RunDir[]): FigureSpec {
  const finest = runs[runs.length - 1];
  const files = snapshotFiles(finest.dir, "solution");
  const inputs: string[] = [];
  const series: Series[] = [];
  let i = 0;
  for (const [t, path] of [...files.entries()].sort((a, b) => a[0] - b[0])) {
    const tab = parseCsv(path, "x,abs_u");
    inputs.push(path);
    series.push({
      label: `t=${t}`,
      x: column(tab, "x"),
      y: column(tab, "abs_u"),
      color: PALETTE[i++ % PALETTE.length],
    });
  }
  if (inputs.length === 0) throw new DataError(finest.dir, "no solution_t*.csv snapshots");
  return {
    id,
    inputs,
    chart: { title: `Solution magnitude (${finest.label})`, xLabel: "x", yLabel: "|u(x)|", series },
  };
}

function spectrumFigure(id: FigureId, runs: RunDir[], t: number): FigureSpec {
  const inputs: string[] = [];
  const series: Series[] = [];
  runs.forEach((r, i) => {
    const path = nearestSnapshot(snapshotFiles(r.dir, "spectrum"), t);
    if (!path) throw new DataError(r.dir, `no spectrum snapshot near t=${t}`);
    const tab = parseCsv(path, "k,mass");
    inputs.push(path);
    const k = column(tab, "k");
    const m = column(tab, "mass");
    const pos = k.map((kk, j) => [kk, m[j]] as const).filter(([kk]) => kk >= 0);
    series.push({
      label: r.label,
      x: pos.map(([kk]) => kk),
      y: pos.map(([, mm]) => mm),
      color: PALETTE[i % PALETTE.length],
    });
  });
  return {
    id,
    inputs,
    chart: {
      title: `Mass spectrum at t=${t}`,
      xLabel: "wavenumber k",
      yLabel: "|u_k|^2",
      yScale: "log",
      series,
    },
  };
}

function tailMassFigure(id: FigureId, runs: RunDir[], t: number, kMin = 25): FigureSpec {
  const inputs: string[] = [];
  const Ns: number[] = [];
  const tails: number[] = [];
  for (const r of runs) {
    const path = nearestSnapshot(snapshotFiles(r.dir, "spectrum"), t);
    if (!path) throw new DataError(r.dir, `no spectrum snapshot near t=${t}`);
    const tab = parseCsv(path, "k,mass");
    inputs.push(path);
    const k = column(tab, "k");
    const m = column(tab, "mass");
    let tail = 0;
    for (let j = 0; j < k.length; j++) if (Math.abs(k[j]) >= kMin) tail += m[j];
    Ns.push(r.N);
    tails.push(tail);
  }
  const series: Series[] = [{ label: "tail mass", x: Ns, y: tails, marker: true, color: PALETTE[0] }];
  const annotations: string[] = [];
  if (Ns.length >= 2) {
    const { slope, intercept, corr } = linearFit(Ns, tails);
    series.push({
      label: "linear fit",
      x: [Ns[0], Ns[Ns.length - 1]],
      y: [slope * Ns[0] + intercept, slope * Ns[Ns.length - 1] + intercept],
      color: PALETTE[1],
      dashed: true,
    });
    annotations.push(`correlation = ${corr.toFixed(4)}`);
  }
  return {
    id,
    inputs,
    chart: {
      title: `Mass in wavenumbers |k| >= ${kMin} at t=${t}`,
      xLabel: "resolution N",
      yLabel: "tail mass",
      series,
      annotations,
    },
  };
}

export function linearFit(x: number[], y: number[]): { slope: number; intercept: number; corr: number } {
  const n = x.length;
  const mx = x.reduce((a, b) => a + b, 0) / n;
  const my = y.reduce((a, b) => a + b, 0) / n;
  let sxy = 0;
  let sxx = 0;
  let syy = 0;
  for (let i = 0; i < n; i++) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) ** 2;
    syy += (y[i] - my) ** 2;
  }
  const slope = sxy / sxx;
  const corr = sxx > 0 && syy > 0 ? sxy / Math.sqrt(sxx * syy) : 0;
  return { slope, intercept: my - slope * mx, corr };
}

/** Pick the snapshot instants figures 5-7 use: prefer the canonical pair. */
function snapshotInstants(runs: RunDir[]): number[] {
  const have = [...snapshotFiles(runs[runs.length - 1].dir, "spectrum").keys()].sort((a, b) => a - b);
  const interior = have.filter((t) => t > 0);
  const prefer = [0.1355, 0.75].filter((t) => interior.some((h) => Math.abs(h - t) <= 5e-3));
  if (prefer.length) return prefer;
  return interior.slice(-2);
}

export function buildFigure(id: FigureId, root: string): FigureSpec {
  const runs = discoverRuns(root);
  const instants = snapshotInstants(runs);
  switch (id) {
    case 1:
      return timeseriesFigure(1, runs, "mass_physical", "Mass of resolved modes", "mass");
    case 2:
      return timeseriesFigure(2, runs, "gradient_l2", "Gradient l2 norm of resolved modes", "sum k^2 |u_k|^2");
    case 3:
      return timeseriesFigure(3, runs, "hamiltonian_quadrature", "Hamiltonian of resolved modes", "H");
    case 4:
      return solutionFigure(4, runs);
    case 5:
      return spectrumFigure(5, runs, instants[0]);
    case 6:
      return spectrumFigure(6, runs, instants[instants.length - 1]);
    case 7:
      return tailMassFigure(7, runs, instants[0]);
    default:
      throw new Error(`unknown figure id ${id}`);
  }
}

export function renderFigure(id: FigureId, root: string): { spec: FigureSpec; svg: string } {
  const spec = buildFigure(id, root);
  return { spec, svg: renderChart(spec.chart) };
}
