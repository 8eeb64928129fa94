/**
 * Minimal deterministic SVG chart writer: linear/log axes, polylines,
 * scatter markers, a legend and reference lines. No DOM, no randomness;
 * identical inputs yield byte-identical files.
 */

export type Scale = "linear" | "log";

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color?: string;
  marker?: boolean; // scatter points instead of a line
  dashed?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xScale?: Scale;
  yScale?: Scale;
  series: Series[];
  vlines?: { x: number; label?: string }[];
  annotations?: string[]; // free-text lines drawn under the title
  width?: number;
  height?: number;
}

// fixed palette keyed by series order (resolution order in the callers)
export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];

const MARGIN = { top: 48, right: 20, bottom: 46, left: 64 };

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1).replace("e+", "e");
  return Number(v.toPrecision(4)).toString();
}

function niceTicks(lo: number, hi: number, n = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / Math.max(n - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => span / s <= n) ?? 10 * mag;
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let d = Math.ceil(Math.log10(lo)); Math.pow(10, d) <= hi * (1 + 1e-12); d++) {
    ticks.push(Math.pow(10, d));
  }
  return ticks.length ? ticks : [lo];
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Deterministic thinning: keep every k-th point so a series stays <= cap. */
export function thin(xs: number[], cap = 2000): number[] {
  if (xs.length <= cap) return xs.map((_, i) => i);
  const stride = Math.ceil(xs.length / cap);
  const idx: number[] = [];
  for (let i = 0; i < xs.length; i += stride) idx.push(i);
  if (idx[idx.length - 1] !== xs.length - 1) idx.push(xs.length - 1);
  return idx;
}

export function renderChart(spec: ChartSpec): string {
  const W = spec.width ?? 760;
  const H = spec.height ?? 480;
  const xScale = spec.xScale ?? "linear";
  const yScale = spec.yScale ?? "linear";
  const plotW = W - MARGIN.left - MARGIN.right;
  const plotH = H - MARGIN.top - MARGIN.bottom;

  const finite = (v: number) => Number.isFinite(v) && (yScale !== "log" || v > 0);
  const xs: number[] = [];
  const ys: number[] = [];
  for (const s of spec.series) {
    for (let i = 0; i < s.x.length; i++) {
      if (Number.isFinite(s.x[i]) && finite(s.y[i])) {
        xs.push(s.x[i]);
        ys.push(s.y[i]);
      }
    }
  }
  for (const v of spec.vlines ?? []) xs.push(v.x);

  const empty = xs.length === 0;
  let xLo = empty ? 0 : Math.min(...xs);
  let xHi = empty ? 1 : Math.max(...xs);
  let yLo = empty ? (yScale === "log" ? 0.1 : 0) : Math.min(...ys);
  let yHi = empty ? 1 : Math.max(...ys);
  if (xHi === xLo) [xLo, xHi] = [xLo - 0.5, xHi + 0.5];
  if (yHi === yLo) [yLo, yHi] = yScale === "log" ? [yLo / 2, yHi * 2] : [yLo - 0.5, yHi + 0.5];
  if (yScale === "linear") {
    const pad = 0.05 * (yHi - yLo);
    yLo -= pad;
    yHi += pad;
  }

  const px = (x: number) =>
    MARGIN.left +
    (xScale === "log"
      ? ((Math.log10(x) - Math.log10(xLo)) / (Math.log10(xHi) - Math.log10(xLo))) * plotW
      : ((x - xLo) / (xHi - xLo)) * plotW);
  const py = (y: number) =>
    MARGIN.top +
    plotH -
    (yScale === "log"
      ? ((Math.log10(y) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))) * plotH
      : ((y - yLo) / (yHi - yLo)) * plotH);

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" font-family="Helvetica,Arial,sans-serif">`,
  );
  out.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  out.push(`<text x="${W / 2}" y="22" text-anchor="middle" font-size="15">${esc(spec.title)}</text>`);
  (spec.annotations ?? []).forEach((a, i) => {
    out.push(`<text x="${W / 2}" y="${38 + 13 * i}" text-anchor="middle" font-size="11" fill="#444">${esc(a)}</text>`);
  });

  // frame
  out.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#222" stroke-width="1"/>`,
  );

  // ticks
  const xt = xScale === "log" ? logTicks(xLo, xHi) : niceTicks(xLo, xHi, 7);
  for (const v of xt) {
    const X = px(v);
    if (X < MARGIN.left - 0.5 || X > W - MARGIN.right + 0.5) continue;
    out.push(`<line x1="${X.toFixed(2)}" y1="${MARGIN.top + plotH}" x2="${X.toFixed(2)}" y2="${MARGIN.top + plotH + 5}" stroke="#222"/>`);
    out.push(`<text x="${X.toFixed(2)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-size="11">${fmt(v)}</text>`);
  }
  const yt = yScale === "log" ? logTicks(yLo, yHi) : niceTicks(yLo, yHi, 6);
  for (const v of yt) {
    const Y = py(v);
    if (Y < MARGIN.top - 0.5 || Y > MARGIN.top + plotH + 0.5) continue;
    out.push(`<line x1="${MARGIN.left - 5}" y1="${Y.toFixed(2)}" x2="${MARGIN.left}" y2="${Y.toFixed(2)}" stroke="#222"/>`);
    out.push(`<text x="${MARGIN.left - 8}" y="${(Y + 4).toFixed(2)}" text-anchor="end" font-size="11">${fmt(v)}</text>`);
    out.push(`<line x1="${MARGIN.left}" y1="${Y.toFixed(2)}" x2="${MARGIN.left + plotW}" y2="${Y.toFixed(2)}" stroke="#eee"/>`);
  }
  out.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${H - 10}" text-anchor="middle" font-size="12">${esc(spec.xLabel)}</text>`,
  );
  out.push(
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${esc(spec.yLabel)}</text>`,
  );

  // reference lines
  for (const v of spec.vlines ?? []) {
    const X = px(v.x);
    out.push(
      `<line x1="${X.toFixed(2)}" y1="${MARGIN.top}" x2="${X.toFixed(2)}" y2="${MARGIN.top + plotH}" stroke="#555" stroke-dasharray="5,4"/>`,
    );
    if (v.label) {
      out.push(
        `<text x="${(X + 4).toFixed(2)}" y="${MARGIN.top + 14}" font-size="11" fill="#555">${esc(v.label)}</text>`,
      );
    }
  }

  // series
  spec.series.forEach((s, si) => {
    const color = s.color ?? PALETTE[si % PALETTE.length];
    const keep: number[] = [];
    for (let i = 0; i < s.x.length; i++) if (Number.isFinite(s.x[i]) && finite(s.y[i])) keep.push(i);
    const idx = thin(keep).map((j) => keep[j]);
    if (s.marker) {
      for (const i of idx) {
        out.push(`<circle cx="${px(s.x[i]).toFixed(2)}" cy="${py(s.y[i]).toFixed(2)}" r="3.5" fill="${color}"/>`);
      }
    } else if (idx.length > 0) {
      const pts = idx.map((i) => `${px(s.x[i]).toFixed(2)},${py(s.y[i]).toFixed(2)}`).join(" ");
      const dash = s.dashed ? ` stroke-dasharray="6,4"` : "";
      out.push(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.5"${dash}/>`);
    }
  });

  // legend
  const entries = spec.series.filter((s) => s.label);
  entries.forEach((s, i) => {
    const color = s.color ?? PALETTE[spec.series.indexOf(s) % PALETTE.length];
    const Y = MARGIN.top + 12 + 16 * i;
    const X = W - MARGIN.right - 120;
    if (s.marker) {
      out.push(`<circle cx="${X + 12}" cy="${Y - 4}" r="3.5" fill="${color}"/>`);
    } else {
      out.push(`<line x1="${X}" y1="${Y - 4}" x2="${X + 24}" y2="${Y - 4}" stroke="${color}" stroke-width="2"/>`);
    }
    out.push(`<text x="${X + 30}" y="${Y}" font-size="11">${esc(s.label)}</text>`);
  });

  out.push("</svg>");
  return out.join("\n") + "\n";
}
