import { mkdtempSync, readFileSync, writeFileSync, existsSync, mkdirSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { main, parseArgs } from "../src/cli.js";
import { TIMESERIES_HEADER } from "../src/data.js";
import { FIGURE_IDS, REFERENCE_BLOWUP_T, linearFit, renderFigure } from "../src/figures.js";
import { renderChart, thin } from "../src/svg.js";
import { makeSweepFixture } from "./fixtures.js";

function sweepDir(): string {
  const dir = mkdtempSync(join(tmpdir(), "plots-"));
  makeSweepFixture(dir);
  return dir;
}

describe("renderChart", () => {
  it("is deterministic", () => {
    const spec = {
      title: "t",
      xLabel: "x",
      yLabel: "y",
      series: [{ label: "a", x: [0, 1, 2], y: [1, 4, 9] }],
    };
    expect(renderChart(spec)).toBe(renderChart(spec));
  });

  it("renders empty axes for empty series", () => {
    const svg = renderChart({ title: "empty", xLabel: "x", yLabel: "y", series: [] });
    expect(svg).toContain("<svg");
    expect(svg).toContain("</svg>");
    expect(svg).not.toContain("<polyline");
  });

  it("drops nonpositive values on a log axis", () => {
    const svg = renderChart({
      title: "log",
      xLabel: "x",
      yLabel: "y",
      yScale: "log",
      series: [{ label: "a", x: [1, 2, 3], y: [0, 1e-3, 1e-2] }],
    });
    const pts = /points="([^"]*)"/.exec(svg)![1].trim().split(" ");
    expect(pts).toHaveLength(2);
  });

  it("thins long series deterministically", () => {
    const xs = Array.from({ length: 10000 }, (_, i) => i);
    const idx = thin(xs, 2000);
    expect(idx.length).toBeLessThanOrEqual(2001);
    expect(idx[0]).toBe(0);
    expect(idx[idx.length - 1]).toBe(9999);
  });
});

describe("linearFit", () => {
  it("recovers an exact line with unit correlation", () => {
    const { slope, intercept, corr } = linearFit([1, 2, 3, 4], [3, 5, 7, 9]);
    expect(slope).toBeCloseTo(2);
    expect(intercept).toBeCloseTo(1);
    expect(corr).toBeCloseTo(1);
  });
});

describe("figures from a sweep fixture", () => {
  it("renders every figure", () => {
    const dir = sweepDir();
    for (const id of FIGURE_IDS) {
      const { spec, svg } = renderFigure(id, dir);
      expect(svg).toContain("</svg>");
      expect(spec.inputs.length).toBeGreaterThan(0);
    }
  });

  it("overlays one curve per resolution with the reference line (figure 1)", () => {
    const { svg } = renderFigure(1, sweepDir());
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
    expect(svg).toContain(`T=${REFERENCE_BLOWUP_T}`);
    expect(svg).toContain("N=16");
    expect(svg).toContain("N=32");
  });

  it("puts the spectrum on a log axis (figure 5)", () => {
    const { svg } = renderFigure(5, sweepDir());
    expect(svg).toContain("1.0e-");
  });

  it("prints the tail-mass fit correlation (figure 7)", () => {
    const { svg } = renderFigure(7, sweepDir());
    expect(svg).toMatch(/correlation = [01]\.\d+/);
    expect((svg.match(/<circle/g) ?? []).length).toBeGreaterThanOrEqual(2);
  });

  it("is byte-deterministic end to end", () => {
    const dir = sweepDir();
    const a = renderFigure(3, dir).svg;
    const b = renderFigure(3, dir).svg;
    expect(a).toBe(b);
  });
});

describe("cli", () => {
  it("parses arguments and defaults", () => {
    const args = parseArgs(["--run-dir", "/x", "--figures", "1,7"]);
    expect(args.figures).toEqual([1, 7]);
    expect(args.out).toBe(join("/x", "figures"));
  });

  it("rejects unknown flags and figures", () => {
    expect(() => parseArgs(["--run-dir", "/x", "--bogus"])).toThrowError(/unknown argument/);
    expect(() => parseArgs(["--run-dir", "/x", "--figures", "9"])).toThrowError(/unknown figure/);
    expect(main(["--bogus"])).toBe(2);
  });

  it("writes requested figures and exits 0", () => {
    const dir = sweepDir();
    const out = join(dir, "figs");
    expect(main(["--run-dir", dir, "--figures", "1,5,7", "--out", out])).toBe(0);
    for (const id of [1, 5, 7]) expect(existsSync(join(out, `figure${id}.svg`))).toBe(true);
    expect(existsSync(join(out, "figure2.svg"))).toBe(false);
  });

  it("exits 1 naming the file on ill-formed input", () => {
    const dir = sweepDir();
    writeFileSync(join(dir, "N0016", "timeseries.csv"), "time,oops\n0,1\n");
    expect(main(["--run-dir", dir, "--out", join(dir, "figs")])).toBe(1);
  });

  it("renders empty axes from an empty-but-valid timeseries", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const run = join(dir, "N0008");
    mkdirSync(run, { recursive: true });
    writeFileSync(join(run, "timeseries.csv"), TIMESERIES_HEADER + "\n");
    const out = join(dir, "figs");
    expect(main(["--run-dir", dir, "--figures", "1", "--out", out])).toBe(0);
    const svg = readFileSync(join(out, "figure1.svg"), "utf8");
    expect(svg).toContain("</svg>");
    expect(svg).not.toContain("<polyline");
  });
});
