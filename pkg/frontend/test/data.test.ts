import { mkdtempSync, writeFileSync, mkdirSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import {
  DataError,
  TIMESERIES_HEADER,
  column,
  discoverRuns,
  nearestSnapshot,
  parseCsv,
  readEvents,
  snapshotFiles,
} from "../src/data.js";
import { makeSweepFixture } from "./fixtures.js";

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "plots-"));
}

describe("parseCsv", () => {
  it("parses a valid file and extracts columns", () => {
    const dir = tmp();
    const path = join(dir, "spectrum_t0.csv");
    writeFileSync(path, "k,mass\n-1,0.5\n0,1.25\n");
    const t = parseCsv(path, "k,mass");
    expect(column(t, "k")).toEqual([-1, 0]);
    expect(column(t, "mass")).toEqual([0.5, 1.25]);
  });

  it("accepts an empty body under a valid header", () => {
    const dir = tmp();
    const path = join(dir, "empty.csv");
    writeFileSync(path, TIMESERIES_HEADER + "\n");
    expect(parseCsv(path, TIMESERIES_HEADER).rows).toEqual([]);
  });

  it("names the file on a wrong header", () => {
    const dir = tmp();
    const path = join(dir, "bad.csv");
    writeFileSync(path, "a,b\n1,2\n");
    expect(() => parseCsv(path, "k,mass")).toThrowError(/bad\.csv/);
  });

  it("rejects ragged and non-numeric rows", () => {
    const dir = tmp();
    const ragged = join(dir, "ragged.csv");
    writeFileSync(ragged, "k,mass\n1\n");
    expect(() => parseCsv(ragged, "k,mass")).toThrowError(DataError);
    const alpha = join(dir, "alpha.csv");
    writeFileSync(alpha, "k,mass\n1,x\n");
    expect(() => parseCsv(alpha, "k,mass")).toThrowError(/non-numeric/);
  });

  it("names a missing file", () => {
    expect(() => parseCsv("/nope/missing.csv", "k,mass")).toThrowError(/missing\.csv/);
  });
});

describe("readEvents", () => {
  it("reads the documented event fields", () => {
    const dir = tmp();
    makeSweepFixture(dir);
    const events = readEvents(join(dir, "N0016", "events.json"));
    expect(events).toHaveLength(1);
    expect(events[0].t_peak).toBeCloseTo(0.1355);
  });

  it("rejects malformed events", () => {
    const dir = tmp();
    const path = join(dir, "events.json");
    writeFileSync(path, JSON.stringify([{ t_peak: 1 }]));
    expect(() => readEvents(path)).toThrowError(/missing field/);
  });
});

describe("discoverRuns", () => {
  it("finds sweep children sorted by resolution", () => {
    const dir = tmp();
    makeSweepFixture(dir);
    const runs = discoverRuns(dir);
    expect(runs.map((r) => r.N)).toEqual([16, 32]);
    expect(runs[0].label).toBe("N=16");
  });

  it("falls back to a single run directory", () => {
    const dir = tmp();
    makeSweepFixture(dir);
    const runs = discoverRuns(join(dir, "N0032"));
    expect(runs).toHaveLength(1);
    expect(runs[0].N).toBe(32);
  });

  it("names an unusable directory", () => {
    const dir = tmp();
    mkdirSync(join(dir, "stuff"));
    expect(() => discoverRuns(dir)).toThrowError(DataError);
  });
});

describe("snapshots", () => {
  it("keys files by time tag and finds the nearest", () => {
    const dir = tmp();
    makeSweepFixture(dir);
    const files = snapshotFiles(join(dir, "N0016"), "spectrum");
    expect([...files.keys()].sort((a, b) => a - b)).toEqual([0, 0.1355, 0.25]);
    expect(nearestSnapshot(files, 0.135)).toMatch(/spectrum_t0\.1355\.csv$/);
    expect(nearestSnapshot(files, 0.5)).toBeUndefined();
  });
});
