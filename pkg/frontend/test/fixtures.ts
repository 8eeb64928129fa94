import { mkdirSync, writeFileSync } from "fs";
import { join } from "path";

import { TIMESERIES_HEADER } from "../src/data.js";

/** Write a miniature two-resolution sweep with all documented artifacts. */
export function makeSweepFixture(root: string): void {
  for (const [n, scale] of [
    [16, 1],
    [32, 2],
  ] as const) {
    const dir = join(root, `N${String(n).padStart(4, "0")}`);
    mkdirSync(dir, { recursive: true });

    const ts: string[] = [TIMESERIES_HEADER];
    for (let i = 0; i <= 50; i++) {
      const t = 0.005 * i;
      const mass = t < 0.1355 ? 4.0 : 4.0 - 0.2 * scale;
      const grad = 1 + scale * t;
      ts.push(`${t},1e-05,${mass},${mass / (2 * Math.PI)},1.5,1.2,${grad},0,${1e-4 * scale}`);
    }
    writeFileSync(join(dir, "timeseries.csv"), ts.join("\n") + "\n");

    for (const tag of ["0", "0.1355", "0.25"]) {
      const spec: string[] = ["k,mass"];
      for (let k = -2 * n; k < 2 * n; k++) {
        spec.push(`${k},${(1e-3 * scale) / (1 + k * k)}`);
      }
      writeFileSync(join(dir, `spectrum_t${tag}.csv`), spec.join("\n") + "\n");

      const sol: string[] = ["x,abs_u"];
      for (let j = 0; j < 64; j++) {
        const x = (2 * Math.PI * j) / 64;
        sol.push(`${x},${Math.abs(Math.sin(x)) * scale}`);
      }
      writeFileSync(join(dir, `solution_t${tag}.csv`), sol.join("\n") + "\n");
    }

    writeFileSync(join(dir, "events.json"), JSON.stringify([{
      t_peak: 0.1355, peak_rate: -5.0 * scale, mass_before: 4.0,
      mass_after: 4.0 - 0.2 * scale, ejected: 0.2 * scale, window: [0.13, 0.14],
    }]) + "\n");
    writeFileSync(join(dir, "manifest.json"), JSON.stringify({ config: { N: n }, status: "completed" }) + "\n");
  }
}
