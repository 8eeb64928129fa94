#!/usr/bin/env python3
"""Step-size profile of one run: how the adaptive controller traverses the
singularity. Prints dt at probe times plus the dip minimum and step counts.

    python scripts/profile_stepper.py --N 128 --t-end 0.3
"""

import argparse
import sys
import tempfile
import time

import numpy as np

from nls_tmodel.experiment import COL, SolverConfig, load_timeseries, run


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=128)
    ap.add_argument("--A", type=float, default=1.80)
    ap.add_argument("--solver", choices=["galerkin", "tmodel"], default="tmodel")
    ap.add_argument("--t-end", type=float, default=0.3, dest="t_end")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    out = args.out or tempfile.mkdtemp(prefix="stepper_")
    cfg = SolverConfig(solver_kind=args.solver, A=args.A, N=args.N, t_end=args.t_end,
                       record_cadence=1e-4, snapshot_times=(), out_dir=out)
    t0 = time.time()
    manifest = run(cfg, quiet=False)
    data = load_timeseries(f"{out}/timeseries.csv")
    t, dt = data[1:, COL["time"]], data[1:, COL["dt"]]
    rate = data[1:, COL["dissipation_rate"]]

    print(f"\n{args.solver} N={args.N} to t={args.t_end}: "
          f"{manifest.notes['accepted_steps']} steps in {time.time() - t0:.0f}s")
    for frac in (0.1, 0.3, 0.5, 0.7, 0.9):
        i = np.argmin(np.abs(t - frac * args.t_end))
        print(f"  dt(t={t[i]:.4f}) = {dt[i]:.2e}")
    imin = int(np.argmin(dt))
    print(f"  dip: dt={dt[imin]:.2e} at t={t[imin]:.5f}")
    if np.any(rate < 0):
        ipk = int(np.argmax(np.abs(rate)))
        print(f"  peak drain {rate[ipk]:.3e} at t={t[ipk]:.5f}")
    print(f"  artifacts in {out}")
    return 0 if manifest.status == "completed" else 1


if __name__ == "__main__":
    sys.exit(main())
