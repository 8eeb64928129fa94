"""Command-line entry point: run, sweep, ground-state and fit-blowup."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .diagnostics import GROUND_STATE_MASS_CLOSED_FORM, ground_state_reference, loglog_fit
from .experiment import COL, ConfigError, SolverConfig, config_from_mapping, load_timeseries, run, sweep


def _parse_set_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text  # bare string such as tmodel


def _load_config(args) -> tuple[SolverConfig, dict]:
    mapping = {}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                mapping.update(tomllib.load(fh))
        except FileNotFoundError:
            raise ConfigError(f"config: file not found: {args.config}")
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config: cannot parse {args.config}: {exc}")
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set: expected KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        mapping[key.strip()] = _parse_set_value(value.strip())
    if getattr(args, "solver", None):
        mapping["solver_kind"] = args.solver
    if getattr(args, "out", None):
        mapping["out_dir"] = args.out
    if getattr(args, "tail_signed", False):
        mapping["tail_signed"] = True
    return config_from_mapping(mapping), mapping


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="flat TOML config file")
    p.add_argument("--set", metavar="KEY=VALUE", action="append",
                   help="override one config key (repeatable)")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--solver", choices=["galerkin", "tmodel"], help="solver kind")
    p.add_argument("--tail-signed", action="store_true", dest="tail_signed",
                   help="count only k >= +k_min in the tail mass")
    p.add_argument("--quiet", action="store_true", help="suppress progress output")


def _cmd_run(args) -> int:
    config, _ = _load_config(args)
    manifest = run(config, quiet=args.quiet)
    if not args.quiet:
        print(f"status: {manifest.status}; outputs in {config.out_dir}")
    return 0 if manifest.status == "completed" else 1


def _cmd_sweep(args) -> int:
    config, mapping = _load_config(args)
    n_list = mapping.get("N_list")
    if args.N_list:
        n_list = [int(s) for s in args.N_list.split(",")]
    if not n_list:
        raise ConfigError("N_list: required for sweep (config key N_list or --N-list)")
    result = sweep(config, [int(n) for n in n_list], workers=args.workers, quiet=args.quiet)
    if not args.quiet:
        print(json.dumps({"trends": result["trends"], "fits": result["fits"],
                          "partial": result["partial"]}, indent=2, sort_keys=True))
    return 1 if result["partial"] else 0


def _cmd_ground_state(args) -> int:
    gs = ground_state_reference()
    xs = np.linspace(-5.0, 5.0, 81)
    res = float(np.abs(gs.residual(xs)).max())
    print(f"ground-state mass (quadrature):  {gs.mass:.10f}")
    print(f"closed form sqrt(3)*pi/2:        {GROUND_STATE_MASS_CLOSED_FORM:.10f}")
    print(f"reported literature value:       {gs.mass_reported:.4f}")
    print(f"relative discrepancy:            {abs(gs.mass_reported - gs.mass) / gs.mass:.4%}")
    print(f"profile equation residual (max): {res:.3e}")
    return 0


def _cmd_fit_blowup(args) -> int:
    data = load_timeseries(args.timeseries)
    t = data[:, COL["time"]]
    sel = (t >= args.t_min) & (t <= args.t_max)
    series = np.stack([t[sel], data[sel, COL["gradient_l2"]]], axis=1)
    fit = loglog_fit(series, args.T_lo, args.T_hi)
    print(json.dumps({
        "T_fit": fit.T_fit, "amplitude": fit.amplitude, "residual": fit.residual,
        "T_power": fit.T_power, "power_exponent": fit.power_exponent,
        "power_residual": fit.power_residual, "prefers_loglog": fit.prefers_loglog,
        "rows": int(sel.sum()),
    }, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nls-tmodel",
        description="Pseudospectral 1D critical NLS: full Galerkin and t-model runs, "
                    "resolution sweeps, and singularity diagnostics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one configuration and write its outputs")
    _add_config_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run several resolutions and compare them")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--N-list", dest="N_list", metavar="N1,N2,...",
                         help="comma-separated resolved-mode counts")
    p_sweep.add_argument("--workers", type=int, default=None, help="parallel run processes")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_gs = sub.add_parser("ground-state", help="print the ground-state reference values")
    p_gs.set_defaults(func=_cmd_ground_state)

    p_fit = sub.add_parser("fit-blowup", help="fit the blow-up time on an existing timeseries.csv")
    p_fit.add_argument("--timeseries", required=True, metavar="PATH")
    p_fit.add_argument("--t-min", dest="t_min", type=float, default=0.0)
    p_fit.add_argument("--t-max", dest="t_max", type=float, required=True,
                       help="use rows with t <= this (strictly pre-event)")
    p_fit.add_argument("--T-lo", dest="T_lo", type=float, required=True)
    p_fit.add_argument("--T-hi", dest="T_hi", type=float, required=True)
    p_fit.set_defaults(func=_cmd_fit_blowup)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
