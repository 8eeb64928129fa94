"""Run orchestration: configuration, integration, persistence, sweeps.

A run writes, under its output directory:

    timeseries.csv     time, dt, mass_physical, mass_discrete,
                       hamiltonian_quadrature, hamiltonian_spectral,
                       gradient_l2, dissipation_rate, tail_mass
    spectrum_t<T>.csv  k, mass               (at each snapshot time)
    solution_t<T>.csv  x, abs_u              (4K-point physical grid)
    events.json        detected ejection events
    manifest.json      config echo, version, wall times, status, checksums

CSV bodies are deterministic for a fixed config (17 significant digits);
wall-clock times live only in the manifest.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .diagnostics import detect_ejection, measure, spectrum, tail_mass
from .integrator import StepControl, integrate
from .spectral import (
    TWO_PI,
    SpectralState,
    get_galerkin_evaluator,
    initial_condition,
    make_partition,
    to_physical,
)
from .tmodel import get_evaluator

TIMESERIES_HEADER = ("time,dt,mass_physical,mass_discrete,hamiltonian_quadrature,"
                     "hamiltonian_spectral,gradient_l2,dissipation_rate,tail_mass")

SOLVER_KINDS = ("full_galerkin", "t_model")
_SOLVER_ALIASES = {"galerkin": "full_galerkin", "full_galerkin": "full_galerkin",
                   "tmodel": "t_model", "t_model": "t_model"}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class SolverConfig:
    """One run of either solver, with step control and diagnostics options."""

    solver_kind: str = "t_model"
    A: float = 1.80
    N: int = 64
    ratio: int = 5
    t_end: float = 0.75
    tolerance: float = 1e-10
    record_cadence: float = 1e-4
    dt_init: float = 1e-6
    dt_min: float = 1e-9
    dt_max: float = 1e-3
    safety: float = 0.9
    max_steps: int = 5_000_000
    propagate_order: int = 5
    error_norm: str = "mixed"
    snapshot_times: tuple[float, ...] = (0.1355, 0.75)
    tail_k_min: int = 25
    tail_signed: bool = False
    window_lo: float = math.pi - 0.05
    window_hi: float = math.pi + 0.05
    threshold_ratio: float = 100.0
    post_window_start: float = 0.3
    out_dir: str = "runs/run"
    label: str = ""

    def validated(self) -> "SolverConfig":
        kind = _SOLVER_ALIASES.get(self.solver_kind)
        if kind is None:
            raise ConfigError(f"solver_kind: unknown solver {self.solver_kind!r} (use galerkin or tmodel)")
        for key in ("A", "t_end", "tolerance", "record_cadence", "dt_init",
                    "dt_min", "dt_max", "safety", "threshold_ratio"):
            if not (float(getattr(self, key)) > 0):
                raise ConfigError(f"{key}: must be positive, got {getattr(self, key)}")
        if self.N < 4 or self.N % 2:
            raise ConfigError(f"N: must be an even integer >= 4, got {self.N}")
        if self.ratio < 5:
            raise ConfigError(f"ratio: must be >= 5, got {self.ratio}")
        if not (0 <= self.window_lo < self.window_hi <= TWO_PI):
            raise ConfigError(f"window_lo/window_hi: need 0 <= lo < hi <= 2*pi, got [{self.window_lo}, {self.window_hi}]")
        if self.tail_k_min < 0:
            raise ConfigError(f"tail_k_min: must be nonnegative, got {self.tail_k_min}")
        return replace(self, solver_kind=kind)

    def step_control(self) -> StepControl:
        return StepControl(tolerance=self.tolerance, dt_init=self.dt_init,
                           dt_min=self.dt_min, dt_max=self.dt_max, safety=self.safety,
                           max_steps=self.max_steps, propagate_order=self.propagate_order,
                           error_norm=self.error_norm)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["snapshot_times"] = list(self.snapshot_times)
        return d


_CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(SolverConfig)}
_CONFIG_KEY_ALIASES = {"solver": "solver_kind", "out": "out_dir"}


def config_from_mapping(mapping: dict, base: SolverConfig | None = None) -> SolverConfig:
    """Build a config from flat key/value pairs, rejecting unknown keys."""
    cfg = base or SolverConfig()
    updates = {}
    for raw_key, value in mapping.items():
        key = _CONFIG_KEY_ALIASES.get(raw_key, raw_key)
        if key == "N_list":
            continue  # sweep-only key, consumed by the CLI
        f = _CONFIG_FIELDS.get(key)
        if f is None:
            raise ConfigError(f"{raw_key}: unknown config key")
        try:
            if key == "snapshot_times":
                value = tuple(float(v) for v in value)
            elif f.type in ("int", int):
                if isinstance(value, float) and value != int(value):
                    raise ValueError
                value = int(value)
            elif f.type in ("float", float):
                value = float(value)
            elif f.type in ("bool", bool):
                if not isinstance(value, bool):
                    raise ValueError
            else:
                value = str(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{raw_key}: cannot interpret {value!r}") from exc
        updates[key] = value
    return replace(cfg, **updates).validated()


@dataclass
class RunManifest:
    """Provenance and integrity record for one run's outputs."""

    config: dict
    version: str
    started: str
    finished: str = ""
    status: str = "running"
    failure_reason: str | None = None
    files: dict[str, str] = field(default_factory=dict)  # relative path -> sha256
    notes: dict = field(default_factory=dict)

    def write(self, out_dir: str):
        with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
            json.dump(dataclasses.asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _time_tag(t: float) -> str:
    return f"{t:g}"


def _write_spectrum(path: str, state: SpectralState):
    with open(path, "w") as fh:
        fh.write("k,mass\n")
        for k, m in spectrum(state).items():
            fh.write(f"{k},{_fmt(m)}\n")


def _write_solution(path: str, state: SpectralState, grid_size: int):
    f = to_physical(state, grid_size)
    absu = np.abs(f.samples)
    with open(path, "w") as fh:
        fh.write("x,abs_u\n")
        for x, a in zip(f.x, absu):
            fh.write(f"{_fmt(x)},{_fmt(a)}\n")


def run(config: SolverConfig, quiet: bool = True) -> RunManifest:
    """Execute one configured run and persist every output file."""
    config = config.validated()
    out = config.out_dir
    os.makedirs(out, exist_ok=True)

    manifest = RunManifest(config=config.as_dict(), version=__version__,
                           started=_time.strftime("%Y-%m-%dT%H:%M:%S%z"))

    partition = make_partition(config.N, config.ratio)
    ic = initial_condition(config.A, partition)
    gaussian_line_mass = config.A**2 * math.sqrt(math.pi / 2.0)
    ic_mass = TWO_PI * float(np.sum(np.abs(ic.u) ** 2))
    manifest.notes["ic_mass_physical"] = ic_mass
    manifest.notes["ic_gaussian_line_mass"] = gaussian_line_mass
    manifest.notes["ic_truncation_defect"] = gaussian_line_mass - ic_mass

    if config.solver_kind == "t_model":
        state0 = ic.restrict(partition.F)
        evaluator = get_evaluator(partition)
        rhs = evaluator
    else:
        state0 = ic
        evaluator = None
        rhs = get_galerkin_evaluator(partition)

    snapshot_times = tuple(sorted({t for t in config.snapshot_times if 0.0 < t < config.t_end}))

    rows: list[tuple[float, float, float]] = []  # (t, dissipation_rate, mass_physical)
    ts_path = os.path.join(out, "timeseries.csv")

    with open(ts_path, "w") as ts:
        ts.write(TIMESERIES_HEADER + "\n")

        def observe(state: SpectralState, dt_now: float):
            breakdown = evaluator.breakdown(state.u, state.time) if evaluator is not None else None
            rec = measure(state, breakdown, dt_current=dt_now,
                          tail_k_min=config.tail_k_min, tail_signed=config.tail_signed)
            ts.write(",".join(_fmt(v) for v in (
                rec.time, rec.dt_current, rec.mass_physical, rec.mass_discrete,
                rec.hamiltonian_quadrature, rec.hamiltonian_spectral_as_written,
                rec.gradient_l2, rec.dissipation_rate, rec.tail_mass_25)) + "\n")
            ts.flush()  # rows land whole even if the process dies mid-run
            rows.append((rec.time, rec.dissipation_rate, rec.mass_physical))

        traj = integrate(state0, rhs, config.t_end, config.step_control(),
                         config.record_cadence, hit_times=snapshot_times,
                         observer=observe, store_all=False)

    if not quiet:
        print(f"[{config.label or 'run'}] N={config.N} {config.solver_kind}: "
              f"{traj.accepted_steps} steps (+{traj.rejected_steps} rejected), "
              f"{'FAILED: ' + str(traj.failure_reason) if traj.failed else 'ok'}")

    grid = 4 * partition.K
    for st in traj.states:
        tag = _time_tag(st.time)
        _write_spectrum(os.path.join(out, f"spectrum_t{tag}.csv"), st)
        _write_solution(os.path.join(out, f"solution_t{tag}.csv"), st, grid)

    events = detect_ejection(np.array(rows), threshold_ratio=config.threshold_ratio)
    with open(os.path.join(out, "events.json"), "w") as fh:
        json.dump([dataclasses.asdict(e) for e in events], fh, indent=2)
        fh.write("\n")

    manifest.status = "failed" if traj.failed else "completed"
    manifest.failure_reason = traj.failure_reason
    manifest.notes["accepted_steps"] = traj.accepted_steps
    manifest.notes["rejected_steps"] = traj.rejected_steps
    manifest.notes["rhs_eval_count"] = traj.rhs_eval_count
    manifest.notes["events"] = len(events)
    manifest.finished = _time.strftime("%Y-%m-%dT%H:%M:%S%z")
    for name in sorted(os.listdir(out)):
        if name != "manifest.json":
            manifest.files[name] = _sha256(os.path.join(out, name))
    manifest.write(out)
    return manifest


def load_timeseries(path: str) -> np.ndarray:
    """Timeseries rows as a float array in header order; validates the schema."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != TIMESERIES_HEADER:
            raise ValueError(f"{path}: unexpected timeseries header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != 9:
        raise ValueError(f"{path}: expected 9 columns, found {data.shape[1]}")
    return data


COL = {name: i for i, name in enumerate(TIMESERIES_HEADER.split(","))}


def _run_for_sweep(config: SolverConfig) -> RunManifest:
    return run(config, quiet=False)


def _nearest_row(data: np.ndarray, t: float) -> np.ndarray:
    return data[int(np.argmin(np.abs(data[:, COL["time"]] - t)))]


def summarize_run(out_dir: str, config: SolverConfig) -> dict:
    """Cross-resolution quantities of one finished run, read from its files."""
    data = load_timeseries(os.path.join(out_dir, "timeseries.csv"))
    with open(os.path.join(out_dir, "events.json")) as fh:
        events = json.load(fh)

    t = data[:, COL["time"]]
    post = data[(t >= config.post_window_start) & (t <= config.t_end)]
    pre_end = events[0]["window"][0] if events else config.post_window_start
    pre = data[t <= 0.75 * pre_end]

    summary = {
        "N": config.N,
        "out_dir": out_dir,
        "events": len(events),
        "t_peak": events[0]["t_peak"] if events else None,
        "mass_after": (events[0]["mass_after"] if events
                       else float(np.mean(post[:, COL["mass_physical"]])) if post.size else None),
        "ejected": events[0]["ejected"] if events else None,
        "peak_gradient": float(np.max(data[:, COL["gradient_l2"]])),
        "grad_post_mean": float(np.mean(post[:, COL["gradient_l2"]])) if post.size else None,
        "grad_post_relstd": (float(np.std(post[:, COL["gradient_l2"]]) / np.mean(post[:, COL["gradient_l2"]]))
                             if post.size else None),
        "hamiltonian_pre_mean": float(np.mean(pre[:, COL["hamiltonian_quadrature"]])) if pre.size else None,
        "hamiltonian_post_mean": float(np.mean(post[:, COL["hamiltonian_quadrature"]])) if post.size else None,
    }
    if summary["hamiltonian_pre_mean"] is not None and summary["hamiltonian_post_mean"] is not None:
        summary["hamiltonian_jump"] = abs(summary["hamiltonian_post_mean"] - summary["hamiltonian_pre_mean"])
    else:
        summary["hamiltonian_jump"] = None
    for snap in config.snapshot_times:
        if 0 < snap <= config.t_end:
            row = _nearest_row(data, snap)
            summary[f"tail_mass_t{_time_tag(snap)}"] = float(row[COL["tail_mass"]])
    return summary


def _linear_fit(x: np.ndarray, y: np.ndarray) -> dict:
    slope, intercept = np.polyfit(x, y, 1)
    corr = float(np.corrcoef(x, y)[0, 1])
    return {"slope": float(slope), "intercept": float(intercept), "correlation": corr}


def sweep(base_config: SolverConfig, N_list: list[int], workers: int | None = None,
          quiet: bool = True) -> dict:
    """Run every resolution in N_list and assemble the cross-resolution tables.

    Runs are independent and execute in a small process pool. The summary
    (also written as sweep.csv / sweep.json under the base output directory)
    carries per-N measurements, tail-mass linear fits at each snapshot time,
    and the monotonicity-trend verdicts.
    """
    if not N_list:
        raise ConfigError("N_list: must not be empty")
    base_config = base_config.validated()
    root = base_config.out_dir
    os.makedirs(root, exist_ok=True)

    configs = [replace(base_config, N=n, out_dir=os.path.join(root, f"N{n:04d}"),
                       label=f"N{n:04d}") for n in N_list]
    max_workers = workers or min(len(configs), os.cpu_count() or 1)
    if max_workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            manifests = list(pool.map(_run_for_sweep, configs))
    else:
        manifests = [run(c, quiet=quiet) for c in configs]

    summaries = [summarize_run(c.out_dir, c) for c in configs]
    result = {
        "base_config": base_config.as_dict(),
        "N_list": list(N_list),
        "runs": summaries,
        "partial": any(m.status != "completed" for m in manifests),
        "fits": {},
        "trends": {},
    }

    Ns = np.array([s["N"] for s in summaries], dtype=float)
    if len(summaries) > 1:
        for snap in base_config.snapshot_times:
            key = f"tail_mass_t{_time_tag(snap)}"
            if all(key in s for s in summaries):
                tails = np.array([s[key] for s in summaries])
                result["fits"][key] = _linear_fit(Ns, tails)
                result["trends"][f"{key}_increasing"] = bool(np.all(np.diff(tails) > 0))

        def trend(key, direction):
            vals = [s[key] for s in summaries]
            if any(v is None for v in vals):
                return None
            d = np.diff(np.array(vals, dtype=float))
            return bool(np.all(d > 0)) if direction == "up" else bool(np.all(d < 0))

        result["trends"]["peak_gradient_increasing"] = trend("peak_gradient", "up")
        result["trends"]["grad_post_mean_increasing"] = trend("grad_post_mean", "up")
        result["trends"]["hamiltonian_jump_increasing"] = trend("hamiltonian_jump", "up")

        masses = [s["mass_after"] for s in summaries]
        if all(m is not None for m in masses) and len(masses) > 2:
            gaps = np.abs(np.diff(np.array(masses)))
            result["mass_after_gaps"] = gaps.tolist()
            result["trends"]["mass_after_converging"] = bool(np.all(np.diff(gaps) < 0))

    cols = ["N", "events", "t_peak", "mass_after", "ejected", "peak_gradient",
            "grad_post_mean", "grad_post_relstd", "hamiltonian_jump"]
    cols += [k for k in summaries[0] if k.startswith("tail_mass_t")]
    with open(os.path.join(root, "sweep.csv"), "w") as fh:
        fh.write(",".join(cols) + "\n")
        for s in summaries:
            fh.write(",".join("" if s.get(c) is None else
                              (str(s[c]) if isinstance(s[c], int) else _fmt(s[c]))
                              for c in cols) + "\n")
    with open(os.path.join(root, "sweep.json"), "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return result
