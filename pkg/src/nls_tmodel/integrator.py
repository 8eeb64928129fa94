"""Adaptive Runge-Kutta-Fehlberg 4(5) time stepping for spectral coefficient ODEs.

Complex coefficient vectors are advanced with the classical six-stage Fehlberg
pair. The error estimate is the 4th/5th-order difference measured in a mixed
absolute/relative max norm, |e_k| / (1 + |u_k|), which stays meaningful across
the many orders of magnitude spanned by a spectrum. By default the 5th-order
result is propagated (local extrapolation); both choices are exposed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .spectral import SpectralState

# classical Fehlberg tableau
_C = np.array([0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2])
_A = [
    np.array([]),
    np.array([1 / 4]),
    np.array([3 / 32, 9 / 32]),
    np.array([1932 / 2197, -7200 / 2197, 7296 / 2197]),
    np.array([439 / 216, -8.0, 3680 / 513, -845 / 4104]),
    np.array([-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40]),
]
_B4 = np.array([25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0])
_B5 = np.array([16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55])

MAX_GROWTH = 5.0


@dataclass(frozen=True)
class StepControl:
    """Error-control settings for the embedded 4(5) pair."""

    tolerance: float = 1e-10
    dt_init: float = 1e-6
    dt_min: float = 1e-9
    dt_max: float = 1e-3
    safety: float = 0.9
    max_steps: int = 5_000_000
    propagate_order: int = 5
    error_norm: str = "mixed"  # "mixed": max |e_k|/(1+|u_k|); "absolute": max |e_k|

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError("require 0 < dt_min <= dt_init <= dt_max")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if not (0 < self.safety < 1):
            raise ValueError("safety factor must lie in (0, 1)")
        if self.propagate_order not in (4, 5):
            raise ValueError("propagate_order must be 4 or 5")
        if self.error_norm not in ("mixed", "absolute"):
            raise ValueError("error_norm must be 'mixed' or 'absolute'")


@dataclass
class TrajectoryRecord:
    """Snapshots and step bookkeeping from one integration."""

    times: list[float] = field(default_factory=list)
    states: list[SpectralState] = field(default_factory=list)
    dt_history: list[float] = field(default_factory=list)
    dt_at_record: list[float] = field(default_factory=list)
    rhs_eval_count: int = 0
    accepted_steps: int = 0
    rejected_steps: int = 0
    failed: bool = False
    failure_reason: str | None = None


def _stages(u: np.ndarray, t: float, dt: float, rhs) -> tuple[np.ndarray, np.ndarray, bool]:
    """Six Fehlberg stages; returns (4th-order result, 5th-order result, finite)."""
    with np.errstate(invalid="ignore", over="ignore"):  # NaN/Inf stages are detected, not fatal
        k = [rhs(u, t)]
        for i in range(1, 6):
            ui = u + dt * sum(a * ki for a, ki in zip(_A[i], k))
            k.append(rhs(ui, t + _C[i] * dt))
        incr4 = sum(b * ki for b, ki in zip(_B4, k) if b != 0.0)
        incr5 = sum(b * ki for b, ki in zip(_B5, k) if b != 0.0)
        u4 = u + dt * incr4
        u5 = u + dt * incr5
    ok = bool(np.all(np.isfinite(u4)) and np.all(np.isfinite(u5)))
    return u4, u5, ok


def _error_norm(e: np.ndarray, u: np.ndarray, kind: str) -> float:
    if kind == "absolute":
        return float(np.max(np.abs(e)))
    return float(np.max(np.abs(e) / (1.0 + np.abs(u))))


def _controller_dt(dt: float, err: float, control: StepControl) -> float:
    if err == 0.0:
        factor = MAX_GROWTH
    else:
        factor = min(MAX_GROWTH, control.safety * (control.tolerance / err) ** 0.2)
    return float(min(max(dt * factor, control.dt_min), control.dt_max))


def _attempt(u, t, dt, rhs, control):
    """One trial step on raw arrays: (u_new|None, err, accepted, dt_next, finite)."""
    u4, u5, ok = _stages(u, t, dt, rhs)
    if not ok:
        return None, np.inf, False, max(dt / 2, control.dt_min), False
    err = _error_norm(u5 - u4, u, control.error_norm)
    dt_next = _controller_dt(dt, err, control)
    if err <= control.tolerance:
        return (u5 if control.propagate_order == 5 else u4), err, True, dt_next, True
    return None, err, False, dt_next, True


def rkf45_step(state: SpectralState, rhs_function, dt: float, control: StepControl):
    """Attempt a single embedded step from the given state.

    rhs_function maps (coefficient array, time) to the derivative array.
    Returns (new_state, error_estimate, accepted, dt_next); a rejected step
    returns the input state unchanged.
    """
    if not (control.dt_min <= dt <= control.dt_max):
        raise ValueError(f"dt={dt} outside [{control.dt_min}, {control.dt_max}]")
    u_new, err, accepted, dt_next, _ = _attempt(state.u, state.time, dt, rhs_function, control)
    if accepted:
        return state.with_u(u_new, time=state.time + dt), err, True, dt_next
    return state, err, False, dt_next


def integrate(
    initial: SpectralState,
    rhs_function,
    t_end: float,
    control: StepControl,
    record_cadence: float,
    hit_times: tuple[float, ...] = (),
    observer=None,
    store_all: bool = True,
) -> TrajectoryRecord:
    """Advance the state to exactly t_end with adaptive steps.

    Snapshots are recorded on the first accepted step past each multiple of
    record_cadence, plus the initial and final states. Steps are shortened to
    land exactly on each time in hit_times (and on t_end); cadence recording
    never alters the step sequence. On stall or step-budget exhaustion the
    partial trajectory is returned with the failed flag set.

    An observer callable receives (state, dt) at every recording instant;
    with store_all=False the returned record keeps states only at hit_times
    and the endpoints, which bounds memory on long runs.
    """
    if t_end <= initial.time:
        raise ValueError("t_end must exceed the initial time")

    rec = TrajectoryRecord()
    u = initial.u.copy()
    t = float(initial.time)
    dt = control.dt_init

    targets = sorted({float(h) for h in hit_times if initial.time < h < t_end} | {float(t_end)})
    next_target = 0
    keep_times = set(targets) | {float(initial.time)}

    last_observed = [None]

    def record(dt_now: float, force: bool = False):
        st = SpectralState(k=initial.k, u=u.copy(), time=t)
        if observer is not None and t != last_observed[0]:
            observer(st, dt_now)
        last_observed[0] = t
        if (store_all or force or t in keep_times) and (not rec.times or rec.times[-1] != t):
            rec.times.append(t)
            rec.states.append(st)
            rec.dt_at_record.append(dt_now)

    record(0.0)
    next_record = record_cadence

    steps = 0
    while t < t_end:
        if steps >= control.max_steps:
            rec.failed = True
            rec.failure_reason = f"max_steps={control.max_steps} exhausted at t={t:.6g}"
            break
        steps += 1

        target = targets[next_target]
        clipped = dt > target - t
        dt_try = min(dt, target - t)

        u_new, err, accepted, dt_next, finite = _attempt(u, t, dt_try, rhs_function, control)
        rec.rhs_eval_count += 6

        if accepted:
            t = target if clipped else t + dt_try
            u = u_new
            rec.accepted_steps += 1
            rec.dt_history.append(dt_try)
            dt = dt_next
            landed = t >= target
            while next_target < len(targets) and t >= targets[next_target]:
                next_target += 1
            if t >= next_record or landed:
                record(dt_try)
                while next_record <= t:
                    next_record += record_cadence
        else:
            rec.rejected_steps += 1
            # a clipped trial shorter than dt_min is a landing artifact, not a stall
            if dt_try <= control.dt_min and not clipped:
                rec.failed = True
                reason = "non-finite stage values" if not finite else f"error {err:.3g} > tolerance"
                rec.failure_reason = f"stall at dt_min={control.dt_min}: {reason} at t={t:.6g}"
                break
            dt = dt_next if finite else max(dt_try / 2, control.dt_min)

    record(rec.dt_history[-1] if rec.dt_history else 0.0, force=True)
    return rec
