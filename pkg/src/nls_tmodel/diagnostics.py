"""Measured quantities: mass, Hamiltonians, gradient norm, spectra, tail and
interval masses, ground-state reference, ejection detection and blow-up fits.

Reported masses follow the physical-integral convention

    mass_physical = int |u|^2 dx = 2 pi sum_k |u_k|^2

which is the only convention under which the total (~4.06 for the A=1.8
Gaussian), the concentrated ground-state mass (~2.74) and the ejected mass
(~0.446) are mutually consistent. The bare discrete sum is logged alongside.

Two Hamiltonians are computed: the physical quadrature
int [ |grad u|^2 / 2 - |u|^6 / 6 ] dx (gradient term summed exactly in
spectral space, the sextic term sampled on an alias-free grid), and the
literal per-mode sum  sum_k [ k^2 |u_k|^2 / 2 - |u_k|^6 / 6 ],  which is not
the Parseval image of the quadrature but is carried for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len
from scipy.integrate import quad, trapezoid

from .spectral import TWO_PI, SpectralState, to_physical
from .tmodel import TModelRhsBreakdown, mass_dissipation_rate


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One timestamped row of measurements."""

    time: float
    mass_physical: float
    mass_discrete: float
    hamiltonian_quadrature: float
    hamiltonian_spectral_as_written: float
    gradient_l2: float
    dissipation_rate: float
    tail_mass_25: float
    dt_current: float


def _sextic_integral(state: SpectralState) -> float:
    """int |u|^6 dx on a grid fine enough that the sextic product cannot alias."""
    span = int(state.k.max()) - int(state.k.min()) + 1
    grid = next_fast_len(max(3 * span, 16))
    f = to_physical(state, grid).samples
    a2 = f.real * f.real + f.imag * f.imag
    return float(TWO_PI * np.mean(a2 * a2 * a2))


def measure(
    state: SpectralState,
    breakdown: TModelRhsBreakdown | None = None,
    dt_current: float = 0.0,
    tail_k_min: int = 25,
    tail_signed: bool = False,
) -> DiagnosticsRecord:
    """All scalar diagnostics for one state; breakdown supplies the t-model
    dissipation rate (zero for the mass-conserving full system)."""
    abs2 = np.abs(state.u) ** 2
    md = float(abs2.sum())
    k2 = state.k.astype(np.float64) ** 2
    grad = float((k2 * abs2).sum())
    h_spec = float((0.5 * k2 * abs2 - abs2**3 / 6.0).sum())
    h_quad = 0.5 * TWO_PI * grad - _sextic_integral(state) / 6.0
    rate = mass_dissipation_rate(breakdown) if breakdown is not None else 0.0
    return DiagnosticsRecord(
        time=state.time,
        mass_physical=TWO_PI * md,
        mass_discrete=md,
        hamiltonian_quadrature=h_quad,
        hamiltonian_spectral_as_written=h_spec,
        gradient_l2=grad,
        dissipation_rate=rate,
        tail_mass_25=tail_mass(state, tail_k_min, signed=tail_signed),
        dt_current=dt_current,
    )


def spectrum(state: SpectralState) -> dict[int, float]:
    """Per-mode mass |u_k|^2."""
    return {int(k): float(abs(u) ** 2) for k, u in zip(state.k, state.u)}


def tail_mass(state: SpectralState, k_min: int = 25, signed: bool = False) -> float:
    """Mass carried at wavenumbers >= k_min among the state's modes.

    Both signs are counted by default; signed=True restricts to k >= +k_min.
    """
    if k_min < 0:
        raise ValueError("k_min must be nonnegative")
    sel = state.k >= k_min if signed else np.abs(state.k) >= k_min
    return float((np.abs(state.u[sel]) ** 2).sum())


def interval_mass(state: SpectralState, a: float, b: float, samples: int | None = None) -> float:
    """int_a^b |u(x)|^2 dx by trapezoidal quadrature on a dense, exact-endpoint grid.

    The field is evaluated directly from its Fourier sum on >= 8x(mode count)
    points spanning [a, b], so the window edges carry no grid-snapping error.
    """
    if not (0.0 <= a < b <= TWO_PI + 1e-12):
        raise ValueError(f"require 0 <= a < b <= 2*pi, got [{a}, {b}]")
    n = (8 * state.k.size if samples is None else samples) + 1
    x = np.linspace(a, b, n)
    dens = np.empty(n)
    kf = state.k.astype(np.float64)
    chunk = max(1, 2_000_000 // max(state.k.size, 1))
    for i in range(0, n, chunk):
        vals = np.exp(1j * np.outer(x[i : i + chunk], kf)) @ state.u
        dens[i : i + chunk] = vals.real**2 + vals.imag**2
    return float(trapezoid(dens, x))


@dataclass(frozen=True)
class GroundStateReference:
    """Soliton profile whose mass sets the concentration scale at blow-up."""

    mass: float
    mass_reported: float = 2.7412  # literature value carried for comparison

    @staticmethod
    def profile(x: np.ndarray | float) -> np.ndarray | float:
        return (3.0 / np.cosh(2.0 * np.asarray(x, dtype=np.float64)) ** 2) ** 0.25

    def residual(self, x: np.ndarray, h: float = 0.004) -> np.ndarray:
        """Q'' + Q^5 - Q with Q'' from a 5-point 4th-order stencil of the
        profile samples alone (independent of any closed-form derivative)."""
        q = self.profile
        d2 = (-q(x + 2 * h) + 16 * q(x + h) - 30 * q(x) + 16 * q(x - h) - q(x - 2 * h)) / (12 * h * h)
        return d2 + q(x) ** 5 - q(x)


def ground_state_reference() -> GroundStateReference:
    """Ground-state profile with its line mass from adaptive quadrature.

    The closed-form mass is sqrt(3)*pi/2 ~ 2.7207; the commonly quoted 2.7412
    differs by ~0.75% and is reported alongside, not reconciled.
    """
    mass, err = quad(lambda x: GroundStateReference.profile(x) ** 2, -20.0, 20.0,
                     epsabs=1e-12, epsrel=1e-12)
    if err > 1e-8:
        raise RuntimeError(f"ground-state quadrature failed to converge: err={err}")
    return GroundStateReference(mass=float(mass))


GROUND_STATE_MASS_CLOSED_FORM = math.sqrt(3.0) * math.pi / 2.0


@dataclass(frozen=True)
class EjectionEvent:
    """An instantaneous resolved-mass drop located by its dissipation-rate peak."""

    t_peak: float
    peak_rate: float
    mass_before: float
    mass_after: float
    ejected: float
    window: tuple[float, float]


def detect_ejection(
    series: np.ndarray,
    threshold_ratio: float = 100.0,
    edge_fraction: float = 0.01,
    flank_rows: int = 50,
    min_peak_fraction: float = 1e-6,
) -> list[EjectionEvent]:
    """Locate mass-ejection events in (t, dissipation_rate, mass) rows.

    A peak of |rate| qualifies when it exceeds threshold_ratio times the
    series median of |rate| and min_peak_fraction of the largest peak (the
    latter suppresses noise-floor wiggles 10+ decades below the event, which
    still clear a median-based threshold on long quiescent series). Each event
    window extends to where |rate| falls below edge_fraction of the peak;
    before/after masses average up to flank_rows rows just outside each edge.
    Events are returned in time order.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.size == 0:
        return []
    t, rate, mass = series[:, 0], series[:, 1], series[:, 2]
    if np.any(np.diff(t) < 0):
        raise ValueError("series must be time-ordered")
    r = np.abs(rate)
    if not np.any(r > 0):
        return []
    thresh = max(threshold_ratio * float(np.median(r)), min_peak_fraction * float(r.max()))

    candidates = [
        i for i in range(len(r))
        if r[i] > thresh and r[i] > 0
        and (i == 0 or r[i] >= r[i - 1]) and (i == len(r) - 1 or r[i] > r[i + 1])
    ]
    candidates.sort(key=lambda i: -r[i])

    events: list[EjectionEvent] = []
    claimed: list[tuple[int, int]] = []
    for i in candidates:
        floor = edge_fraction * r[i]
        lo = i
        while lo > 0 and r[lo - 1] >= floor:
            lo -= 1
        hi = i
        while hi < len(r) - 1 and r[hi + 1] >= floor:
            hi += 1
        # shoulders and sampling wiggles carve windows that overlap the
        # dominant peak's window; only disjoint windows are distinct events
        if any(lo <= c_hi and hi >= c_lo for c_lo, c_hi in claimed):
            continue
        claimed.append((lo, hi))
        before = float(np.mean(mass[max(0, lo - flank_rows) : lo])) if lo > 0 else float(mass[0])
        after = float(np.mean(mass[hi + 1 : hi + 1 + flank_rows])) if hi < len(r) - 1 else float(mass[-1])
        events.append(EjectionEvent(
            t_peak=float(t[i]),
            peak_rate=float(rate[i]),
            mass_before=before,
            mass_after=after,
            ejected=before - after,
            window=(float(t[lo]), float(t[hi])),
        ))
    events.sort(key=lambda e: e.t_peak)
    return events


@dataclass(frozen=True)
class BlowupFit:
    """Best-fit singularity time under the log-log gradient growth model."""

    T_fit: float
    amplitude: float
    residual: float
    T_power: float
    power_exponent: float
    power_residual: float

    @property
    def prefers_loglog(self) -> bool:
        return self.residual < self.power_residual


def _loglog_shape(T: float, t: np.ndarray) -> np.ndarray:
    dt = T - t
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(np.abs(np.log(dt))) / dt


def _scan_T(t, g, T_lo, T_hi, shape_residual, n=256):
    best = (np.inf, None)
    for T in np.linspace(T_lo, T_hi, n):
        res = shape_residual(T, t, g)
        if res < best[0]:
            best = (res, T)
    return best


def loglog_fit(series: np.ndarray, T_lo: float, T_hi: float) -> BlowupFit:
    """Fit gradient_l2(t) ~ C ln|ln(T-t)| / (T-t) over candidate T in [T_lo, T_hi].

    The series rows are (t, gradient_l2) and must lie strictly before T_lo.
    gradient_l2 is the squared gradient norm, hence the model carries the
    first power of the log-log rate. A free-exponent power law C (T-t)^-p is
    fit on the same rows; the goodness flag reports which model wins.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 2 or series.shape[0] < 8:
        raise ValueError("insufficient data: need at least 8 (t, gradient_l2) rows")
    t, g = series[:, 0], series[:, 1]
    if np.any(g <= 0):
        raise ValueError("gradient series must be positive")
    if T_lo <= t.max():
        raise ValueError("candidate interval must lie beyond the series")

    gnorm = math.sqrt(float(np.mean(g**2)))

    def res_loglog(T, t, g):
        f = _loglog_shape(T, t)
        if not np.all(np.isfinite(f)):
            return np.inf
        denom = float(f @ f)
        if denom == 0:
            return np.inf
        c = float(f @ g) / denom
        return math.sqrt(float(np.mean((g - c * f) ** 2))) / gnorm

    def res_power(T, t, g):
        ldt = np.log(T - t)
        lg = np.log(g)
        A = np.stack([np.ones_like(ldt), -ldt], axis=1)
        coef, *_ = np.linalg.lstsq(A, lg, rcond=None)
        pred = np.exp(A @ coef)
        return math.sqrt(float(np.mean((g - pred) ** 2))) / gnorm

    def refine(res_fn):
        r, T = _scan_T(t, g, T_lo, T_hi, res_fn)
        span = (T_hi - T_lo) / 255
        for _ in range(3):
            lo, hi = max(T_lo, T - span), min(T_hi, T + span)
            r, T = _scan_T(t, g, lo, hi, res_fn)
            span /= 64
        return r, T

    r_ll, T_ll = refine(res_loglog)
    r_pw, T_pw = refine(res_power)

    f = _loglog_shape(T_ll, t)
    c = float(f @ g) / float(f @ f)
    ldt = np.log(T_pw - t)
    coef, *_ = np.linalg.lstsq(np.stack([np.ones_like(ldt), -ldt], axis=1), np.log(g), rcond=None)
    return BlowupFit(T_fit=float(T_ll), amplitude=c, residual=float(r_ll),
                     T_power=float(T_pw), power_exponent=float(coef[1]),
                     power_residual=float(r_pw))
