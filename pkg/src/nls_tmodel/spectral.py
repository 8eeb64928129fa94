"""Wavenumber bookkeeping, spectral transforms and the quintic convolution RHS.

The solution on [0, 2pi] with periodic boundary conditions is carried as
Fourier coefficients u_k, k in [-K/2, K/2-1], with

    u(x) = sum_k u_k exp(i k x).

The mode interval is split into a resolved block F = [-N/2, N/2-1] and the
remainder G; with K >= 5N every quintic product of resolved modes is exactly
representable, so pseudospectral evaluation is alias-free by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import next_fast_len

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ModePartition:
    """Split of the carried wavenumbers into resolved (F) and unresolved (G)."""

    N: int
    K: int
    F: np.ndarray = field(repr=False)
    G: np.ndarray = field(repr=False)

    @property
    def modes(self) -> np.ndarray:
        """All carried wavenumbers, ascending: [-K/2, K/2-1]."""
        return np.arange(-self.K // 2, self.K // 2)


def make_partition(N: int, ratio: int = 5) -> ModePartition:
    """Build the mode split F = [-N/2, N/2-1], G = [-K/2, K/2-1] \\ F, K = ratio*N.

    ratio >= 5 keeps every quintic product of F-modes inside the carried range.
    """
    if N < 4 or N % 2 != 0:
        raise ValueError(f"N must be an even integer >= 4, got {N}")
    if int(ratio) != ratio or ratio < 5:
        raise ValueError(f"ratio must be an integer >= 5, got {ratio}")
    K = int(ratio) * N
    F = np.arange(-N // 2, N // 2)
    full = np.arange(-K // 2, K // 2)
    G = np.setdiff1d(full, F)
    return ModePartition(N=N, K=K, F=F, G=G)


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Fourier coefficients on an ascending set of wavenumbers at one time."""

    k: np.ndarray
    u: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if self.k.shape != self.u.shape:
            raise ValueError("wavenumber and coefficient arrays differ in length")
        if self.k.size > 1 and not np.all(np.diff(self.k) > 0):
            raise ValueError("wavenumbers must be strictly ascending")

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)))

    def restrict(self, modes: np.ndarray) -> "SpectralState":
        """State on a subset of wavenumbers (coefficients copied)."""
        idx = np.searchsorted(self.k, modes)
        if np.any(idx >= self.k.size) or np.any(self.k[np.minimum(idx, self.k.size - 1)] != modes):
            raise ValueError("requested modes not all present in state")
        return SpectralState(k=np.asarray(modes, dtype=np.int64), u=self.u[idx].copy(), time=self.time)

    def with_u(self, u: np.ndarray, time: float | None = None) -> "SpectralState":
        return SpectralState(k=self.k, u=u, time=self.time if time is None else time)

    def as_dict(self) -> dict[int, complex]:
        return {int(kk): complex(uu) for kk, uu in zip(self.k, self.u)}


@dataclass(frozen=True, eq=False)
class PhysicalField:
    """Complex samples u(x_j) on the uniform grid x_j = 2 pi j / M."""

    samples: np.ndarray

    @property
    def grid_size(self) -> int:
        return self.samples.size

    @property
    def x(self) -> np.ndarray:
        return TWO_PI * np.arange(self.grid_size) / self.grid_size


def _min_grid_for_modes(k: np.ndarray) -> int:
    """Smallest grid on which every wavenumber in k occupies a distinct bin."""
    if k.size == 0:
        return 1
    return int(max(-2 * k.min(), 2 * k.max() + 2, 1))


def to_physical(state: SpectralState, grid_size: int) -> PhysicalField:
    """Evaluate the Fourier series on a uniform grid of the given size."""
    need = _min_grid_for_modes(state.k)
    if grid_size < need:
        raise ValueError(f"grid_size {grid_size} cannot represent modes up to +-{max(abs(state.k.min()), state.k.max())}; need >= {need}")
    buf = np.zeros(grid_size, dtype=np.complex128)
    buf[np.mod(state.k, grid_size)] = state.u
    return PhysicalField(samples=grid_size * np.fft.ifft(buf))


def to_spectral(field: PhysicalField, partition: ModePartition, time: float = 0.0) -> SpectralState:
    """Project physical samples onto the partition's modes (others discarded)."""
    M = field.grid_size
    modes = partition.modes
    if M < _min_grid_for_modes(modes):
        raise ValueError(f"grid of size {M} is too coarse for K={partition.K} modes")
    coeffs = np.fft.fft(field.samples) / M
    return SpectralState(k=modes, u=coeffs[np.mod(modes, M)].copy(), time=time)


def _product_bounds(slots: list[tuple[int, int, bool]]) -> tuple[int, int]:
    """Wavenumber range of a pointwise product of band-limited factors.

    Each slot is (k_lo, k_hi, conjugated); conjugating a factor negates and
    flips its spectral support.
    """
    lo = hi = 0
    for k_lo, k_hi, conj in slots:
        if conj:
            lo, hi = lo - k_hi, hi - k_lo
        else:
            lo, hi = lo + k_lo, hi + k_hi
    return lo, hi


def alias_free_grid(slots: list[tuple[int, int, bool]]) -> int:
    """Smallest grid size on which the product of the given factors has no wrap-around."""
    lo, hi = _product_bounds(slots)
    return int(max(-2 * lo, 2 * hi + 2, 1))


def _quintic_slots(support: np.ndarray) -> list[tuple[int, int, bool]]:
    lo, hi = int(support.min()), int(support.max())
    return [(lo, hi, False), (lo, hi, True), (lo, hi, False), (lo, hi, True), (lo, hi, False)]


def quintic_product_grid(support: np.ndarray) -> int:
    """Default padded grid for |u|^4 u of a field supported on the given modes.

    At least 5x the support width, and never below the exact alias-free bound
    (which can exceed 5x the width for strongly off-center supports).
    """
    width = int(support.max()) - int(support.min()) + 1
    exact = alias_free_grid(_quintic_slots(support))
    return next_fast_len(max(5 * width, exact))


def _gather(coeffs: np.ndarray, modes: np.ndarray, grid_size: int) -> np.ndarray:
    return coeffs[np.mod(modes, grid_size)]


def _field_on_grid(modes: np.ndarray, values: np.ndarray, grid_size: int) -> np.ndarray:
    buf = np.zeros(grid_size, dtype=np.complex128)
    buf[np.mod(modes, grid_size)] = values
    return grid_size * np.fft.ifft(buf)


def quintic_rhs(
    state: SpectralState,
    support: np.ndarray,
    image: np.ndarray,
    grid_size: int | None = None,
) -> np.ndarray:
    """Full RHS -i k^2 u_k [k in support] + i (|u|^4 u)_k with the quintic
    convolution restricted to coefficients on `support`.

    Returned values align with `image`. Evaluated pseudospectrally on a padded
    grid large enough that no aliased wavenumber can land on any image mode.
    """
    support = np.unique(np.asarray(support, dtype=np.int64))
    image = np.asarray(image, dtype=np.int64)
    if support.size == 0:
        return np.zeros(image.size, dtype=np.complex128)

    idx = np.searchsorted(state.k, support)
    if np.any(idx >= state.k.size) or np.any(state.k[np.minimum(idx, state.k.size - 1)] != support):
        raise ValueError("support contains modes absent from the state")
    u_s = state.u[idx]

    exact = alias_free_grid(_quintic_slots(support))
    if grid_size is None:
        grid_size = quintic_product_grid(support)
    elif grid_size < exact:
        raise ValueError(f"grid_size {grid_size} aliases quintic products of this support; need >= {exact}")
    if grid_size < _min_grid_for_modes(image):
        raise ValueError("grid_size too small to address all image modes")

    f = _field_on_grid(support, u_s, grid_size)
    w = np.fft.fft((f * np.conj(f)) ** 2 * f) / grid_size

    out = 1j * _gather(w, image, grid_size)
    in_support = np.isin(image, support)
    if np.any(in_support):
        img_idx = np.searchsorted(support, image[in_support])
        out[in_support] += -1j * image[in_support] ** 2 * u_s[img_idx]
    return out


_ORACLE_SUPPORT_CAP = 32


def slotted_quintic_oracle(
    slot_modes: list[np.ndarray],
    slot_values: list[np.ndarray],
    image: np.ndarray,
) -> np.ndarray:
    """Exhaustive sum over quintuples k1-k2+k3-k4+k5 = k (slots 2 and 4 conjugated).

    Slot i draws (mode, value) pairs from slot_modes[i]/slot_values[i]. Cost is
    the product of the slot sizes; intended for small testing problems only.
    Enumeration is exact; no transforms are involved.
    """
    sizes = [m.size for m in slot_modes]
    if max(sizes) > _ORACLE_SUPPORT_CAP:
        raise ValueError(f"oracle slot size {max(sizes)} exceeds cap {_ORACLE_SUPPORT_CAP}")
    image = np.asarray(image, dtype=np.int64)

    k1, v1 = slot_modes[0], slot_values[0]
    k2, v2 = slot_modes[1], np.conj(slot_values[1])
    k3, v3 = slot_modes[2], slot_values[2]
    k4, v4 = slot_modes[3], np.conj(slot_values[3])
    k5, v5 = slot_modes[4], slot_values[4]

    # inner quadruple enumerated by broadcasting; outer slot looped to bound memory
    ksum4 = (
        -k2[:, None, None, None]
        + k3[None, :, None, None]
        - k4[None, None, :, None]
        + k5[None, None, None, :]
    ).ravel()
    val4 = (
        v2[:, None, None, None]
        * v3[None, :, None, None]
        * v4[None, None, :, None]
        * v5[None, None, None, :]
    ).ravel()

    lo, hi = _product_bounds([(int(m.min()), int(m.max()), c) for m, c in
                              zip(slot_modes, [False, True, False, True, False])])
    acc = np.zeros(hi - lo + 1, dtype=np.complex128)
    for ka, va in zip(k1, v1):
        np.add.at(acc, ka + ksum4 - lo, va * val4)

    out = np.zeros(image.size, dtype=np.complex128)
    hit = (image >= lo) & (image <= hi)
    out[hit] = acc[image[hit] - lo]
    return out


def quintic_rhs_oracle(state: SpectralState, support: np.ndarray, image: np.ndarray) -> np.ndarray:
    """Brute-force reference for quintic_rhs: direct enumeration of all quintuples.

    Refuses supports larger than 32 modes (cost grows as the fifth power).
    """
    support = np.unique(np.asarray(support, dtype=np.int64))
    image = np.asarray(image, dtype=np.int64)
    if support.size > _ORACLE_SUPPORT_CAP:
        raise ValueError(f"oracle supports at most {_ORACLE_SUPPORT_CAP} modes, got {support.size}")
    if support.size == 0:
        return np.zeros(image.size, dtype=np.complex128)

    idx = np.searchsorted(state.k, support)
    if np.any(idx >= state.k.size) or np.any(state.k[np.minimum(idx, state.k.size - 1)] != support):
        raise ValueError("support contains modes absent from the state")
    u_s = state.u[idx]

    conv = slotted_quintic_oracle([support] * 5, [u_s] * 5, image)
    out = 1j * conv
    in_support = np.isin(image, support)
    if np.any(in_support):
        img_idx = np.searchsorted(support, image[in_support])
        out[in_support] += -1j * image[in_support] ** 2 * u_s[img_idx]
    return out


class GalerkinEvaluator:
    """Precomputed plan for the full-system RHS on all carried modes.

    Equivalent to quintic_rhs(state, support=modes, image=modes) but reuses
    index arrays across calls. Holds only read-only arrays; thread-safe.
    """

    def __init__(self, partition: ModePartition):
        self.partition = partition
        modes = partition.modes
        self.grid = quintic_product_grid(modes)
        self.idx = np.mod(modes, self.grid)
        self.k2 = modes.astype(np.float64) ** 2

    def __call__(self, u: np.ndarray, t: float) -> np.ndarray:
        f = _field_on_grid(self.partition.modes, u, self.grid)
        a2 = f.real * f.real + f.imag * f.imag
        w = np.fft.fft(a2 * a2 * f) / self.grid
        return -1j * self.k2 * u + 1j * w[self.idx]


_GALERKIN_EVALUATORS: dict[int, GalerkinEvaluator] = {}


def get_galerkin_evaluator(partition: ModePartition) -> GalerkinEvaluator:
    ev = _GALERKIN_EVALUATORS.get(partition.K)
    if ev is None:
        ev = _GALERKIN_EVALUATORS[partition.K] = GalerkinEvaluator(partition)
    return ev


def initial_condition(A: float, partition: ModePartition) -> SpectralState:
    """Purely imaginary Gaussian pulse i*A*exp(-(x-pi)^2), sampled and truncated
    to the partition's modes. Peak magnitude A sits at x = pi.

    The envelope is not exactly periodic; its boundary value ~A*exp(-pi^2) is
    below 1e-4 of the peak and is accepted as a sampling defect.
    """
    if A <= 0:
        raise ValueError(f"amplitude must be positive, got {A}")
    M = next_fast_len(2 * partition.K)
    x = TWO_PI * np.arange(M) / M
    samples = 1j * A * np.exp(-((x - np.pi) ** 2))
    return to_spectral(PhysicalField(samples=samples), partition, time=0.0)
