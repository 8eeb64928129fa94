"""Reduced system for the resolved modes with an explicit-time memory closure.

The resolved coefficients u'_k, k in F, evolve under the resolved Galerkin
dynamics plus two ninth-order memory sums, each carrying an explicit factor of
the simulation time t:

    du'_k/dt = markovian_k + t * (memory3_k + memory2_k)

where the memory sums couple the resolved field to R_k(u'), the full-system
RHS evaluated on the unresolved modes k in G. Because u' has no content on G,
R_k(u') there is purely the quintic convolution of resolved modes. The closure
drains resolved mass at the exact rate

    dM_F/dt = -2 t * sum_{k in G} |R_k(u')|^2

which is checked at runtime (see mass_dissipation_rate). No artificial
regularization is added anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import next_fast_len

from .spectral import (
    ModePartition,
    SpectralState,
    _field_on_grid,
    _gather,
    alias_free_grid,
    quintic_product_grid,
    quintic_rhs_oracle,
    slotted_quintic_oracle,
)


@dataclass(frozen=True, eq=False)
class TModelRhsBreakdown:
    """RHS of the reduced system split into its assembly pieces.

    markovian/memory3/memory2 align with the partition's F block, g_image with
    G. The memory arrays are stored before multiplication by t; the total RHS
    is markovian + time * (memory3 + memory2).
    """

    markovian: np.ndarray
    memory3: np.ndarray
    memory2: np.ndarray
    g_image: np.ndarray
    time: float

    def total(self) -> np.ndarray:
        return self.markovian + self.time * (self.memory3 + self.memory2)


class TModelEvaluator:
    """Precomputed scatter/gather plans for the reduced-system RHS.

    All quintic products are evaluated on padded grids sized so that no
    product wavenumber wraps onto another carried mode: the resolved quintic
    on a >= 5N grid, the memory products (one factor supported on G) on a
    grid of at least 5K/2 bins. Instances hold only read-only index arrays
    and are safe to share across threads.
    """

    def __init__(self, partition: ModePartition):
        self.partition = partition
        F, G = partition.F, partition.G
        flo, fhi = int(F.min()), int(F.max())
        glo, ghi = int(G.min()), int(G.max())

        self.m1 = quintic_product_grid(F)
        mem3_slots = [(glo, ghi, False), (flo, fhi, True), (flo, fhi, False), (flo, fhi, True), (flo, fhi, False)]
        mem2_slots = [(flo, fhi, False), (glo, ghi, True), (flo, fhi, False), (flo, fhi, True), (flo, fhi, False)]
        self.m2 = next_fast_len(
            max(alias_free_grid(mem3_slots), alias_free_grid(mem2_slots), (5 * partition.K + 1) // 2)
        )

        self.idx_f1 = np.mod(F, self.m1)
        self.idx_g1 = np.mod(G, self.m1)
        self.idx_f2 = np.mod(F, self.m2)
        self.idx_g2 = np.mod(G, self.m2)
        self.k2_f = F.astype(np.float64) ** 2

    def breakdown(self, u: np.ndarray, t: float) -> TModelRhsBreakdown:
        """Assemble all RHS pieces for resolved coefficients u at time t."""
        m1, m2 = self.m1, self.m2

        f1 = _field_on_grid(self.partition.F, u, m1)
        a2 = f1.real * f1.real + f1.imag * f1.imag
        w1 = np.fft.fft(a2 * a2 * f1) / m1

        markovian = -1j * self.k2_f * u + 1j * w1[self.idx_f1]
        g = 1j * w1[self.idx_g1]

        fu = _field_on_grid(self.partition.F, u, m2)
        fr = _field_on_grid(self.partition.G, g, m2)
        b2 = fu.real * fu.real + fu.imag * fu.imag
        memory3 = 3j * (np.fft.fft(fr * (b2 * b2)) / m2)[self.idx_f2]
        memory2 = 2j * (np.fft.fft(np.conj(fr) * (fu * fu) * b2) / m2)[self.idx_f2]

        return TModelRhsBreakdown(markovian=markovian, memory3=memory3, memory2=memory2,
                                  g_image=g, time=t)

    def __call__(self, u: np.ndarray, t: float) -> np.ndarray:
        """Total RHS; same arithmetic as breakdown(), fused for the stepper."""
        b = self.breakdown(u, t)
        return b.markovian + t * (b.memory3 + b.memory2)


_EVALUATORS: dict[tuple[int, int], TModelEvaluator] = {}


def get_evaluator(partition: ModePartition) -> TModelEvaluator:
    key = (partition.N, partition.K)
    ev = _EVALUATORS.get(key)
    if ev is None:
        ev = _EVALUATORS[key] = TModelEvaluator(partition)
    return ev


def tmodel_rhs(state: SpectralState, partition: ModePartition) -> TModelRhsBreakdown:
    """RHS breakdown of the reduced system for a state carried exactly on F."""
    if state.k.size != partition.F.size or np.any(state.k != partition.F):
        raise ValueError("t-model state must carry exactly the resolved modes F")
    return get_evaluator(partition).breakdown(state.u, state.time)


def mass_dissipation_rate(breakdown: TModelRhsBreakdown) -> float:
    """Closed-form resolved-mass drain -2 t sum_G |R_k|^2; never positive for t >= 0."""
    return float(-2.0 * breakdown.time * np.sum(np.abs(breakdown.g_image) ** 2))


def tmodel_rhs_oracle(state: SpectralState, partition: ModePartition) -> TModelRhsBreakdown:
    """Direct-summation reference for tmodel_rhs (ninth-order nested sums).

    Enumerates every quintuple explicitly; the memory sums reuse the
    enumeration with one slot ranging over G and carrying R(u'). Small
    partitions only.
    """
    if state.k.size != partition.F.size or np.any(state.k != partition.F):
        raise ValueError("t-model state must carry exactly the resolved modes F")
    F, G = partition.F, partition.G
    u = state.u

    markovian = quintic_rhs_oracle(state, F, F)
    g = quintic_rhs_oracle(state, F, G)
    memory3 = 3j * slotted_quintic_oracle([G, F, F, F, F], [g, u, u, u, u], F)
    memory2 = 2j * slotted_quintic_oracle([F, G, F, F, F], [u, g, u, u, u], F)
    return TModelRhsBreakdown(markovian=markovian, memory3=memory3, memory2=memory2,
                              g_image=g, time=state.time)
