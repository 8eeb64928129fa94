import numpy as np
import pytest

from nls_tmodel.spectral import SpectralState, make_partition


@pytest.fixture
def p4():
    return make_partition(4)


@pytest.fixture
def p8():
    return make_partition(8)


def state_with(partition, entries: dict, time: float = 0.0, on=None) -> SpectralState:
    """State on the partition's full mode set (or on F via on='F') with the
    given {wavenumber: amplitude} entries, zeros elsewhere."""
    modes = partition.F if on == "F" else partition.modes
    u = np.zeros(modes.size, dtype=np.complex128)
    for k, v in entries.items():
        idx = np.where(modes == k)[0]
        assert idx.size == 1, f"mode {k} not in state"
        u[idx[0]] = v
    return SpectralState(k=modes, u=u, time=time)


def random_state(partition, rng, scale=1.0, time=0.0, on=None) -> SpectralState:
    modes = partition.F if on == "F" else partition.modes
    u = scale * (rng.normal(size=modes.size) + 1j * rng.normal(size=modes.size))
    return SpectralState(k=modes, u=u, time=time)
