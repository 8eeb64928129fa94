import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from nls_tmodel.spectral import (
    PhysicalField,
    SpectralState,
    initial_condition,
    make_partition,
    quintic_product_grid,
    quintic_rhs,
    quintic_rhs_oracle,
    to_physical,
    to_spectral,
)

from conftest import random_state, state_with


class TestPartition:
    def test_paper_split_N10(self):
        p = make_partition(10)
        assert p.K == 50
        assert p.F.tolist() == list(range(-5, 5))
        assert sorted(p.G.tolist()) == list(range(-25, -5)) + list(range(5, 25))

    def test_minimal_N4(self):
        p = make_partition(4)
        assert p.K == 20 and p.F.tolist() == [-2, -1, 0, 1]
        assert set(p.G.tolist()) == set(range(-10, -2)) | set(range(2, 10))

    def test_N512_mode_counts(self):
        p = make_partition(512)
        assert p.K == 2560
        assert p.G.size == 2048 and p.F.size == 512

    def test_disjoint_cover(self):
        p = make_partition(6)
        assert np.intersect1d(p.F, p.G).size == 0
        assert np.array_equal(np.union1d(p.F, p.G), p.modes)

    @pytest.mark.parametrize("N", [3, 5, 2, 0, -4])
    def test_bad_N(self, N):
        with pytest.raises(ValueError):
            make_partition(N)

    def test_bad_ratio(self):
        with pytest.raises(ValueError):
            make_partition(8, ratio=4)


class TestTransforms:
    def test_constant_mode(self, p4):
        st_ = state_with(p4, {0: 0.7 - 0.2j})
        f = to_physical(st_, 64)
        assert np.allclose(f.samples, 0.7 - 0.2j, atol=1e-14)

    def test_zero_state(self, p4):
        st_ = state_with(p4, {})
        assert np.all(to_physical(st_, 32).samples == 0)

    def test_single_harmonic(self):
        st_ = SpectralState(k=np.array([1]), u=np.array([1.0 + 0j]))
        f = to_physical(st_, 8)
        assert np.allclose(f.samples, np.exp(1j * 2 * np.pi * np.arange(8) / 8), atol=1e-15)

    def test_grid_too_small(self, p4):
        st_ = state_with(p4, {0: 1.0})
        with pytest.raises(ValueError):
            to_physical(st_, p4.K - 2)

    def test_constant_field_projects_to_mode_zero(self, p4):
        f = PhysicalField(samples=np.full(64, 0.3 + 0.4j))
        st_ = to_spectral(f, p4)
        assert abs(st_.as_dict()[0] - (0.3 + 0.4j)) < 1e-14
        assert np.abs(np.delete(st_.u, np.where(st_.k == 0)[0])).max() < 1e-14

    def test_mode_outside_F_lands_in_G(self, p4):
        x = 2 * np.pi * np.arange(64) / 64
        st_ = to_spectral(PhysicalField(samples=np.exp(2j * x)), p4)
        d = st_.as_dict()
        assert abs(d[2] - 1.0) < 1e-13
        assert 2 in p4.G.tolist()

    @settings(deadline=None, max_examples=25)
    @given(seed=st.integers(0, 2**32 - 1), N=st.sampled_from([4, 6, 8, 10]))
    def test_round_trip_identity(self, seed, N):
        p = make_partition(N)
        rng = np.random.default_rng(seed)
        st_ = random_state(p, rng)
        back = to_spectral(to_physical(st_, 2 * p.K), p)
        assert np.abs(back.u - st_.u).max() <= 1e-12 * max(np.abs(st_.u).max(), 1.0)


class TestQuinticRhs:
    def test_zero_state(self, p4):
        st_ = state_with(p4, {})
        assert np.all(quintic_rhs(st_, p4.modes, p4.modes) == 0)

    def test_single_mode_closed_form(self, p4):
        # -i*1*(2i) + i*|2i|^4*(2i) = 2 - 32 = -30
        st_ = state_with(p4, {1: 2j})
        val = quintic_rhs(st_, np.array([1]), np.array([1]))
        assert abs(val[0] - (-30.0)) < 1e-12
        assert abs(quintic_rhs_oracle(st_, np.array([1]), np.array([1]))[0] - (-30.0)) < 1e-12

    def test_mode_zero_closed_form(self, p4):
        c = 0.7 - 0.2j
        st_ = state_with(p4, {0: c})
        val = quintic_rhs(st_, np.array([0]), np.array([0]))
        assert abs(val[0] - 1j * abs(c) ** 4 * c) < 1e-14

    def test_two_mode_case_frozen_oracle_values(self, p4):
        # u_1 = 0.3+0.1j, u_2 = -0.2+0.5j; expected values computed once by
        # exhaustive quintuple enumeration (quintic_rhs_oracle) and frozen
        st_ = state_with(p4, {1: 0.3 + 0.1j, 2: -0.2 + 0.5j})
        image = np.arange(-1, 5)
        expected = np.array([
            0.00186 - 0.00898j,
            0.05564 + 0.01498j,
            0.05637 - 0.16911j,
            1.85595 + 0.74238j,
            0.03432 - 0.07304j,
            0.01372 + 0.00746j,
        ])
        got = quintic_rhs(st_, np.array([1, 2]), image)
        assert np.abs(got - expected).max() < 1e-12
        assert np.abs(quintic_rhs_oracle(st_, np.array([1, 2]), image) - expected).max() < 1e-12

    @settings(deadline=None, max_examples=20)
    @given(seed=st.integers(0, 2**32 - 1), N=st.sampled_from([4, 6]))
    def test_matches_oracle(self, seed, N):
        p = make_partition(N)
        st_ = random_state(p, np.random.default_rng(seed))
        a = quintic_rhs(st_, p.modes, p.modes)
        b = quintic_rhs_oracle(st_, p.modes, p.modes)
        assert np.abs(a - b).max() <= 1e-12 * np.abs(b).max()

    def test_grid_size_independence(self, p4):
        st_ = random_state(p4, np.random.default_rng(7))
        g = quintic_product_grid(p4.modes)
        a = quintic_rhs(st_, p4.modes, p4.modes, grid_size=g)
        b = quintic_rhs(st_, p4.modes, p4.modes, grid_size=g + 37)
        assert np.abs(a - b).max() <= 1e-13 * np.abs(a).max()

    def test_aliasing_grid_rejected(self, p4):
        st_ = random_state(p4, np.random.default_rng(1))
        with pytest.raises(ValueError):
            quintic_rhs(st_, p4.modes, p4.modes, grid_size=p4.K)

    @settings(deadline=None, max_examples=30)
    @given(seed=st.integers(0, 2**32 - 1), N=st.sampled_from([4, 6, 8]))
    def test_symmetric_truncation_conserves_mass(self, seed, N):
        # Re sum u_k* RHS_k = 0 when support = image = all carried modes
        p = make_partition(N)
        st_ = random_state(p, np.random.default_rng(seed))
        rhs = quintic_rhs(st_, p.modes, p.modes)
        mass = float(np.sum(np.abs(st_.u) ** 2))
        assert abs(np.sum(np.real(np.conj(st_.u) * rhs))) <= 1e-12 * mass**3

    def test_support_must_be_in_state(self, p4):
        st_ = SpectralState(k=p4.F, u=np.ones(4, complex))
        with pytest.raises(ValueError):
            quintic_rhs(st_, p4.modes, p4.F)

    def test_oracle_refuses_large_support(self):
        p = make_partition(8)
        st_ = random_state(p, np.random.default_rng(0))
        with pytest.raises(ValueError):
            quintic_rhs_oracle(st_, p.modes, p.modes)  # |F u G| = 40 > 32


class TestInitialCondition:
    def test_peak_amplitude_and_phase(self):
        p = make_partition(32)
        st_ = initial_condition(1.80, p)
        f = to_physical(st_, 4 * p.K)
        i_pi = np.argmin(np.abs(f.x - np.pi))
        assert abs(abs(f.samples[i_pi]) - 1.80) < 1e-7
        assert abs(f.samples[i_pi].real) < 1e-12  # purely imaginary envelope
        assert np.abs(f.samples).max() <= 1.80 + 1e-7

    def test_mass_matches_quadrature_oracle(self):
        p = make_partition(32)
        st_ = initial_condition(1.80, p)
        mass = 2 * np.pi * float(np.sum(np.abs(st_.u) ** 2))
        oracle, _ = quad(lambda x: 1.8**2 * np.exp(-2 * (x - np.pi) ** 2), 0, 2 * np.pi,
                         epsabs=1e-14, epsrel=1e-14)
        assert abs(mass - oracle) < 1e-8
        assert abs(oracle - 1.8**2 * np.sqrt(np.pi / 2)) < 1e-8  # line integral, edge-truncated

    def test_magnitude_symmetry(self):
        p = make_partition(16)
        st_ = initial_condition(0.9, p)
        d = st_.as_dict()
        for k in range(1, p.K // 2):  # +-K/2 asymmetry excluded by construction
            assert abs(abs(d[k]) - abs(d[-k])) < 1e-12

    def test_rejects_nonpositive_amplitude(self, p4):
        with pytest.raises(ValueError):
            initial_condition(0.0, p4)


class TestStateHelpers:
    def test_restrict(self, p4):
        st_ = random_state(p4, np.random.default_rng(5), time=0.3)
        sub = st_.restrict(p4.F)
        assert np.array_equal(sub.k, p4.F) and sub.time == 0.3
        assert np.array_equal(sub.u, st_.u[np.searchsorted(p4.modes, p4.F)])
        with pytest.raises(ValueError):
            st_.restrict(np.array([p4.K]))

    def test_finite_detection(self, p4):
        st_ = state_with(p4, {0: 1.0})
        assert st_.is_finite()
        bad = st_.with_u(st_.u * np.nan)
        assert not bad.is_finite()

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            SpectralState(k=np.array([0, 1]), u=np.array([1.0 + 0j]))
