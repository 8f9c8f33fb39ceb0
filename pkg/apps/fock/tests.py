import numpy as np
import pytest

from core.exceptions import (
    ConventionError,
    DomainError,
    IndexOutOfRange,
    NormalizationError,
    ShapeMismatch,
)

from .models import SubspaceSpec, WaveFunction
from .queries import (
    basis_state,
    conservation_error,
    expectations,
    snapshot,
    subspace_dimension,
    variance_n1,
)


class TestSubspace:
    @pytest.mark.parametrize("s2,s3,d", [(100, 100, 101), (2, 2, 3), (0, 0, 1)])
    def test_dimension(self, s2, s3, d):
        assert subspace_dimension(s2, s3).d == d

    def test_rejects_s3_below_s2(self):
        with pytest.raises(ConventionError) as exc:
            subspace_dimension(5, 4)
        assert exc.value.code == "CONVENTION_VIOLATION"

    @pytest.mark.parametrize("s2,s3", [(-1, 3), (2, -1), (1.5, 3)])
    def test_rejects_bad_labels(self, s2, s3):
        with pytest.raises(DomainError):
            subspace_dimension(s2, s3)


class TestBasisState:
    def test_ground_of_cascade(self):
        assert basis_state(SubspaceSpec(100, 100), 0).occupations == (100, 0, 0)

    def test_spread_center(self):
        assert basis_state(SubspaceSpec(103, 110), 3).occupations == (100, 10, 3)

    def test_last_state(self):
        state = basis_state(SubspaceSpec(7, 12), 7)
        assert state.occupations == (0, 12, 7)

    def test_labels_hold_for_every_index(self):
        spec = SubspaceSpec(9, 14)
        for i in range(spec.d):
            s = basis_state(spec, i)
            assert s.n1 + s.n3 == spec.s2
            assert s.n1 + s.n2 == spec.s3
            assert min(s.occupations) >= 0

    @pytest.mark.parametrize("i", [-1, 4])
    def test_out_of_range(self, i):
        with pytest.raises(IndexOutOfRange):
            basis_state(SubspaceSpec(3, 3), i)


class TestWaveFunction:
    def test_amplitudes_are_read_only(self):
        psi = WaveFunction.basis(SubspaceSpec(2, 2), 0)
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 0.5

    def test_shape_checked(self):
        with pytest.raises(ShapeMismatch):
            WaveFunction(SubspaceSpec(2, 2), np.ones(2))

    def test_normalize_zero_vector(self):
        with pytest.raises(NormalizationError):
            WaveFunction.from_amplitudes(SubspaceSpec(2, 2), np.zeros(3), True)

    def test_no_silent_renormalization(self):
        psi = WaveFunction(SubspaceSpec(2, 2), np.array([1.0, 1.0, 0.0]))
        with pytest.raises(NormalizationError):
            expectations(psi)


class TestExpectations:
    def test_pure_initial_state(self):
        psi = WaveFunction.basis(SubspaceSpec(100, 100), 0)
        assert expectations(psi) == (100, 0, 0)

    def test_uniform_superposition(self):
        spec = SubspaceSpec(2, 2)
        psi = WaveFunction(spec, np.full(3, 1 / np.sqrt(3)))
        assert np.allclose(expectations(psi), (1, 1, 1))

    @pytest.mark.parametrize("m", [0, 3, 11])
    def test_pure_basis_states(self, m):
        spec = SubspaceSpec(11, 20)
        psi = WaveFunction.basis(spec, m)
        assert np.allclose(expectations(psi), (11 - m, 9 + m, m))
        assert variance_n1(psi) == 0.0

    def test_conservation_of_labels(self, random_state):
        for s2, s3 in [(4, 4), (10, 31), (32, 40)]:
            psi = random_state(s2, s3)
            err2, err3 = conservation_error(psi)
            assert err2 <= 1e-10 and err3 <= 1e-10

    def test_global_phase_invariance(self, random_state):
        psi = random_state(12, 15)
        rotated = psi.with_phase(1.234)
        assert np.allclose(expectations(psi), expectations(rotated), atol=1e-12)
        assert variance_n1(psi) == pytest.approx(variance_n1(rotated), abs=1e-12)


class TestVariance:
    def test_two_extremes_maximize(self):
        spec = SubspaceSpec(10, 10)
        amplitudes = np.zeros(spec.d)
        amplitudes[[0, -1]] = 1 / np.sqrt(2)
        assert variance_n1(WaveFunction(spec, amplitudes)) == pytest.approx(25.0)

    @pytest.mark.slow
    def test_bounds_over_random_states(self, rng):
        for k in range(10_000):
            s2 = int(rng.integers(0, 32))
            spec = SubspaceSpec(s2, s2 + int(rng.integers(0, 5)))
            z = rng.normal(size=spec.d) + 1j * rng.normal(size=spec.d)
            psi = WaveFunction.from_amplitudes(spec, z, normalize=True)
            value = variance_n1(psi)
            assert 0.0 <= value <= s2**2 / 4 + 1e-9, k

    def test_zero_only_for_pure_states(self, random_state):
        assert variance_n1(random_state(6, 6)) > 0.0


def test_snapshot_optionally_carries_probabilities():
    psi = WaveFunction.basis(SubspaceSpec(3, 5), 1)
    bare = snapshot(psi, 0.5)
    full = snapshot(psi, 0.5, with_probabilities=True)
    assert bare.probabilities is None
    assert full.probabilities.tolist() == [0.0, 1.0, 0.0, 0.0]
    assert full.expectations == (2, 3, 1)
