import csv

import numpy as np
import pytest
from scipy.linalg import expm

from apps.fock.models import SubspaceSpec, WaveFunction
from apps.fock.queries import conservation_error, expectations
from apps.hamiltonian.queries import build, complex_phase_matrix, dense
from apps.spectral.queries import eigensystem
from core.exceptions import ConfigError, IntegrationQualityError

from .inputs import EvolutionConfig, Method
from .mutations import export_timeseries
from .queries import (
    evolve_observables,
    fd_second_derivative,
    heisenberg_check,
    heisenberg_rhs_check,
    number_operator_rhs,
    propagate,
)


def ground(s2, s3):
    H = build(SubspaceSpec(s2, s3))
    return H, WaveFunction.basis(H.spec, 0)


class TestEvolutionConfig:
    def test_uniform_grid(self):
        cfg = EvolutionConfig.uniform(0.3, 4)
        assert cfg.tau_grid.tolist() == pytest.approx([0.0, 0.1, 0.2, 0.3])
        assert cfg.method is Method.EXACT_EIGEN

    def test_method_from_text(self):
        assert EvolutionConfig.uniform(1.0, 3, method="rk4").method is Method.RK4

    @pytest.mark.parametrize("grid", [[0.1, 0.2], [0.0, 0.2, 0.2], []])
    def test_bad_grids(self, grid):
        with pytest.raises(ConfigError) as exc:
            EvolutionConfig(grid)
        assert str(exc.value).startswith("tau_grid")

    def test_unknown_method(self):
        with pytest.raises(ConfigError):
            EvolutionConfig([0.0, 1.0], method="euler")


class TestPropagate:
    def test_zero_time_is_identity(self):
        H, psi0 = ground(5, 7)
        assert propagate(H, psi0, 0.0) is psi0

    def test_eigenvector_only_gains_phase(self):
        H = build(SubspaceSpec(6, 9))
        es = eigensystem(H)
        psi0 = WaveFunction(H.spec, es.vectors[:, 2])
        psi = propagate(H, psi0, 0.37)
        expected = np.exp(-1j * es.lambdas[2] * 0.37) * es.vectors[:, 2]
        assert np.allclose(psi.amplitudes, expected, atol=1e-12)
        assert np.allclose(expectations(psi), expectations(psi0), atol=1e-12)

    def test_small_subspace_matches_matrix_exponential(self):
        H, psi0 = ground(2, 2)
        for tau in (0.1, 0.7, 2.3):
            expected = expm(-1j * dense(H) * tau) @ psi0.amplitudes
            exact = propagate(H, psi0, tau)
            rk4 = propagate(H, psi0, tau, EvolutionConfig([0.0, tau], method="rk4"))
            assert np.max(np.abs(exact.amplitudes - expected)) < 1e-12
            assert np.max(np.abs(rk4.amplitudes - exact.amplitudes)) < 1e-8

    def test_small_subspace_frequencies(self):
        H, psi0 = ground(2, 2)
        w = np.sqrt(6.0)
        tau = 0.9
        # alpha_0 = (2 + cos(w tau)) / 3 for the lambda^3 - 6 lambda spectrum
        alpha0 = propagate(H, psi0, tau).amplitudes[0]
        assert alpha0 == pytest.approx((2 + np.cos(w * tau)) / 3, abs=1e-12)

    def test_rk4_quality_guard(self):
        H, psi0 = ground(2, 2)
        cfg = EvolutionConfig([0.0, 5.0], method="rk4", dt=0.5, norm_check=1e-8)
        with pytest.raises(IntegrationQualityError) as exc:
            propagate(H, psi0, 5.0, cfg)
        assert exc.value.code == "INTEGRATION_QUALITY"

    def test_exact_unitarity(self, random_state):
        psi0 = random_state(100, 100)
        H = build(psi0.subspace)
        # ten growth times of the (100, 0, 0) configuration
        psi = propagate(H, psi0, 10 / 19.95)
        assert psi.norm_error() <= 1e-10
        err2, err3 = conservation_error(psi)
        assert max(err2, err3) <= 1e-9


class TestCrossValidation:
    @pytest.mark.slow
    def test_cascade_subspace_over_unit_time(self):
        H, psi0 = ground(100, 100)
        cfg = EvolutionConfig.uniform(1.0, 11, method="rk4")
        rk4 = evolve_observables(H, psi0, cfg)
        exact = evolve_observables(H, psi0, EvolutionConfig.uniform(1.0, 11))
        assert rk4.norm_drift <= 1e-8
        assert exact.norm_drift <= 1e-10
        p_rk4 = np.abs(rk4.final_state.amplitudes) ** 2
        p_exact = np.abs(exact.final_state.amplitudes) ** 2
        assert np.max(np.abs(p_rk4 - p_exact)) < 1e-7

    @pytest.mark.slow
    def test_largest_dimension(self, random_state):
        psi0 = random_state(255, 255)
        H = build(psi0.subspace)
        cfg = EvolutionConfig([0.0, 0.05], method="rk4")
        rk4 = propagate(H, psi0, 0.05, cfg)
        exact = propagate(H, psi0, 0.05)
        assert np.max(np.abs(rk4.probabilities - exact.probabilities)) < 1e-7

    @pytest.mark.parametrize("theta", [0.0, 0.4, np.pi])
    def test_coupling_phase_leaves_probabilities(self, theta):
        H, psi0 = ground(2, 2)
        M = complex_phase_matrix(H, theta)
        for tau in (0.2, 1.1):
            rotated = expm(-1j * M * tau) @ psi0.amplitudes
            reference = propagate(H, psi0, tau).probabilities
            assert np.allclose(np.abs(rotated) ** 2, reference, atol=1e-12)


@pytest.mark.parametrize("method", ["exact-eigen", "rk4"])
def test_first_snapshot_is_the_initial_state(method):
    H = build(SubspaceSpec(3, 4))
    psi0 = WaveFunction.from_amplitudes(H.spec, [0.0, 0.6, 0.8, 0.0])
    cfg = EvolutionConfig.uniform(0.2, 3, method=method, with_probabilities=True)
    first = evolve_observables(H, psi0, cfg).snapshots[0]
    assert first.tau == 0.0
    assert (first.en1, first.en2, first.en3) == expectations(psi0)
    assert np.array_equal(first.probabilities, psi0.probabilities)


class TestCascade:
    @pytest.mark.slow
    def test_probability_flows_down_the_ladder(self):
        H, psi0 = ground(100, 100)
        cfg = EvolutionConfig.uniform(0.3, 301, with_probabilities=True)
        result = evolve_observables(H, psi0, cfg)
        p = result.probabilities
        peaks = [int(np.argmax(p[:, i])) for i in range(3)]
        assert peaks[0] < peaks[1] < peaks[2]
        assert np.all(p.max(axis=0) > 1e-6)
        assert np.all(np.diff(result.series("en1")) < 1e-9)
        assert np.all(np.diff(result.series("variance_n1")) > -1e-9)
        for s in result.snapshots:
            assert s.en1 + s.en3 == pytest.approx(100, rel=1e-10)
            assert s.en1 + s.en2 == pytest.approx(100, rel=1e-10)

    @pytest.mark.slow
    def test_stable_variance_returns(self):
        H, psi0 = ground(100, 1000)
        result = evolve_observables(H, psi0, EvolutionConfig.uniform(0.2, 201))
        variance = result.series("variance_n1")
        taus = result.taus
        near_return = variance[np.argmin(np.abs(taus - 0.102))]
        assert near_return < 0.1 * variance[taus <= 0.1].max()


class TestHeisenberg:
    def test_initial_cascade_state(self):
        H, psi0 = ground(100, 100)
        check = heisenberg_check(H, psi0)
        # <n1> = 100, <n1^2> = 10^4
        assert check.rhs == pytest.approx(2 * (10**4 + 3 * 10**4 - 401 * 100))
        assert check.residual <= 1e-5

    def test_eigenvectors_are_stationary(self):
        H = build(SubspaceSpec(4, 6))
        es = eigensystem(H)
        for k in (0, 2, 4):
            psi = WaveFunction(H.spec, es.vectors[:, k])
            check = heisenberg_check(H, psi)
            assert abs(check.rhs) <= 1e-9
            assert check.residual <= 1e-8

    @pytest.mark.parametrize("i,expected", [(0, -4.0), (1, -4.0), (2, 8.0)])
    def test_small_subspace_identity(self, i, expected):
        H = build(SubspaceSpec(2, 2))
        psi = WaveFunction.basis(H.spec, i)
        r1, r2, r3 = number_operator_rhs(psi)
        assert r1 == expected and r2 == -expected and r3 == -expected
        assert fd_second_derivative(H, psi) == pytest.approx(expected, rel=1e-5)

    @pytest.mark.slow
    def test_random_states(self, random_state, rng):
        for _ in range(20):
            s2 = int(rng.integers(1, 64))
            psi = random_state(s2, s2 + int(rng.integers(0, 40)))
            assert heisenberg_rhs_check(build(psi.subspace), psi) <= 1e-5

    def test_second_derivatives_are_antisymmetric(self, random_state):
        psi = random_state(20, 26)
        H = build(psi.subspace)
        d1 = fd_second_derivative(H, psi, "en1")
        d2 = fd_second_derivative(H, psi, "en2")
        d3 = fd_second_derivative(H, psi, "en3")
        assert d2 == pytest.approx(-d1, rel=1e-6, abs=1e-6)
        assert d3 == pytest.approx(-d1, rel=1e-6, abs=1e-6)
        r1, r2, r3 = number_operator_rhs(psi)
        assert r2 == pytest.approx(-r1, rel=1e-12)
        assert r3 == pytest.approx(-r1, rel=1e-12)


def test_export_timeseries(tmp_out):
    H, psi0 = ground(3, 4)
    cfg = EvolutionConfig.uniform(0.2, 3, with_probabilities=True)
    result = evolve_observables(H, psi0, cfg)
    response = export_timeseries(result, tmp_out / "ts.csv", with_probabilities=True)
    assert response.success
    with open(tmp_out / "ts.csv") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["tau", "en1", "en2", "en3", "var_n1", "p0", "p1", "p2", "p3"]
    assert rows[1][:5] == ["0.0", "3.0", "1.0", "0.0", "0.0"]
    assert len(rows) == 4


def test_export_without_probabilities_is_refused(tmp_out):
    H, psi0 = ground(3, 4)
    result = evolve_observables(H, psi0, EvolutionConfig.uniform(0.2, 3))
    response = export_timeseries(result, tmp_out / "ts.csv", with_probabilities=True)
    assert not response.success
    assert response.error.code == "VALIDATION_ERROR"
