import csv
import json

import numpy as np
import pytest

from apps.classical.models import GrowthRate
from apps.classical.queries import classical_growth_rate, classical_linear_params
from apps.evolve.inputs import EvolutionConfig
from apps.fock.models import SubspaceSpec, WaveFunction
from apps.fock.queries import expectations, variance_n1
from apps.hamiltonian.queries import build
from apps.spectral.queries import eigensystem
from core.exceptions import (
    BoundaryError,
    BranchError,
    DegenerateError,
    DomainError,
    IndexOutOfRange,
)

from .models import QuantumLinearParams, SpreadSpec
from .mutations import COMPARISON_HEADER, export_comparison, export_params
from .queries import (
    compare_linear,
    determine_C1,
    divergence_time,
    initial_variance,
    n1_slope,
    quantum_growth_rate,
    quantum_linear_params,
    quantum_linear_solution,
    spread_state,
    variance_growth_bound,
    variance_slope,
)

ONSET = SubspaceSpec(103, 110)


def onset_state():
    return spread_state(ONSET, SpreadSpec(3, 0.1))


def shifted(H, psi, tau):
    # exact propagation, negative times included
    return WaveFunction(psi.subspace, eigensystem(H).propagate(psi.amplitudes, tau))


def twisted(psi, k=0.7):
    phases = np.exp(1j * k * psi.subspace.indices)
    return WaveFunction(psi.subspace, psi.amplitudes * phases)


class TestSpreadState:
    def test_zero_spread_is_basis_state(self):
        psi = spread_state(SubspaceSpec(10, 12), SpreadSpec(4, 0.0))
        expected = WaveFunction.basis(psi.subspace, 4)
        assert psi.amplitudes.tolist() == expected.amplitudes.tolist()

    def test_geometric_profile(self):
        psi = spread_state(SubspaceSpec(20, 20), SpreadSpec(10, 0.5))
        alpha = psi.amplitudes.real
        for k in range(-10, 11):
            assert alpha[10 + k] / alpha[10] == pytest.approx(0.5 ** abs(k), rel=1e-14)
        assert psi.norm_error() < 1e-14

    def test_onset_expectations(self):
        assert np.allclose(expectations(onset_state()), (100, 10, 3), atol=0.05)

    @pytest.mark.parametrize("epsilon", [-0.1, 1.0, 1.5])
    def test_bad_spread(self, epsilon):
        with pytest.raises(DomainError):
            SpreadSpec(3, epsilon)

    def test_center_outside_subspace(self):
        with pytest.raises(IndexOutOfRange):
            spread_state(SubspaceSpec(4, 4), SpreadSpec(5, 0.1))


class TestInitialVariance:
    def test_no_spread(self):
        assert initial_variance(0.0) == 0.0

    def test_onset_value(self):
        assert initial_variance(0.1) == pytest.approx(0.020406, abs=1e-6)

    @pytest.mark.parametrize("epsilon", [0.1, 0.3])
    def test_matches_constructed_state(self, epsilon):
        psi = spread_state(SubspaceSpec(60, 70), SpreadSpec(30, epsilon))
        assert variance_n1(psi) == pytest.approx(initial_variance(epsilon), abs=1e-6)

    def test_series_form(self):
        eps = 0.4
        n = np.arange(200)
        series = (
            2 * eps**2 * (1 - eps**2) / (1 + eps**2) ** 2
            * np.sum(eps ** (2 * n) * (2 * n * (n + 1) + 1))
        )
        assert initial_variance(eps) == pytest.approx(series, rel=1e-12)

    def test_rejects_unit_spread(self):
        with pytest.raises(DomainError):
            initial_variance(1.0)


class TestVarianceGrowth:
    def test_onset_bound(self):
        growth = variance_growth_bound(ONSET, SpreadSpec(3, 0.1))
        assert growth.valid_until == pytest.approx(1 / np.sqrt(4400))
        assert growth.slope == pytest.approx(0.2 * (np.sqrt(4400) - np.sqrt(3030)))
        assert growth.slope == pytest.approx(2.2574, abs=1e-4)

    def test_no_spread_no_slope(self):
        assert variance_growth_bound(ONSET, SpreadSpec(3, 0.0)).slope == 0.0

    @pytest.mark.parametrize("m", [0, 103])
    def test_boundaries(self, m):
        with pytest.raises(BoundaryError):
            variance_growth_bound(ONSET, SpreadSpec(m, 0.1))

    def test_real_states_start_flat(self):
        H = build(ONSET)
        assert variance_slope(H, onset_state()) == pytest.approx(0.0, abs=1e-12)
        assert n1_slope(H, onset_state()) == pytest.approx(0.0, abs=1e-12)

    def test_short_time_growth_stays_under_bound(self):
        H, psi = build(ONSET), onset_state()
        growth = variance_growth_bound(ONSET, SpreadSpec(3, 0.1))
        for tau in np.linspace(0, growth.valid_until / 100, 6)[1:]:
            change = variance_n1(shifted(H, psi, tau)) - variance_n1(psi)
            assert abs(change) <= growth.slope * tau

    def test_slope_matches_finite_difference(self, random_state):
        psi = random_state(12, 17)
        H = build(psi.subspace)
        h = 1e-5
        fd = (variance_n1(shifted(H, psi, h)) - variance_n1(shifted(H, psi, -h))) / (
            2 * h
        )
        assert variance_slope(H, psi) == pytest.approx(fd, rel=1e-6, abs=1e-8)


class TestGrowthRate:
    def test_onset(self):
        growth = quantum_growth_rate(100, 10, 3)
        assert growth.squared == pytest.approx(346)
        assert growth.unstable

    def test_pump_only(self):
        assert quantum_growth_rate(100, 0, 0).rate == pytest.approx(2 * np.sqrt(99.5))

    def test_stable(self):
        assert quantum_growth_rate(100, 900, 0).stable

    def test_classical_limit(self):
        gaps = []
        for n in (1e2, 1e3, 1e4):
            quantum = quantum_growth_rate(n, 0, 0).rate
            ratio = quantum / classical_growth_rate(n, 0, 0).rate
            gaps.append(abs(ratio - 1))
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 3e-5


class TestLinearParams:
    def test_onset(self):
        params = quantum_linear_params(build(ONSET), onset_state())
        assert params.delta1_0 == pytest.approx(0.020406, abs=1e-5)
        assert params.gammaQ_sq == pytest.approx(346, abs=0.5)
        # real amplitudes start flat, so C1 is -BQ / (2 gammaQ^2)
        expected = -params.BQ / (2 * params.gammaQ_sq)
        assert params.C1 == pytest.approx(expected, rel=1e-12)
        assert params.C1 == pytest.approx(-3.9594, abs=1e-4)
        assert params.valid_until == pytest.approx(1 / np.sqrt(4400))

    def test_b_extends_classical_b(self):
        psi = spread_state(SubspaceSpec(40, 45), SpreadSpec(2, 0.2))
        params = quantum_linear_params(build(psi.subspace), psi)
        n1, n2, n3 = params.n_init
        BC = classical_linear_params(n1, n2, n3).BC
        assert params.BQ == pytest.approx(BC + 2 * n1 - 6 * params.delta1_0, rel=1e-12)

    def test_basis_state_c1(self):
        H = build(ONSET)
        params = quantum_linear_params(H, WaveFunction.basis(ONSET, 3))
        assert params.delta1_0 == 0.0
        assert params.C1 == pytest.approx(-params.BQ / (2 * params.gammaQ_sq))

    def test_c1_reproduces_initial_slope(self):
        H = build(ONSET)
        psi = twisted(spread_state(ONSET, SpreadSpec(3, 0.3)))
        params = quantum_linear_params(H, psi)
        h = 1e-5
        fd = (
            expectations(shifted(H, psi, h))[0] - expectations(shifted(H, psi, -h))[0]
        ) / (2 * h)
        slope = params.gammaQ * (2 * params.C1 + params.BQ / params.gammaQ_sq)
        assert abs(fd) > 1.0
        assert slope == pytest.approx(fd, rel=1e-6)

    def test_degenerate_growth(self):
        H = build(ONSET)
        params = QuantumLinearParams(GrowthRate.from_radicand(0.0), 1.0, 0.0, (1, 1, 1))
        with pytest.raises(DegenerateError):
            determine_C1(H, onset_state(), params)

    def test_stable_state_has_no_c1(self):
        spec = SubspaceSpec(100, 1000)
        params = quantum_linear_params(build(spec), WaveFunction.basis(spec, 0))
        assert params.growth.stable and params.C1 is None
        with pytest.raises(BranchError):
            quantum_linear_solution(params, 0.1)


class TestLinearSolution:
    @pytest.mark.parametrize("spread", [0.1, 0.3])
    def test_starts_at_zero_with_exact_slope(self, spread):
        psi = twisted(spread_state(ONSET, SpreadSpec(3, spread)))
        params = quantum_linear_params(build(ONSET), psi)
        assert quantum_linear_solution(params, 0.0) == pytest.approx(0.0, abs=1e-12)
        h = 1e-5
        f0, f1, f2 = quantum_linear_solution(params, [0.0, h, 2 * h])
        slope = (-3 * f0 + 4 * f1 - f2) / (2 * h)
        expected = params.gammaQ * (2 * params.C1 + params.BQ / params.gammaQ_sq)
        assert abs(expected) > 1.0
        assert slope == pytest.approx(expected, rel=1e-5)

    def test_real_state_starts_flat(self):
        params = quantum_linear_params(build(ONSET), onset_state())
        h = 1e-5
        f0, f1, f2 = quantum_linear_solution(params, [0.0, h, 2 * h])
        assert (-3 * f0 + 4 * f1 - f2) / (2 * h) == pytest.approx(0.0, abs=1e-4)

    def test_negative_time(self):
        params = quantum_linear_params(build(ONSET), onset_state())
        with pytest.raises(DomainError):
            quantum_linear_solution(params, -0.1)

    @pytest.mark.slow
    def test_onset_window(self):
        cfg = EvolutionConfig.uniform(0.14, 141)
        comparison = compare_linear(build(ONSET), onset_state(), cfg)
        exact, linear = comparison.dn1_exact, comparison.dn1_linear
        early = (comparison.taus <= 0.1 + 1e-12) & (np.abs(exact) >= 1.0)
        assert np.all(np.abs(linear - exact)[early] <= 0.1 * np.abs(exact)[early])
        assert abs(linear[-1]) == pytest.approx(50, abs=5)
        assert abs(linear[-1] - exact[-1]) > 8
        onset = divergence_time(comparison)
        assert onset is not None and 0.1 < onset <= 0.14


def test_export(tmp_out):
    cfg = EvolutionConfig.uniform(0.02, 3)
    comparison = compare_linear(build(ONSET), onset_state(), cfg)
    assert export_params(comparison.params, tmp_out / "params.json").success
    assert export_comparison(comparison, tmp_out / "compare.csv").success
    payload = json.loads((tmp_out / "params.json").read_text())
    assert set(payload) == {
        "gammaQ",
        "gammaQ_sq",
        "BQ",
        "C1",
        "delta1_0",
        "valid_until",
    }
    with open(tmp_out / "compare.csv") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == COMPARISON_HEADER
    assert float(rows[1][3]) == 0.0
    assert abs(float(rows[1][4])) < 1e-12
