import csv

import numpy as np
import pytest

from core.exceptions import BranchError, DomainError

from . import queries
from .models import ClassicalState
from .mutations import TRAJECTORY_HEADER, export_trajectory
from .queries import (
    classical_growth_rate,
    classical_linear_params,
    classical_linear_solution,
    equal_daughter_solution,
    equilibrium_growth_rate,
    integrate_actions,
    integrate_amplitudes,
)

PUMP_ACTIONS = (100.0, 10.0, 3.0)


class TestGrowthRate:
    def test_equilibrium(self):
        growth = equilibrium_growth_rate(25.0)
        assert growth.unstable
        assert growth.rate == pytest.approx(10.0)

    def test_pump_actions(self):
        growth = classical_growth_rate(*PUMP_ACTIONS)
        assert growth.rate == pytest.approx(2 * np.sqrt(87))
        assert growth.rate == pytest.approx(18.655, abs=1e-3)

    def test_stable_marker(self):
        growth = classical_growth_rate(1, 1, 1)
        assert growth.stable
        assert growth.squared == pytest.approx(-4.0)
        assert growth.rate == pytest.approx(2.0)


class TestLinearSolution:
    def test_constants(self):
        params = classical_linear_params(*PUMP_ACTIONS)
        assert params.BC == pytest.approx(2540.0)
        gamma = params.gammaC
        assert params.c1_printed == pytest.approx(
            np.sqrt(3000) / gamma - 2540 / gamma**2
        )

    def test_vanishes_at_zero(self):
        assert classical_linear_solution(*PUMP_ACTIONS, 0.0) == pytest.approx(0.0)

    def test_initial_slope_matches_amplitude_equations(self):
        params = classical_linear_params(*PUMP_ACTIONS)
        gamma = params.gammaC
        slope = gamma * (2 * params.C1 + params.BC / gamma**2)
        assert slope == pytest.approx(2 * np.sqrt(3000))

        trajectory = integrate_amplitudes(
            ClassicalState.from_actions(*PUMP_ACTIONS), 1e-4, dt=1e-6
        )
        I1 = trajectory.actions[:, 0]
        numeric = (I1[1] - I1[0]) / (trajectory.times[1] - trajectory.times[0])
        assert numeric == pytest.approx(slope, rel=1e-3)

    def test_printed_constant_gives_other_slope(self):
        params = classical_linear_params(*PUMP_ACTIONS)
        gamma = params.gammaC
        printed_slope = gamma * (2 * params.c1_printed + params.BC / gamma**2)
        expected = 2 * np.sqrt(3000) - params.BC / gamma
        assert printed_slope == pytest.approx(expected)

    def test_stable_branch_refused(self):
        with pytest.raises(BranchError) as exc:
            classical_linear_solution(1, 1, 1, 0.1)
        assert exc.value.code == "STABLE_BRANCH"
        assert classical_linear_params(1, 1, 1).C1 is None

    def test_equilibrium_limit(self):
        # with no daughter waves the solution stays on the equilibrium
        assert classical_linear_solution(50.0, 0.0, 0.0, 0.3) == pytest.approx(0.0)

    @pytest.mark.slow
    def test_agrees_with_nonlinear_while_small(self):
        trajectory = integrate_amplitudes(
            ClassicalState.from_actions(*PUMP_ACTIONS), 0.2, dt=1e-4
        )
        exact = trajectory.actions[:, 0] - PUMP_ACTIONS[0]
        linear = classical_linear_solution(*PUMP_ACTIONS, trajectory.times)
        gamma_sq = classical_growth_rate(*PUMP_ACTIONS).squared
        small = np.abs(exact) < gamma_sq / 15
        assert small.sum() > 1000
        assert np.max(np.abs(linear - exact)[small]) / PUMP_ACTIONS[0] <= 0.05


class TestIntegrateAmplitudes:
    def test_pump_only_is_stationary(self):
        trajectory = integrate_amplitudes([1, 0, 0], 1.0, dt=1e-2)
        assert np.all(trajectory.amplitudes == np.array([1, 0, 0]))

    def test_real_positive_start_raises_pump(self):
        trajectory = integrate_amplitudes(
            ClassicalState.from_actions(*PUMP_ACTIONS), 0.01, dt=1e-4
        )
        acts = trajectory.actions
        assert acts[1, 0] > acts[0, 0]
        assert acts[1, 1] < acts[0, 1] and acts[1, 2] < acts[0, 2]

    @pytest.mark.slow
    def test_conservation_at_default_step(self):
        trajectory = integrate_amplitudes(
            ClassicalState.from_actions(*PUMP_ACTIONS), 0.2
        )
        assert trajectory.s2[0] == pytest.approx(103.0)
        assert trajectory.s3[0] == pytest.approx(110.0)
        assert trajectory.conservation_drift() <= 1e-8

    def test_equal_daughters_follow_tanh(self):
        A0 = [np.sqrt(100.0), np.sqrt(10.0), -np.sqrt(10.0)]
        trajectory = integrate_amplitudes(A0, 0.3, dt=1e-4)
        I1, I2, I3 = equal_daughter_solution(100.0, 10.0, trajectory.times)
        actions = trajectory.actions
        assert np.sqrt(np.mean((actions[:, 0] - I1) ** 2)) < 1e-3
        assert np.sqrt(np.mean((actions[:, 1] - I2) ** 2)) < 1e-3
        assert np.allclose(actions[:, 1], actions[:, 2])

    def test_rejects_bad_step(self):
        with pytest.raises(DomainError):
            integrate_amplitudes([1, 1, 1], 1.0, dt=0.0)

    def test_states_iterate_with_times(self):
        trajectory = integrate_amplitudes([1, 0.5, 0.5], 0.1, dt=0.05)
        states = list(trajectory)
        assert [s.t for s in states] == pytest.approx([0.0, 0.05, 0.1])


class TestIntegrateActions:
    def test_equilibrium_stays_put(self):
        trajectory = integrate_actions((100, 0, 0), 100, 100, 0.5, 1e-3, 0.0)
        assert np.all(trajectory.actions[:, 0] == 100.0)

    def test_inconsistent_invariants(self):
        with pytest.raises(DomainError):
            integrate_actions((100, 10, 3), 100, 110, 0.1, 1e-3, 0.0)

    def test_oscillates_when_stable(self):
        trajectory = integrate_actions((1, 1, 1), 2, 2, 20.0, 1e-3, 0.0)
        I1 = trajectory.actions[:, 0]
        assert I1.max() <= 2.0 + 1e-9
        assert I1.min() >= -1e-9

    def test_matches_amplitude_integration(self):
        amplitudes = integrate_amplitudes(
            ClassicalState.from_actions(*PUMP_ACTIONS), 0.2, dt=1e-4
        )
        actions = integrate_actions(
            PUMP_ACTIONS, 103, 110, 0.2, 1e-4, 2 * np.sqrt(3000)
        )
        diff = actions.actions[:, 0] - amplitudes.actions[:, 0]
        assert np.sqrt(np.mean(diff**2)) < 1e-6

    def test_second_derivatives_are_antisymmetric(self):
        trajectory = integrate_actions(
            PUMP_ACTIONS, 103, 110, 0.2, 1e-4, 2 * np.sqrt(3000)
        )
        assert trajectory.antisymmetry_residual() < 1e-6

    def test_daughters_follow_their_own_equations(self):
        trajectory = integrate_actions(
            PUMP_ACTIONS, 103, 110, 0.2, 1e-4, 2 * np.sqrt(3000)
        )
        I1, I2, I3 = trajectory.actions.T
        assert np.max(np.abs(I2 - (110 - I1))) < 1e-8
        assert np.max(np.abs(I3 - (103 - I1))) < 1e-8
        assert trajectory.rates[0] == pytest.approx(
            [2 * np.sqrt(3000), -2 * np.sqrt(3000), -2 * np.sqrt(3000)]
        )

    def test_antisymmetry_residual_catches_mismatched_equations(self, monkeypatch):
        exact = queries.action_rhs

        def skewed(s2, s3):
            rhs = exact(s2, s3)

            def f(y):
                out = rhs(y)
                out[3] *= 1.5
                return out

            return f

        monkeypatch.setattr(queries, "action_rhs", skewed)
        trajectory = integrate_actions(
            PUMP_ACTIONS, 103, 110, 0.05, 1e-4, 2 * np.sqrt(3000)
        )
        assert trajectory.antisymmetry_residual() > 0.1

    def test_fourth_order_convergence(self):
        args = (PUMP_ACTIONS, 103, 110, 0.2)
        slope = 2 * np.sqrt(3000)
        reference = integrate_actions(*args, 1.25e-4, slope).actions[::16, 0]
        coarse = integrate_actions(*args, 2e-3, slope).actions[:, 0]
        fine = integrate_actions(*args, 1e-3, slope).actions[::2, 0]
        ratio = np.max(np.abs(coarse - reference)) / np.max(np.abs(fine - reference))
        assert 10 < ratio < 22


def test_export_trajectory(tmp_out):
    trajectory = integrate_amplitudes([1, 0.5, 0.5j], 0.02, dt=0.01)
    response = export_trajectory(trajectory, tmp_out / "classical.csv")
    assert response.success
    with open(tmp_out / "classical.csv") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == TRAJECTORY_HEADER
    assert len(rows) == 4
    assert float(rows[1][-1]) == 0.5
