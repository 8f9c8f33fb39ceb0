import csv
import json

import numpy as np
import pytest

from apps.evolve.inputs import EvolutionConfig
from apps.evolve.queries import evolve_observables
from apps.fock.models import SubspaceSpec, WaveFunction
from apps.fock.queries import expectations
from apps.hamiltonian.queries import build, dense
from core.exceptions import DomainError

from .mutations import (
    export_diagnostics,
    export_fidelity,
    export_lines,
    export_recurrence,
    export_spectrum,
    export_weights,
)
from .queries import (
    count_distinct_frequencies,
    eigen_weights,
    eigensystem,
    fidelity,
    reconstruct_n3,
    recurrence_time,
    spacing_diagnostic,
    spectral_lines_n3,
)

STABLE = (100, 1000)
UNSTABLE = (100, 100)


def ground(s2, s3):
    H = build(SubspaceSpec(s2, s3))
    return H, WaveFunction.basis(H.spec, 0)


def participation(eps):
    p = np.abs(eps) ** 2
    return 1.0 / np.sum(p**2)


class TestEigensystem:
    def test_small_subspace(self):
        es = eigensystem(build(SubspaceSpec(2, 2)))
        assert es.lambdas == pytest.approx([-np.sqrt(6), 0.0, np.sqrt(6)], abs=1e-14)

    def test_single_state(self):
        es = eigensystem(build(SubspaceSpec(0, 0)))
        assert es.lambdas.tolist() == [0.0]
        assert es.vectors.tolist() == [[1.0]]

    @pytest.mark.slow
    def test_matches_dense_diagonalization(self):
        for s2 in range(0, 8):
            for s3 in range(s2, 13):
                H = build(SubspaceSpec(s2, s3))
                es = eigensystem(H)
                reference = np.linalg.eigvalsh(dense(H))
                assert np.allclose(es.lambdas, reference, rtol=0, atol=1e-10), (s2, s3)

    @pytest.mark.parametrize("s2,s3", [(2, 2), (9, 15), UNSTABLE, STABLE])
    def test_invariants(self, s2, s3):
        H = build(SubspaceSpec(s2, s3))
        es = eigensystem(H)
        V, lam = es.vectors, es.lambdas
        assert np.all(np.diff(lam) > 0)
        assert np.allclose(V.T @ V, np.eye(es.d), atol=1e-10)
        residual = np.linalg.norm(H.apply(V) - V * lam, axis=0)
        assert residual.max() <= 1e-9 * es.scale
        assert np.allclose(lam, -lam[::-1], rtol=0, atol=1e-9 * es.scale)
        largest = V[np.argmax(np.abs(V), axis=0), np.arange(es.d)]
        assert np.all(largest > 0)

    def test_kernel_of_odd_dimension(self):
        H = build(SubspaceSpec(6, 8))
        es = eigensystem(H)
        k = es.kernel_index()
        assert k == 3
        assert np.sum(np.abs(es.lambdas) <= 1e-9 * es.scale) == 1
        assert np.allclose(H.apply(es.vectors[:, k]), 0.0, atol=1e-12)
        assert eigensystem(build(SubspaceSpec(5, 8))).kernel_index() is None

    def test_cached_per_hamiltonian(self):
        H = build(SubspaceSpec(12, 20))
        assert eigensystem(H) is eigensystem(build(SubspaceSpec(12, 20)))

    def test_stable_base_frequency(self):
        es = eigensystem(build(SubspaceSpec(*STABLE)))
        assert es.lambdas[50] == pytest.approx(0.0, abs=1e-9 * es.scale)
        assert es.lambdas[51] > 0.0


class TestWeights:
    def test_eigenvector_picks_itself(self):
        H = build(SubspaceSpec(7, 9))
        es = eigensystem(H)
        eps = eigen_weights(WaveFunction(H.spec, es.vectors[:, 5]), es)
        assert np.allclose(eps, np.eye(8)[5], atol=1e-12)

    def test_parseval(self, random_state):
        psi = random_state(40, 55)
        eps = eigen_weights(psi, eigensystem(build(psi.subspace)))
        assert np.sum(np.abs(eps) ** 2) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("s2,s3", [UNSTABLE, STABLE])
    def test_energy_spread_is_first_coupling(self, s2, s3):
        H, psi0 = ground(s2, s3)
        es = eigensystem(H)
        eps = eigen_weights(psi0, es)
        spread = np.sum(np.abs(eps) ** 2 * es.lambdas**2)
        assert spread == pytest.approx(H.offdiag[0] ** 2, rel=1e-10)

    def test_stable_weights_spread_over_more_eigenvectors(self):
        H_s, psi_s = ground(*STABLE)
        H_u, psi_u = ground(*UNSTABLE)
        stable = participation(eigen_weights(psi_s, eigensystem(H_s)))
        unstable = participation(eigen_weights(psi_u, eigensystem(H_u)))
        assert stable > 2 * unstable


class TestSpectralLines:
    def test_eigenvector_has_only_static_line(self):
        H = build(SubspaceSpec(8, 10))
        es = eigensystem(H)
        psi = WaveFunction(H.spec, es.vectors[:, 3])
        lines = spectral_lines_n3(psi, es)
        kept = lines.retained_lines()
        assert len(kept) == 1
        assert kept[0].freq == 0.0 and (kept[0].i, kept[0].j) == (3, 3)
        assert kept[0].weight.real == pytest.approx(expectations(psi)[2])

    def test_conjugate_pairs(self, random_state):
        psi = random_state(6, 9)
        lines = spectral_lines_n3(psi, eigensystem(build(psi.subspace)))
        W = lines.weight.reshape(7, 7)
        F = lines.freq.reshape(7, 7)
        assert np.allclose(W, W.conj().T)
        assert np.allclose(F, -F.T)
        assert abs(lines.zero_frequency_weight().imag) < 1e-14

    def test_reconstruct_at_zero(self, random_state):
        psi = random_state(10, 10)
        lines = spectral_lines_n3(psi, eigensystem(build(psi.subspace)))
        assert reconstruct_n3(lines, 0.0) == pytest.approx(expectations(psi)[2])

    def test_small_subspace_against_propagation(self):
        H, psi0 = ground(2, 2)
        lines = spectral_lines_n3(psi0, eigensystem(H))
        result = evolve_observables(H, psi0, EvolutionConfig([0.0, 0.3]))
        assert reconstruct_n3(lines, 0.3) == pytest.approx(
            result.snapshots[-1].en3, abs=1e-9
        )

    @pytest.mark.slow
    def test_cascade_against_propagation(self):
        H, psi0 = ground(*UNSTABLE)
        lines = spectral_lines_n3(psi0, eigensystem(H))
        cfg = EvolutionConfig.uniform(0.5, 51)
        result = evolve_observables(H, psi0, cfg)
        reconstructed = reconstruct_n3(lines, cfg.tau_grid)
        assert np.max(np.abs(reconstructed - result.series("en3"))) <= 1e-7


class TestSpacing:
    def test_stable_is_linear(self):
        report = spacing_diagnostic(eigensystem(build(SubspaceSpec(*STABLE))))
        assert report.linear_verdict
        assert report.max_deviation < 1e-3
        assert report.base == pytest.approx(61.66, rel=0.01)

    def test_unstable_is_not(self):
        report = spacing_diagnostic(eigensystem(build(SubspaceSpec(*UNSTABLE))))
        assert not report.linear_verdict
        assert report.max_deviation >= 10 * report.threshold

    def test_three_points_always_fit(self):
        report = spacing_diagnostic(eigensystem(build(SubspaceSpec(2, 2))))
        assert report.linear_verdict
        assert report.base == pytest.approx(np.sqrt(6))
        assert report.max_deviation == pytest.approx(0.0, abs=1e-14)

    def test_needs_three_states(self):
        with pytest.raises(DomainError):
            spacing_diagnostic(eigensystem(build(SubspaceSpec(1, 1))))


class TestFrequencyCounts:
    def test_stable_lattice(self):
        H, psi0 = ground(*STABLE)
        es = eigensystem(H)
        counts = count_distinct_frequencies(es, spectral_lines_n3(psi0, es))
        assert counts.n_lattice == 101
        assert counts.n_lines == 101 * 101

    def test_unstable_counts(self):
        H, psi0 = ground(*UNSTABLE)
        es = eigensystem(H)
        counts = count_distinct_frequencies(es, spectral_lines_n3(psi0, es))
        assert counts.n_lattice is None
        assert counts.n_distinct <= 101**2 // 4 + 1
        assert counts.n_retained_distinct > 101

    def test_small_subspace(self):
        counts = count_distinct_frequencies(eigensystem(build(SubspaceSpec(2, 2))))
        # 0, sqrt(6), 2 sqrt(6)
        assert counts.n_distinct == 3
        assert counts.n_lattice == 3


class TestRecurrence:
    def test_fidelity_starts_at_one(self, random_state):
        psi = random_state(9, 12)
        es = eigensystem(build(psi.subspace))
        values = fidelity(es, psi, [0.0, 0.1, 0.2])
        assert values[0] == pytest.approx(1.0)
        assert np.all(values <= 1.0 + 1e-12)

    @pytest.mark.slow
    def test_stable_system_returns(self):
        H, psi0 = ground(*STABLE)
        result = recurrence_time(H, psi0, horizon=1.0, fidelity_threshold=0.99)
        assert result.found and not result.degenerate
        assert result.tau_rec == pytest.approx(0.1, rel=0.1)
        assert result.fidelity >= 0.99

    @pytest.mark.slow
    def test_unstable_system_never_returns(self):
        H, psi0 = ground(*UNSTABLE)
        result = recurrence_time(H, psi0, horizon=10.0, fidelity_threshold=0.99)
        assert not result.found
        assert result.max_fidelity < 0.99

    def test_eigenvector_is_degenerate(self):
        H = build(SubspaceSpec(4, 4))
        es = eigensystem(H)
        psi = WaveFunction(H.spec, es.vectors[:, 1])
        result = recurrence_time(H, psi, horizon=1.0, fidelity_threshold=0.9)
        assert result.degenerate
        assert result.tau_rec == result.taus[1]

    @pytest.mark.parametrize("horizon,threshold", [(0.0, 0.5), (1.0, 1.0), (1.0, 0)])
    def test_bad_arguments(self, horizon, threshold):
        H, psi0 = ground(2, 2)
        with pytest.raises(DomainError):
            recurrence_time(H, psi0, horizon, threshold)


class TestExport:
    def test_spectrum_and_weights(self, tmp_out):
        H, psi0 = ground(2, 2)
        es = eigensystem(H)
        assert export_spectrum(es, tmp_out / "spectrum.csv").success
        assert export_weights(es, eigen_weights(psi0, es), tmp_out / "w.csv").success
        with open(tmp_out / "spectrum.csv") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["k", "lambda_k"]
        assert float(rows[3][1]) == pytest.approx(np.sqrt(6))
        with open(tmp_out / "w.csv") as handle:
            assert next(csv.reader(handle)) == ["k", "lambda_k", "eps_re", "eps_im"]

    def test_weights_shape_checked(self, tmp_out):
        es = eigensystem(build(SubspaceSpec(2, 2)))
        response = export_weights(es, np.ones(2), tmp_out / "w.csv")
        assert response.error.code == "SHAPE_MISMATCH"

    def test_lines_and_diagnostics(self, tmp_out):
        H, psi0 = ground(4, 4)
        es = eigensystem(H)
        lines = spectral_lines_n3(psi0, es)
        response = export_lines(lines, tmp_out / "lines.csv")
        with open(tmp_out / "lines.csv") as handle:
            rows = list(csv.reader(handle))
        assert response.success
        assert len(rows) == lines.n_retained + 1

        report = spacing_diagnostic(es)
        counts = count_distinct_frequencies(es, lines, spacing=report)
        export_diagnostics(report, counts, tmp_out / "diag.json")
        payload = json.loads((tmp_out / "diag.json").read_text())
        assert payload["n_lines"] == 25
        assert set(payload) >= {
            "linear_verdict",
            "base",
            "max_deviation",
            "n_distinct_freqs",
        }

    def test_recurrence(self, tmp_out):
        H, psi0 = ground(2, 2)
        result = recurrence_time(H, psi0, horizon=5.0, fidelity_threshold=0.9)
        assert export_recurrence(result, tmp_out / "rec.json").success
        assert export_fidelity(result, tmp_out / "fidelity.csv").success
        payload = json.loads((tmp_out / "rec.json").read_text())
        assert payload["tau_rec"] == pytest.approx(result.tau_rec)
