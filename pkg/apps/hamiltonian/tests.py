import csv
import json

import numpy as np
import pytest
from scipy.linalg import eigvalsh

from apps.fock.models import SubspaceSpec, WaveFunction
from apps.fock.queries import basis_state
from core.exceptions import IndexOutOfRange, ShapeMismatch

from .mutations import export_couplings
from .queries import apply, build, complex_phase_matrix, coupling, dense


class TestCoupling:
    def test_first_coupling_of_cascade(self):
        assert coupling(SubspaceSpec(100, 100), 0) == pytest.approx(10.0)

    def test_small_subspace(self):
        assert coupling(SubspaceSpec(2, 2), 1) == pytest.approx(2.0)

    def test_spread_center(self):
        assert coupling(SubspaceSpec(103, 110), 3) == pytest.approx(np.sqrt(4400))

    @pytest.mark.parametrize("i", [-1, 2])
    def test_out_of_range(self, i):
        with pytest.raises(IndexOutOfRange):
            coupling(SubspaceSpec(2, 2), i)


class TestBuild:
    def test_small_subspace(self):
        H = build(SubspaceSpec(2, 2))
        assert np.allclose(H.offdiag, [np.sqrt(2), 2.0])

    def test_stable_system_dimension(self):
        H = build(SubspaceSpec(100, 1000))
        assert dense(H).shape == (101, 101)
        assert np.all(H.offdiag > 0)

    def test_single_state(self):
        H = build(SubspaceSpec(0, 0))
        assert dense(H).tolist() == [[0.0]]

    def test_matches_elementwise_coupling(self):
        spec = SubspaceSpec(17, 23)
        H = build(spec)
        for i in range(spec.s2):
            assert H.offdiag[i] == pytest.approx(coupling(spec, i), rel=1e-15)

    def test_zero_diagonal(self):
        assert np.all(np.diag(dense(build(SubspaceSpec(9, 9)))) == 0.0)


class TestApply:
    def test_columns(self):
        H = build(SubspaceSpec(2, 2))
        e0 = WaveFunction.basis(H.spec, 0)
        e1 = WaveFunction.basis(H.spec, 1)
        assert np.allclose(apply(H, e0), [0, np.sqrt(2), 0])
        assert np.allclose(apply(H, e1), [np.sqrt(2), 0, 2])

    def test_zero_vector(self):
        H = build(SubspaceSpec(5, 8))
        assert np.all(apply(H, np.zeros(6)) == 0)

    def test_dimension_mismatch(self):
        H = build(SubspaceSpec(5, 8))
        with pytest.raises(ShapeMismatch):
            apply(H, np.zeros(5))
        with pytest.raises(ShapeMismatch):
            apply(H, WaveFunction.basis(SubspaceSpec(5, 9), 0))

    def test_batched_columns_match_dense(self, rng):
        H = build(SubspaceSpec(12, 19))
        X = rng.normal(size=(13, 4)) + 1j * rng.normal(size=(13, 4))
        assert np.allclose(apply(H, X), dense(H) @ X, rtol=1e-14, atol=1e-12)

    def test_hermiticity(self, rng):
        H = build(SubspaceSpec(30, 41))
        phi = rng.normal(size=31) + 1j * rng.normal(size=31)
        psi = rng.normal(size=31) + 1j * rng.normal(size=31)
        left = np.vdot(phi, apply(H, psi))
        right = np.vdot(apply(H, phi), psi)
        assert abs(left - right) <= 1e-12 * abs(left)

    def test_stays_inside_subspace(self):
        spec = SubspaceSpec(6, 9)
        H = build(spec)
        for i in range(spec.d):
            image = apply(H, WaveFunction.basis(spec, i))
            for j in np.flatnonzero(image):
                assert abs(i - j) == 1
                state = basis_state(spec, int(j))
                assert state.n1 + state.n3 == spec.s2
                assert state.n1 + state.n2 == spec.s3


class TestSpectrumSymmetry:
    @pytest.mark.parametrize("s2,s3", [(4, 4), (5, 9), (10, 30)])
    def test_plus_minus_pairs(self, s2, s3):
        lam = eigvalsh(dense(build(SubspaceSpec(s2, s3))))
        assert np.allclose(lam, -lam[::-1], atol=1e-10 * np.abs(lam).max())
        if (s2 + 1) % 2:
            assert np.sum(np.abs(lam) < 1e-9 * np.abs(lam).max()) == 1


class TestComplexPhase:
    def test_minus_i_recovers_real_matrix(self):
        H = build(SubspaceSpec(4, 6))
        assert np.allclose(complex_phase_matrix(H, -np.pi / 2), dense(H))

    @pytest.mark.parametrize("theta", [0.0, 0.7, 2.5])
    def test_hermitian_with_same_spectrum(self, theta):
        H = build(SubspaceSpec(4, 6))
        M = complex_phase_matrix(H, theta)
        assert np.allclose(M, M.conj().T)
        assert np.allclose(eigvalsh(M), eigvalsh(dense(H)))


class TestExport:
    def test_csv(self, tmp_out):
        H = build(SubspaceSpec(2, 2))
        response = export_couplings(H, tmp_out / "h.csv")
        assert response.success
        with open(tmp_out / "h.csv") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["i", "h_i"]
        assert rows[2] == ["1", "2.0"]
        assert float(rows[1][1]) == np.sqrt(2)

    def test_json(self, tmp_out):
        H = build(SubspaceSpec(2, 3))
        response = export_couplings(H, tmp_out / "h.json", format="json")
        payload = json.loads((tmp_out / "h.json").read_text())
        assert response.artifact.bytes == (tmp_out / "h.json").stat().st_size
        assert payload["d"] == 3 and len(payload["couplings"]) == 2

    def test_unknown_format_is_reported(self, tmp_out):
        response = export_couplings(build(SubspaceSpec(2, 2)), tmp_out / "h", "xml")
        assert not response.success
        assert response.error.code == "VALIDATION_ERROR"
