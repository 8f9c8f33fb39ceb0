import numpy as np

from apps.fock.models import SubspaceSpec, WaveFunction
from core.exceptions import IndexOutOfRange, ShapeMismatch

from .models import TridiagonalHamiltonian


def coupling(spec: SubspaceSpec, i: int) -> float:
    """h_i = sqrt((s2 - i)(s3 - s2 + 1 + i)(i + 1)), linking psi_i and psi_{i+1}."""
    if not 0 <= i <= spec.s2 - 1:
        raise IndexOutOfRange(f"coupling index {i} outside [0, {spec.s2 - 1}]")
    return float(np.sqrt((spec.s2 - i) * (spec.s3 - spec.s2 + 1 + i) * (i + 1)))


def couplings(spec: SubspaceSpec) -> np.ndarray:
    i = np.arange(spec.s2, dtype=float)
    return np.sqrt((spec.s2 - i) * (spec.s3 - spec.s2 + 1 + i) * (i + 1))


def build(spec: SubspaceSpec) -> TridiagonalHamiltonian:
    return TridiagonalHamiltonian(spec, couplings(spec))


def apply(H: TridiagonalHamiltonian, psi) -> np.ndarray:
    if isinstance(psi, WaveFunction):
        if psi.subspace != H.spec:
            raise ShapeMismatch(f"state lives in {psi.subspace}, H in {H.spec}")
        psi = psi.amplitudes
    return H.apply(psi)


def dense(H: TridiagonalHamiltonian) -> np.ndarray:
    return H.dense()


def complex_phase_matrix(H: TridiagonalHamiltonian, theta: float) -> np.ndarray:
    """Dense Hamiltonian for coupling g = exp(i theta).

    H[i, i+1] = i g h_i and H[i+1, i] = -i conj(g) h_i; theta = -pi/2 gives back
    the real symmetric matrix.
    """
    g = np.exp(1j * theta)
    upper = 1j * g * H.offdiag
    return np.diag(upper, 1) + np.diag(np.conj(upper), -1)
