from typing import Optional, Tuple

import numpy as np

from core import settings
from core.exceptions import IndexOutOfRange

from .models import BasisState, ObservableSnapshot, SubspaceSpec, WaveFunction


def subspace_dimension(s2: int, s3: int) -> SubspaceSpec:
    return SubspaceSpec(s2, s3)


def basis_state(spec: SubspaceSpec, i: int) -> BasisState:
    if isinstance(i, bool) or int(i) != i or not 0 <= i <= spec.s2:
        raise IndexOutOfRange(f"basis index {i!r} outside [0, {spec.s2}]")
    i = int(i)
    return BasisState(index=i, n1=spec.s2 - i, n2=spec.s3 - spec.s2 + i, n3=i)


def probabilities(psi: WaveFunction) -> np.ndarray:
    return psi.probabilities


def expectations(
    psi: WaveFunction, tol: Optional[float] = None
) -> Tuple[float, float, float]:
    """(<n1>, <n2>, <n3>) of a normalized state.

    <n3> is the probability-weighted mean index; the other two follow from the
    subspace labels, so s2 and s3 are conserved by construction.
    """
    psi.require_normalized(tol)
    spec = psi.subspace
    en3 = float(np.dot(psi.probabilities, spec.indices))
    en1 = spec.s2 - en3
    return en1, spec.s3 - en1, en3


def variance_n1(psi: WaveFunction, tol: Optional[float] = None) -> float:
    psi.require_normalized(tol)
    p = psi.probabilities
    n1 = psi.subspace.n1_values
    mean = float(np.dot(p, n1))
    # centered form keeps the cancellation error at the size of the variance
    variance = float(np.dot(p, (n1 - mean) ** 2))
    return max(variance, 0.0)


def second_moment_n1(psi: WaveFunction, tol: Optional[float] = None) -> float:
    psi.require_normalized(tol)
    return float(np.dot(psi.probabilities, psi.subspace.n1_values**2))


def snapshot(
    psi: WaveFunction,
    tau: float,
    with_probabilities: bool = False,
    tol: Optional[float] = None,
) -> ObservableSnapshot:
    en1, en2, en3 = expectations(psi, tol)
    return ObservableSnapshot(
        tau=float(tau),
        en1=en1,
        en2=en2,
        en3=en3,
        variance_n1=variance_n1(psi, tol),
        probabilities=psi.probabilities if with_probabilities else None,
    )


def conservation_error(psi: WaveFunction) -> Tuple[float, float]:
    """Relative deviation of (<s2>, <s3>) from the subspace labels.

    Evaluated from the full occupation sums rather than the shortcut used by
    ``expectations``.
    """
    spec = psi.subspace
    p = psi.probabilities / np.sum(psi.probabilities)
    i = spec.indices
    en1 = float(np.dot(p, spec.s2 - i))
    en2 = float(np.dot(p, spec.s3 - spec.s2 + i))
    en3 = float(np.dot(p, i))
    scale2 = max(spec.s2, 1)
    scale3 = max(spec.s3, 1)
    return abs(en1 + en3 - spec.s2) / scale2, abs(en1 + en2 - spec.s3) / scale3


def within_conservation(psi: WaveFunction) -> bool:
    err2, err3 = conservation_error(psi)
    return max(err2, err3) <= settings.CONSERVATION_TOLERANCE
