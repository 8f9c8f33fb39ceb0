from dataclasses import dataclass, field
from typing import Iterator, List, Optional

import numpy as np

from apps.fock.models import SubspaceSpec


def _frozen(array) -> np.ndarray:
    array = np.array(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of one H.

    ``beta[j, k]`` is the component of eigenvector j on basis state psi_k.
    """

    spec: SubspaceSpec
    lambdas: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "lambdas", _frozen(self.lambdas))
        object.__setattr__(self, "vectors", _frozen(self.vectors))

    @property
    def d(self) -> int:
        return len(self.lambdas)

    @property
    def beta(self) -> np.ndarray:
        return self.vectors.T

    @property
    def scale(self) -> float:
        """max |lambda|, or 1 for the single-state subspace."""
        top = float(np.max(np.abs(self.lambdas)))
        return top if top > 0.0 else 1.0

    def weights(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.vectors.T @ amplitudes

    def phases(self, taus) -> np.ndarray:
        """exp(-i lambda_j tau) with shape (d,) + shape(taus)."""
        taus = np.asarray(taus, dtype=float)
        return np.exp(-1j * np.multiply.outer(self.lambdas, taus))

    def propagate(self, amplitudes: np.ndarray, taus) -> np.ndarray:
        """V exp(-i Lambda tau) V^T alpha for a scalar tau or a grid (columns)."""
        eps = self.weights(amplitudes)
        phases = self.phases(taus)
        if phases.ndim == 1:
            return self.vectors @ (eps * phases)
        return self.vectors @ (eps[:, None] * phases)

    def kernel_index(self) -> Optional[int]:
        """Index of the zero eigenvalue of an odd-dimensional spectrum."""
        if self.d % 2 == 0:
            return None
        k = self.d // 2
        if abs(self.lambdas[k]) <= 1e-9 * self.scale:
            return k
        return None


@dataclass(frozen=True)
class SpectralLine:
    freq: float
    weight: complex
    i: int
    j: int


@dataclass(frozen=True)
class SpectralLines:
    """Every ordered eigenpair (i, j) of an <n3>(tau) expansion.

    ``retained`` marks the lines above the pruning threshold; reconstruction
    always uses all of them.
    """

    freq: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)
    i: np.ndarray = field(repr=False)
    j: np.ndarray = field(repr=False)
    retained: np.ndarray = field(repr=False)
    threshold: float = 0.0

    def __len__(self):
        return len(self.freq)

    def __iter__(self) -> Iterator[SpectralLine]:
        for k in range(len(self.freq)):
            yield self[k]

    def __getitem__(self, k) -> SpectralLine:
        return SpectralLine(
            float(self.freq[k]), complex(self.weight[k]), int(self.i[k]), int(self.j[k])
        )

    @property
    def n_retained(self) -> int:
        return int(np.count_nonzero(self.retained))

    def retained_lines(self) -> List[SpectralLine]:
        return [self[k] for k in np.flatnonzero(self.retained)]

    def zero_frequency_weight(self) -> complex:
        return complex(np.sum(self.weight[self.i == self.j]))


@dataclass(frozen=True)
class SpacingReport:
    base: float
    max_deviation: float
    threshold: float

    @property
    def linear_verdict(self) -> bool:
        return self.max_deviation < self.threshold


@dataclass(frozen=True)
class FrequencyCounts:
    n_distinct: int
    # distinct multiples of the progression base; None for a nonlinear spectrum
    n_lattice: Optional[int]
    n_lines: int
    n_retained: int
    n_retained_distinct: int


@dataclass(frozen=True)
class RecurrenceResult:
    tau_rec: Optional[float]
    fidelity: Optional[float]
    degenerate: bool
    threshold: float
    horizon: float
    max_fidelity: float
    taus: np.ndarray = field(repr=False)
    trace: np.ndarray = field(repr=False)

    @property
    def found(self) -> bool:
        return self.tau_rec is not None
