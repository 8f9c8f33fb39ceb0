from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from core import settings
from core.exceptions import (
    ConventionError,
    DomainError,
    IndexOutOfRange,
    NormalizationError,
    ShapeMismatch,
)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SubspaceSpec:
    """Invariant subspace of fixed s2 = n1 + n3 and s3 = n1 + n2 (s3 >= s2)."""

    s2: int
    s3: int

    def __post_init__(self):
        for name in ("s2", "s3"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise DomainError(f"{name} must be an integer, got {value!r}")
            if value < 0:
                raise DomainError(f"{name} must be nonnegative, got {value}")
            object.__setattr__(self, name, int(value))
        if self.s3 < self.s2:
            raise ConventionError(
                f"s3={self.s3} < s2={self.s2}; relabel waves 2 and 3 so that s3 >= s2"
            )

    @property
    def d(self) -> int:
        return self.s2 + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.d)

    @property
    def n1_values(self) -> np.ndarray:
        """n1 of every basis state, i.e. s2 - i."""
        return (self.s2 - self.indices).astype(float)

    def __str__(self):
        return f"subspace(s2={self.s2}, s3={self.s3}, d={self.d})"


@dataclass(frozen=True)
class BasisState:
    index: int
    n1: int
    n2: int
    n3: int

    @property
    def occupations(self) -> Tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)

    def __str__(self):
        return f"|{self.n1},{self.n2},{self.n3}>"


@dataclass(frozen=True)
class WaveFunction:
    """Amplitudes alpha_i over the basis states psi_i of one subspace.

    The norm is not enforced at construction: integrator drift is a diagnostic
    and is reported by the operations that need a normalized state.
    """

    subspace: SubspaceSpec
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex)
        if amplitudes.shape != (self.subspace.d,):
            raise ShapeMismatch(
                f"expected {self.subspace.d} amplitudes for {self.subspace}, "
                f"got shape {amplitudes.shape}"
            )
        if not np.all(np.isfinite(amplitudes)):
            raise NormalizationError("amplitudes contain non-finite values")
        object.__setattr__(self, "amplitudes", _frozen(amplitudes))

    @classmethod
    def basis(cls, subspace: SubspaceSpec, i: int) -> "WaveFunction":
        if not 0 <= i <= subspace.s2:
            raise IndexOutOfRange(f"basis index {i} outside [0, {subspace.s2}]")
        amplitudes = np.zeros(subspace.d, dtype=complex)
        amplitudes[i] = 1.0
        return cls(subspace, amplitudes)

    @classmethod
    def from_amplitudes(
        cls, subspace: SubspaceSpec, amplitudes, normalize: bool = False
    ) -> "WaveFunction":
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if normalize:
            norm = np.linalg.norm(amplitudes)
            if norm == 0.0:
                raise NormalizationError("cannot normalize the zero vector")
            amplitudes = amplitudes / norm
        return cls(subspace, amplitudes)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm_error(self) -> float:
        return abs(float(np.sum(self.probabilities)) - 1.0)

    def require_normalized(self, tol: Optional[float] = None) -> None:
        tol = settings.NORM_TOLERANCE if tol is None else tol
        error = self.norm_error()
        if error > tol:
            raise NormalizationError(
                f"wave function norm off by {error:.3e} (tolerance {tol:.1e})"
            )

    def normalized(self) -> "WaveFunction":
        return WaveFunction.from_amplitudes(self.subspace, self.amplitudes, True)

    def with_phase(self, theta: float) -> "WaveFunction":
        return WaveFunction(self.subspace, np.exp(1j * theta) * self.amplitudes)


@dataclass(frozen=True)
class ObservableSnapshot:
    tau: float
    en1: float
    en2: float
    en3: float
    variance_n1: float
    probabilities: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def expectations(self) -> Tuple[float, float, float]:
        return (self.en1, self.en2, self.en3)
