from dataclasses import dataclass, field

import numpy as np

from apps.fock.models import SubspaceSpec, WaveFunction
from core.exceptions import ShapeMismatch


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    """Zero-diagonal real symmetric tridiagonal matrix, stored as its couplings."""

    spec: SubspaceSpec
    offdiag: np.ndarray = field(repr=False)

    def __post_init__(self):
        offdiag = np.array(self.offdiag, dtype=float)
        if offdiag.shape != (self.spec.d - 1,):
            raise ShapeMismatch(
                f"expected {self.spec.d - 1} couplings for {self.spec}, "
                f"got shape {offdiag.shape}"
            )
        offdiag.setflags(write=False)
        object.__setattr__(self, "offdiag", offdiag)

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def h_max(self) -> float:
        return float(self.offdiag.max()) if self.offdiag.size else 0.0

    def apply(self, vectors) -> np.ndarray:
        """H @ vectors along the first axis, without forming the matrix."""
        x = np.asarray(vectors)
        if x.shape[:1] != (self.d,):
            raise ShapeMismatch(
                f"expected leading dimension {self.d}, got shape {x.shape}"
            )
        h = self.offdiag.reshape((-1,) + (1,) * (x.ndim - 1))
        out = np.zeros_like(x, dtype=np.result_type(x, float))
        out[1:] += h * x[:-1]
        out[:-1] += h * x[1:]
        return out

    def dense(self) -> np.ndarray:
        return np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def __matmul__(self, other):
        if isinstance(other, WaveFunction):
            other = other.amplitudes
        return self.apply(other)
