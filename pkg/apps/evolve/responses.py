from dataclasses import dataclass
from typing import List

import numpy as np

from apps.fock.models import ObservableSnapshot, WaveFunction


@dataclass(frozen=True)
class EvolutionResult:
    snapshots: List[ObservableSnapshot]
    final_state: WaveFunction
    norm_drift: float

    @property
    def taus(self) -> np.ndarray:
        return np.array([s.tau for s in self.snapshots])

    def series(self, name: str) -> np.ndarray:
        """One observable across snapshots, e.g. ``series("en1")``."""
        return np.array([getattr(s, name) for s in self.snapshots])

    @property
    def probabilities(self) -> np.ndarray:
        """(n_snapshots, d) matrix; requires ``with_probabilities``."""
        return np.vstack([s.probabilities for s in self.snapshots])


@dataclass(frozen=True)
class HeisenbergCheck:
    second_derivative: float
    rhs: float
    residual: float
