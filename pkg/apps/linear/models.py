from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from apps.classical.models import GrowthRate
from core.exceptions import DomainError


@dataclass(frozen=True)
class SpreadSpec:
    """Geometric profile alpha_i ~ epsilon^|m - i| around the center index m."""

    m: int
    epsilon: float = 0.0

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m:
            raise DomainError(f"spread center must be an integer, got {self.m!r}")
        if not 0.0 <= self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "epsilon", float(self.epsilon))


@dataclass(frozen=True)
class VarianceGrowth:
    slope: float
    valid_until: float


@dataclass(frozen=True)
class QuantumLinearParams:
    growth: GrowthRate
    BQ: float
    delta1_0: float
    n_init: Tuple[float, float, float]
    # None until determined, and always None on the stable branch
    C1: Optional[float] = None
    valid_until: Optional[float] = None

    @property
    def gammaQ(self) -> float:
        return self.growth.rate

    @property
    def gammaQ_sq(self) -> float:
        return self.growth.squared

    def as_dict(self) -> dict:
        return {
            "gammaQ": self.gammaQ,
            "gammaQ_sq": self.gammaQ_sq,
            "BQ": self.BQ,
            "C1": self.C1,
            "delta1_0": self.delta1_0,
            "valid_until": self.valid_until,
        }


@dataclass(frozen=True)
class LinearComparison:
    """Exact and linearized <n1> on one grid; dn1 columns are offsets from n1(0)."""

    taus: np.ndarray = field(repr=False)
    n1_exact: np.ndarray = field(repr=False)
    n1_linear: np.ndarray = field(repr=False)
    params: QuantumLinearParams

    @property
    def dn1_exact(self) -> np.ndarray:
        return self.n1_exact - self.n1_exact[0]

    @property
    def dn1_linear(self) -> np.ndarray:
        return self.n1_linear - self.n1_exact[0]
