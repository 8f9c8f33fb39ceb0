from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from core import settings
from core.exceptions import ConfigError


class Method(str, Enum):
    EXACT_EIGEN = "exact-eigen"
    RK4 = "rk4"


@dataclass(frozen=True)
class EvolutionConfig:
    """Output grid and propagation method.

    The rk4 step defaults to min(RK4_DT_SCALE / max h_i, RK4_DT_MAX); every grid
    interval is covered by equal sub-steps, so grid times need not be multiples
    of dt.
    """

    tau_grid: np.ndarray = field(repr=False)
    method: Method = Method.EXACT_EIGEN
    dt: Optional[float] = None
    norm_check: float = settings.RK4_NORM_CHECK
    with_probabilities: bool = False

    def __post_init__(self):
        grid = np.array(self.tau_grid, dtype=float).ravel()
        if grid.size == 0 or grid[0] != 0.0:
            raise ConfigError("tau_grid: must start at 0")
        if np.any(np.diff(grid) <= 0.0):
            raise ConfigError("tau_grid: must be strictly increasing")
        if not np.all(np.isfinite(grid)):
            raise ConfigError("tau_grid: must be finite")
        try:
            method = Method(self.method)
        except ValueError:
            raise ConfigError(f"method: unknown propagation method {self.method!r}")
        if self.dt is not None and self.dt <= 0.0:
            raise ConfigError(f"dt: must be positive, got {self.dt}")
        if self.norm_check <= 0.0:
            raise ConfigError(f"norm_check: must be positive, got {self.norm_check}")
        grid.setflags(write=False)
        object.__setattr__(self, "tau_grid", grid)
        object.__setattr__(self, "method", method)

    @classmethod
    def uniform(cls, tau_max: float, points: int, **kwargs) -> "EvolutionConfig":
        if points < 1:
            raise ConfigError(f"points: need at least one grid point, got {points}")
        if points > 1 and tau_max <= 0.0:
            raise ConfigError(f"tau_max: must be positive, got {tau_max}")
        return cls(np.linspace(0.0, tau_max, points), **kwargs)

    @property
    def tau_max(self) -> float:
        return float(self.tau_grid[-1])
