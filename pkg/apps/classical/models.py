from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from core.exceptions import ShapeMismatch


@dataclass(frozen=True)
class ClassicalState:
    """Complex wave amplitudes (A1, A2, A3) at time t, with g = 1."""

    amplitudes: np.ndarray = field(repr=False)
    t: float = 0.0

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex)
        if amplitudes.shape != (3,):
            raise ShapeMismatch(f"expected 3 amplitudes, got shape {amplitudes.shape}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def from_actions(cls, I1, I2, I3, t: float = 0.0) -> "ClassicalState":
        """Real positive amplitudes sqrt(I_j)."""
        return cls(np.sqrt(np.array([I1, I2, I3], dtype=float)), t)

    @property
    def actions(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def s2(self) -> float:
        I1, _, I3 = self.actions
        return float(I1 + I3)

    @property
    def s3(self) -> float:
        I1, I2, _ = self.actions
        return float(I1 + I2)

    @property
    def is_real_positive(self) -> bool:
        A = self.amplitudes
        return bool(np.all(A.imag == 0.0) and np.all(A.real >= 0.0))


@dataclass(frozen=True)
class GrowthRate:
    """rate = 2 sqrt(|squared / 4|); ``unstable`` when the radicand is positive."""

    squared: float
    rate: float
    unstable: bool

    @classmethod
    def from_radicand(cls, radicand: float) -> "GrowthRate":
        return cls(
            squared=4.0 * radicand,
            rate=2.0 * float(np.sqrt(abs(radicand))),
            unstable=radicand > 0.0,
        )

    @property
    def stable(self) -> bool:
        return not self.unstable


@dataclass(frozen=True)
class ClassicalLinearParams:
    I1i: float
    I2i: float
    I3i: float
    growth: GrowthRate
    BC: float
    # None on the stable branch
    C1: Optional[float] = None
    c1_printed: Optional[float] = None

    @property
    def gammaC(self) -> float:
        return self.growth.rate

    @property
    def initial_slope(self) -> float:
        return 2.0 * float(np.sqrt(self.I1i * self.I2i * self.I3i))


@dataclass(frozen=True)
class ClassicalTrajectory:
    times: np.ndarray = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.times)

    def __iter__(self) -> Iterator[ClassicalState]:
        for t, A in zip(self.times, self.amplitudes):
            yield ClassicalState(A, t)

    def __getitem__(self, k) -> ClassicalState:
        return ClassicalState(self.amplitudes[k], self.times[k])

    @property
    def actions(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def s2(self) -> np.ndarray:
        acts = self.actions
        return acts[:, 0] + acts[:, 2]

    @property
    def s3(self) -> np.ndarray:
        acts = self.actions
        return acts[:, 0] + acts[:, 1]

    def conservation_drift(self) -> float:
        """max relative drift of s2 and s3 from their initial values."""
        s2, s3 = self.s2, self.s3
        drift2 = np.max(np.abs(s2 - s2[0])) / max(s2[0], 1e-300)
        drift3 = np.max(np.abs(s3 - s3[0])) / max(s3[0], 1e-300)
        return float(max(drift2, drift3))


@dataclass(frozen=True)
class ActionTrajectory:
    times: np.ndarray = field(repr=False)
    actions: np.ndarray = field(repr=False)
    # dI/dt per action, integrated as independent state components
    rates: np.ndarray = field(repr=False)
    # d^2 I / dt^2 of each action from its own closed equation
    second_derivative: np.ndarray = field(repr=False)
    s2: float = 0.0
    s3: float = 0.0

    def __len__(self):
        return len(self.times)

    def antisymmetry_residual(self) -> float:
        """max relative |I1' + I2'|, |I1' + I3'|, |I1'' + I2''| and |I1'' + I3''|."""
        residual = 0.0
        for series in (self.rates, self.second_derivative):
            scale = max(float(np.max(np.abs(series[:, 0]))), 1e-300)
            residual = max(
                residual,
                float(np.max(np.abs(series[:, 0] + series[:, 1]))) / scale,
                float(np.max(np.abs(series[:, 0] + series[:, 2]))) / scale,
            )
        return residual
