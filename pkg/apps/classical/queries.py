"""
Classical three-wave dynamics with the coupling normalized to g = 1:

    dA1/dt = A2 A3,   dA2/dt = -A1 conj(A3),   dA3/dt = -A1 conj(A2)

The actions I_j = |A_j|^2 conserve s2 = I1 + I3 and s3 = I1 + I2, and I1
obeys the closed second-order equation

    I1'' = 2 (s2 s3 + 3 I1^2 - 2 (s2 + s3) I1).
"""

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from core import settings
from core.exceptions import BranchError, DivergenceError, DomainError
from core.integrate import rk4_trajectory, substeps

from .models import (
    ActionTrajectory,
    ClassicalLinearParams,
    ClassicalState,
    ClassicalTrajectory,
    GrowthRate,
)

logger = logging.getLogger(__name__)


def amplitude_rhs(A: np.ndarray) -> np.ndarray:
    A1, A2, A3 = A
    return np.array([A2 * A3, -A1 * np.conj(A3), -A1 * np.conj(A2)])


def action_rhs(s2: float, s3: float):
    """First-order form of the three closed action equations on
    y = (I1, I2, I3, dI1/dt, dI2/dt, dI3/dt).

    Each action has its own right-hand side; I1'' = -I2'' = -I3'' only holds
    while the state stays on the invariant surface.
    """

    def rhs(y: np.ndarray) -> np.ndarray:
        I1, I2, I3 = y[:3]
        d2 = 2.0 * np.array(
            [
                s2 * s3 + 3.0 * I1**2 - 2.0 * (s2 + s3) * I1,
                s3 * (s2 - s3) - 3.0 * I2**2 + 2.0 * (2.0 * s3 - s2) * I2,
                s2 * (s3 - s2) - 3.0 * I3**2 + 2.0 * (2.0 * s2 - s3) * I3,
            ]
        )
        return np.concatenate([y[3:], d2])

    return rhs


def classical_growth_rate(I1i: float, I2i: float, I3i: float) -> GrowthRate:
    return GrowthRate.from_radicand(float(I1i) - float(I2i) - float(I3i))


def equilibrium_growth_rate(I10: float) -> GrowthRate:
    """Growth of small daughter waves on the pump-only equilibrium (I10, 0, 0)."""
    return classical_growth_rate(I10, 0.0, 0.0)


def default_dt(I1i: float, I2i: float, I3i: float) -> float:
    growth = classical_growth_rate(I1i, I2i, I3i)
    if growth.unstable:
        return settings.CLASSICAL_DT_SCALE / growth.rate
    return settings.CLASSICAL_DT_SCALE


def _as_state(A0: Union[ClassicalState, Sequence[complex]]) -> ClassicalState:
    return A0 if isinstance(A0, ClassicalState) else ClassicalState(A0)


def integrate_amplitudes(
    A0: Union[ClassicalState, Sequence[complex]],
    tau_end: float,
    dt: Optional[float] = None,
) -> ClassicalTrajectory:
    state = _as_state(A0)
    if tau_end <= 0.0:
        raise DomainError(f"tau_end must be positive, got {tau_end}")
    if dt is None:
        dt = default_dt(*state.actions)
    if dt <= 0.0:
        raise DomainError(f"dt must be positive, got {dt}")

    n, _ = substeps(tau_end, dt)
    times = np.empty(n + 1)
    amplitudes = np.empty((n + 1, 3), dtype=complex)
    last_t = 0.0
    steps = rk4_trajectory(amplitude_rhs, state.amplitudes, tau_end, dt)
    for k, (t, A) in enumerate(steps):
        if not np.all(np.isfinite(A)):
            raise DivergenceError(
                f"classical amplitudes became non-finite after t={last_t:.6g}",
                last_valid_time=last_t,
            )
        times[k] = state.t + t
        amplitudes[k] = A
        last_t = state.t + t

    trajectory = ClassicalTrajectory(times, amplitudes)
    logger.debug(
        "amplitude trajectory: %d steps, conservation drift %.2e",
        n,
        trajectory.conservation_drift(),
    )
    return trajectory


def integrate_actions(
    I0: Sequence[float],
    s2: float,
    s3: float,
    tau_end: float,
    dt: float,
    dI0: float,
) -> ActionTrajectory:
    I10, I20, I30 = (float(x) for x in I0)
    if min(I10, I20, I30) < 0.0:
        raise DomainError(f"actions must be nonnegative, got {tuple(I0)}")
    scale = max(abs(s2), abs(s3), 1.0)
    if abs(I10 + I30 - s2) > 1e-9 * scale or abs(I10 + I20 - s3) > 1e-9 * scale:
        raise DomainError(
            f"inconsistent invariants: I1+I3={I10 + I30} vs s2={s2}, "
            f"I1+I2={I10 + I20} vs s3={s3}"
        )
    if tau_end <= 0.0 or dt <= 0.0:
        raise DomainError("tau_end and dt must be positive")

    rhs = action_rhs(s2, s3)
    y0 = np.array([I10, I20, I30, dI0, -dI0, -dI0])
    times, states, d2 = [], [], []
    for t, y in rk4_trajectory(rhs, y0, tau_end, dt):
        if not np.all(np.isfinite(y)):
            raise DivergenceError(
                f"actions became non-finite after t={times[-1]:.6g}",
                last_valid_time=times[-1],
            )
        times.append(t)
        states.append(y)
        d2.append(rhs(y)[3:])

    states = np.array(states)
    return ActionTrajectory(
        times=np.array(times),
        actions=states[:, :3],
        rates=states[:, 3:],
        second_derivative=np.array(d2),
        s2=float(s2),
        s3=float(s3),
    )


def classical_linear_params(
    I1i: float, I2i: float, I3i: float
) -> ClassicalLinearParams:
    """Constants of the linearized action solution around (I1i, I2i, I3i).

    C1 follows from the exact initial slope 2 sqrt(I1i I2i I3i) of real
    positive amplitudes; ``c1_printed`` keeps the expression
    sqrt(I1i I2i I3i)/gamma - B/gamma^2 for comparison.
    """
    growth = classical_growth_rate(I1i, I2i, I3i)
    BC = 2.0 * I1i * (I2i + I3i) - 2.0 * I2i * I3i
    if growth.stable:
        return ClassicalLinearParams(I1i, I2i, I3i, growth, BC)
    gamma, gamma_sq = growth.rate, growth.squared
    root = float(np.sqrt(I1i * I2i * I3i))
    return ClassicalLinearParams(
        I1i,
        I2i,
        I3i,
        growth,
        BC,
        C1=root / gamma - BC / (2.0 * gamma_sq),
        c1_printed=root / gamma - BC / gamma_sq,
    )


def linear_profile(gamma: float, B: float, C1: float, t):
    """B/gamma^2 + C1 e^{gamma t} - (B/gamma^2 + C1) e^{-gamma t}; zero at t = 0."""
    t = np.asarray(t, dtype=float)
    offset = B / gamma**2
    value = offset + C1 * np.exp(gamma * t) - (offset + C1) * np.exp(-gamma * t)
    return float(value) if value.ndim == 0 else value


def classical_linear_solution(I1i: float, I2i: float, I3i: float, t):
    params = classical_linear_params(I1i, I2i, I3i)
    if params.growth.stable:
        raise BranchError(
            f"({I1i}, {I2i}, {I3i}) is on the stable branch "
            f"(gamma_C^2 = {params.growth.squared:.6g}); the linearized solution "
            "only covers the unstable case"
        )
    if np.any(np.asarray(t) < 0.0):
        raise DomainError("t must be nonnegative")
    return linear_profile(params.gammaC, params.BC, params.C1, t)


def equal_daughter_solution(
    I1i: float, I2i: float, t, sigma: int = -1
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact actions for real amplitudes with A3 = sigma * A2 (so I2 = I3).

    Then A1 = K tanh(sigma K t + atanh(A1(0)/K)) with K^2 = I1 + I2: I1 follows
    a tanh^2 profile and I2 = I3 a sech^2 profile. sigma = -1 drains the pump,
    sigma = +1 feeds it.
    """
    if sigma not in (-1, 1):
        raise DomainError(f"sigma must be +1 or -1, got {sigma}")
    if I1i < 0.0 or I2i <= 0.0:
        raise DomainError("need I1i >= 0 and I2i > 0")
    t = np.asarray(t, dtype=float)
    K = float(np.sqrt(I1i + I2i))
    phase = sigma * K * t + np.arctanh(np.sqrt(I1i) / K)
    I1 = K**2 * np.tanh(phase) ** 2
    I2 = K**2 / np.cosh(phase) ** 2
    return I1, I2, I2.copy()
