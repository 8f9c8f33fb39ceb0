"""
Fixed-step classical Runge-Kutta 4 for autonomous systems y' = f(y).

Used by the classical amplitude/action equations and by the rk4 Schrodinger
propagator. Works for real or complex state arrays.
"""

import logging
import math
from typing import Callable, Iterator, Tuple

import numpy as np

logger = logging.getLogger(__name__)

Rhs = Callable[[np.ndarray], np.ndarray]


def rk4_step(f: Rhs, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def substeps(span: float, dt_max: float) -> Tuple[int, float]:
    """Number of equal steps of size <= dt_max that exactly cover ``span``."""
    if span <= 0.0:
        return 0, 0.0
    n = max(1, math.ceil(span / dt_max - 1e-12))
    return n, span / n


def rk4_march(f: Rhs, y0: np.ndarray, span: float, dt_max: float) -> np.ndarray:
    """Advance y0 by ``span`` with equal sub-steps no larger than ``dt_max``."""
    n, dt = substeps(span, dt_max)
    y = np.array(y0, copy=True)
    for _ in range(n):
        y = rk4_step(f, y, dt)
    return y


def rk4_trajectory(
    f: Rhs, y0: np.ndarray, t_end: float, dt: float
) -> Iterator[Tuple[float, np.ndarray]]:
    """Yield (t, y) at t = 0, dt, 2dt, ... with the last step landing on t_end."""
    n, h = substeps(t_end, dt)
    logger.debug("rk4 trajectory: %d steps of %.3e", n, h)
    y = np.array(y0, copy=True)
    yield 0.0, y
    for k in range(1, n + 1):
        y = rk4_step(f, y, h)
        yield k * h, y
