"""
Schroedinger propagation i d(alpha)/dtau = H alpha inside one invariant
subspace, by the eigen-decomposition of H (default) or by fixed-step RK4.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from apps.fock.models import WaveFunction
from apps.fock.queries import expectations, second_moment_n1, snapshot
from apps.hamiltonian.models import TridiagonalHamiltonian
from apps.spectral.queries import eigensystem
from core import settings
from core.exceptions import DomainError, IntegrationQualityError, ShapeMismatch
from core.integrate import rk4_march

from .inputs import EvolutionConfig, Method
from .responses import EvolutionResult, HeisenbergCheck

logger = logging.getLogger(__name__)

OBSERVABLES = ("en1", "en2", "en3")


def default_rk4_dt(H: TridiagonalHamiltonian) -> float:
    if H.h_max == 0.0:
        return settings.RK4_DT_MAX
    return min(settings.RK4_DT_SCALE / H.h_max, settings.RK4_DT_MAX)


def _schroedinger(H: TridiagonalHamiltonian):
    def rhs(alpha: np.ndarray) -> np.ndarray:
        return -1j * H.apply(alpha)

    return rhs


def _check_pair(H: TridiagonalHamiltonian, psi0: WaveFunction) -> None:
    if psi0.subspace != H.spec:
        raise ShapeMismatch(f"state lives in {psi0.subspace}, H in {H.spec}")
    psi0.require_normalized()


def _norm_drift(amplitudes: np.ndarray) -> float:
    return float(np.max(np.abs(np.sum(np.abs(amplitudes) ** 2, axis=0) - 1.0)))


def propagate(
    H: TridiagonalHamiltonian,
    psi0: WaveFunction,
    tau: float,
    cfg: Optional[EvolutionConfig] = None,
) -> WaveFunction:
    _check_pair(H, psi0)
    if tau < 0.0:
        raise DomainError(f"tau must be nonnegative, got {tau}")
    if tau == 0.0:
        return psi0
    method = cfg.method if cfg is not None else Method.EXACT_EIGEN
    if method is Method.EXACT_EIGEN:
        amplitudes = eigensystem(H).propagate(psi0.amplitudes, tau)
        return WaveFunction(psi0.subspace, amplitudes)

    dt = cfg.dt or default_rk4_dt(H)
    amplitudes = rk4_march(_schroedinger(H), psi0.amplitudes, tau, dt)
    drift = _norm_drift(amplitudes)
    if drift > cfg.norm_check:
        raise IntegrationQualityError(
            f"rk4 norm drift {drift:.3e} exceeds {cfg.norm_check:.1e} at tau={tau}"
        )
    return WaveFunction(psi0.subspace, amplitudes)


def _rk4_columns(H, psi0, cfg: EvolutionConfig) -> np.ndarray:
    dt = cfg.dt or default_rk4_dt(H)
    rhs = _schroedinger(H)
    columns = np.empty((H.d, len(cfg.tau_grid)), dtype=complex)
    alpha = np.array(psi0.amplitudes)
    columns[:, 0] = alpha
    for k in range(1, len(cfg.tau_grid)):
        span = cfg.tau_grid[k] - cfg.tau_grid[k - 1]
        alpha = rk4_march(rhs, alpha, span, dt)
        drift = abs(float(np.sum(np.abs(alpha) ** 2)) - 1.0)
        if drift > cfg.norm_check:
            raise IntegrationQualityError(
                f"rk4 norm drift {drift:.3e} exceeds {cfg.norm_check:.1e} "
                f"at tau={cfg.tau_grid[k]}"
            )
        columns[:, k] = alpha
    logger.debug("rk4 over %d grid points with dt<=%.3e", len(cfg.tau_grid), dt)
    return columns


def evolve_observables(
    H: TridiagonalHamiltonian, psi0: WaveFunction, cfg: EvolutionConfig
) -> EvolutionResult:
    _check_pair(H, psi0)
    if cfg.method is Method.EXACT_EIGEN:
        columns = eigensystem(H).propagate(psi0.amplitudes, cfg.tau_grid)
        # the grid starts at tau = 0, where the state is psi0 itself
        columns[:, 0] = psi0.amplitudes
        tol = settings.NORM_TOLERANCE
    else:
        columns = _rk4_columns(H, psi0, cfg)
        tol = max(cfg.norm_check, settings.NORM_TOLERANCE)

    snapshots = []
    for k, tau in enumerate(cfg.tau_grid):
        psi = WaveFunction(psi0.subspace, columns[:, k])
        snapshots.append(snapshot(psi, tau, cfg.with_probabilities, tol))
    drift = _norm_drift(columns)
    logger.info(
        "evolved %s over %d points, norm drift %.2e", H.spec, len(snapshots), drift
    )
    return EvolutionResult(
        snapshots=snapshots,
        final_state=WaveFunction(psi0.subspace, columns[:, -1]),
        norm_drift=drift,
    )


def number_operator_rhs(psi: WaveFunction) -> Tuple[float, float, float]:
    """Right-hand sides of the second-derivative equations for <n1>, <n2>, <n3>.

    Each is evaluated from its own moments; r1 = -r2 = -r3 holds identically.
    """
    psi.require_normalized()
    spec = psi.subspace
    s2, s3 = spec.s2, spec.s3
    p = psi.probabilities
    i = spec.indices
    n1, n2, n3 = s2 - i, s3 - s2 + i, i
    m1, m2, m3 = (float(np.dot(p, n)) for n in (n1, n2, n3))
    q1, q2, q3 = (float(np.dot(p, n**2)) for n in (n1, n2, n3))
    r1 = 2.0 * (s2 * s3 + 3.0 * q1 - (2 * s2 + 2 * s3 + 1) * m1)
    r2 = 2.0 * (s3 * (1 + s2 - s3) - 3.0 * q2 + (4 * s3 - 2 * s2 - 1) * m2)
    r3 = 2.0 * (s2 * (1 + s3 - s2) - 3.0 * q3 + (4 * s2 - 2 * s3 - 1) * m3)
    return r1, r2, r3


def fd_second_derivative(
    H: TridiagonalHamiltonian,
    psi: WaveFunction,
    observable: str = "en1",
    step: Optional[float] = None,
) -> float:
    """Symmetric finite difference of an expectation along exact propagation."""
    if observable not in OBSERVABLES:
        raise DomainError(
            f"observable must be one of {OBSERVABLES}, got {observable!r}"
        )
    _check_pair(H, psi)
    es = eigensystem(H)
    h = 1e-3 / es.scale if step is None else step
    k = OBSERVABLES.index(observable)
    columns = es.propagate(psi.amplitudes, np.array([-h, h]))
    values = [
        expectations(WaveFunction(psi.subspace, columns[:, c]))[k] for c in (0, 1)
    ]
    center = expectations(psi)[k]
    return (values[0] - 2.0 * center + values[1]) / h**2


def heisenberg_check(
    H: TridiagonalHamiltonian, psi: WaveFunction
) -> HeisenbergCheck:
    fd = fd_second_derivative(H, psi, "en1")
    rhs = number_operator_rhs(psi)[0]
    spec = psi.subspace
    en1 = expectations(psi)[0]
    scale = 2.0 * (
        spec.s2 * spec.s3
        + 3.0 * second_moment_n1(psi)
        + (2 * spec.s2 + 2 * spec.s3 + 1) * en1
    )
    scale = scale if scale > 0.0 else 1.0
    return HeisenbergCheck(fd, rhs, abs(fd - rhs) / scale)


def heisenberg_rhs_check(H: TridiagonalHamiltonian, psi: WaveFunction) -> float:
    """Relative residual between the finite-difference d2<n1>/dtau2 and its
    closed-form expectation equation."""
    return heisenberg_check(H, psi).residual
