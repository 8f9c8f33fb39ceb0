"""
Linearized quantum instability around an initial state psi0.

With the variance frozen at its initial value, delta n1 obeys the same
linear equation as the classical action perturbation, with

    gamma_Q^2 = 4 (n1 - n2 - n3 - 1/2)
    B_Q       = 2 n1 (1 + n2 + n3) - 2 n2 n3 - 6 delta1(0)

and C1 fixed by the exact initial slope of <n1> from the Schroedinger
equation.
"""

import logging
from typing import Optional

import numpy as np

from apps.classical.models import GrowthRate
from apps.classical.queries import linear_profile
from apps.evolve.inputs import EvolutionConfig
from apps.evolve.queries import evolve_observables
from apps.fock.models import SubspaceSpec, WaveFunction
from apps.fock.queries import expectations, variance_n1
from apps.hamiltonian.models import TridiagonalHamiltonian
from apps.hamiltonian.queries import coupling
from core.exceptions import (
    BoundaryError,
    BranchError,
    DegenerateError,
    DomainError,
    IndexOutOfRange,
    ShapeMismatch,
)

from .models import LinearComparison, QuantumLinearParams, SpreadSpec, VarianceGrowth

logger = logging.getLogger(__name__)


def spread_state(spec: SubspaceSpec, s: SpreadSpec) -> WaveFunction:
    """Real amplitudes epsilon^|m - i|, truncated to the subspace and normalized."""
    if s.m > spec.s2:
        raise IndexOutOfRange(f"spread center {s.m} outside [0, {spec.s2}]")
    profile = np.power(s.epsilon, np.abs(spec.indices - s.m).astype(float))
    return WaveFunction.from_amplitudes(spec, profile, normalize=True)


def initial_variance(epsilon: float) -> float:
    """Variance of n1 for the untruncated two-sided spread profile.

    Sums 2 eps^2 (1 - eps^2) / (1 + eps^2)^2 * sum_n eps^(2n) (2n(n+1) + 1),
    which collapses to 2 eps^2 / (1 - eps^2)^2.
    """
    if not 0.0 <= epsilon < 1.0:
        raise DomainError(f"epsilon must lie in [0, 1), got {epsilon}")
    x = epsilon**2
    return 2.0 * x / (1.0 - x) ** 2


def variance_growth_bound(spec: SubspaceSpec, s: SpreadSpec) -> VarianceGrowth:
    """Printed short-time slope 2 eps (h_m - h_{m-1}) and its bound tau << 1/h_m."""
    if s.m <= 0 or s.m >= spec.s2:
        raise BoundaryError(
            f"variance growth bound needs 0 < m < s2, got m={s.m} in {spec}"
        )
    h_m, h_prev = coupling(spec, s.m), coupling(spec, s.m - 1)
    return VarianceGrowth(
        slope=2.0 * s.epsilon * (h_m - h_prev), valid_until=1.0 / h_m
    )


def _population_rates(H: TridiagonalHamiltonian, psi: WaveFunction) -> np.ndarray:
    # dp_i/dtau = 2 Re(conj(alpha_i) dalpha_i/dtau) with dalpha/dtau = -i H alpha
    if psi.subspace != H.spec:
        raise ShapeMismatch(f"state lives in {psi.subspace}, H in {H.spec}")
    alpha = psi.amplitudes
    return 2.0 * np.imag(np.conj(alpha) * H.apply(alpha))


def n1_slope(H: TridiagonalHamiltonian, psi: WaveFunction) -> float:
    """Exact d<n1>/dtau."""
    return float(np.dot(_population_rates(H, psi), H.spec.n1_values))


def variance_slope(H: TridiagonalHamiltonian, psi: WaveFunction) -> float:
    """Exact d(delta1)/dtau = sum_i dp_i/dtau ((s2-i)^2 - 2 <n1> (s2-i))."""
    en1 = expectations(psi)[0]
    n1 = H.spec.n1_values
    return float(np.dot(_population_rates(H, psi), n1**2 - 2.0 * en1 * n1))


def quantum_growth_rate(n1i: float, n2i: float, n3i: float) -> GrowthRate:
    return GrowthRate.from_radicand(float(n1i) - float(n2i) - float(n3i) - 0.5)


def quantum_b(n1i: float, n2i: float, n3i: float, delta1_0: float) -> float:
    return 2.0 * n1i * (1.0 + n2i + n3i) - 2.0 * n2i * n3i - 6.0 * delta1_0


def determine_C1(
    H: TridiagonalHamiltonian, psi0: WaveFunction, params: QuantumLinearParams
) -> float:
    """Solve d<n1>/dtau(0) = gamma (2 C1 + B/gamma^2) for C1."""
    gamma = params.gammaQ
    if gamma == 0.0:
        raise DegenerateError("gamma_Q = 0: C1 is undetermined")
    psi0.require_normalized()
    slope = n1_slope(H, psi0)
    return 0.5 * (slope / gamma - params.BQ / gamma**2)


def _validity(H: TridiagonalHamiltonian, psi0: WaveFunction) -> Optional[float]:
    # 1/h_m around the most populated basis state
    m = int(np.argmax(psi0.probabilities))
    if m >= H.spec.s2:
        return None
    return 1.0 / float(H.offdiag[m])


def quantum_linear_params(
    H: TridiagonalHamiltonian, psi0: WaveFunction
) -> QuantumLinearParams:
    n1i, n2i, n3i = expectations(psi0)
    delta1_0 = variance_n1(psi0)
    params = QuantumLinearParams(
        growth=quantum_growth_rate(n1i, n2i, n3i),
        BQ=quantum_b(n1i, n2i, n3i, delta1_0),
        delta1_0=delta1_0,
        n_init=(n1i, n2i, n3i),
        valid_until=_validity(H, psi0),
    )
    if params.growth.stable:
        return params
    C1 = determine_C1(H, psi0, params)
    logger.debug("gamma_Q=%.6g B_Q=%.6g C1=%.6g", params.gammaQ, params.BQ, C1)
    return QuantumLinearParams(
        growth=params.growth,
        BQ=params.BQ,
        delta1_0=delta1_0,
        n_init=params.n_init,
        C1=C1,
        valid_until=params.valid_until,
    )


def quantum_linear_solution(params: QuantumLinearParams, tau):
    if params.growth.stable:
        raise BranchError(
            f"n = {params.n_init} is on the stable branch "
            f"(gamma_Q^2 = {params.gammaQ_sq:.6g})"
        )
    if params.C1 is None:
        raise DomainError("C1 has not been determined for these parameters")
    if np.any(np.asarray(tau) < 0.0):
        raise DomainError("tau must be nonnegative")
    return linear_profile(params.gammaQ, params.BQ, params.C1, tau)


def compare_linear(
    H: TridiagonalHamiltonian, psi0: WaveFunction, cfg: EvolutionConfig
) -> LinearComparison:
    """Exact <n1> on the config grid next to n1(0) + the linearized delta n1."""
    params = quantum_linear_params(H, psi0)
    result = evolve_observables(H, psi0, cfg)
    n1_exact = result.series("en1")
    dn1 = quantum_linear_solution(params, cfg.tau_grid)
    return LinearComparison(
        taus=cfg.tau_grid,
        n1_exact=n1_exact,
        n1_linear=n1_exact[0] + dn1,
        params=params,
    )


def divergence_time(
    comparison: LinearComparison, rel: float = 0.1, floor: float = 1.0
) -> Optional[float]:
    """First grid tau where the linear and exact delta n1 differ by more than
    ``rel`` of the exact value; points with |delta n1| < floor are ignored."""
    exact, linear = comparison.dn1_exact, comparison.dn1_linear
    gap = np.abs(linear - exact)
    over = (np.abs(exact) >= floor) & (gap > rel * np.abs(exact))
    hits = np.flatnonzero(over)
    return float(comparison.taus[hits[0]]) if hits.size else None
