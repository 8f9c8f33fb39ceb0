import logging
import re
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import minimize_scalar

from apps.fock.models import SubspaceSpec, WaveFunction
from apps.hamiltonian.models import TridiagonalHamiltonian
from core import settings
from core.exceptions import DomainError, ShapeMismatch, SolverError

from .models import (
    EigenSystem,
    FrequencyCounts,
    RecurrenceResult,
    SpacingReport,
    SpectralLines,
)

logger = logging.getLogger(__name__)

_FIDELITY_CHUNK = 4096


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude component positive; argmax keeps the first index on ties
    rows = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[rows, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


@lru_cache(maxsize=64)
def _decompose(spec: SubspaceSpec, offdiag: bytes) -> EigenSystem:
    e = np.frombuffer(offdiag, dtype=float)
    if spec.d == 1:
        return EigenSystem(spec, np.zeros(1), np.ones((1, 1)))
    logger.debug("eigendecomposition of %s", spec)
    try:
        lambdas, vectors = eigh_tridiagonal(
            np.zeros(spec.d), e, lapack_driver="stev"
        )
    except LinAlgError as exc:
        found = re.findall(r"\d+", str(exc))
        index = int(found[-1]) if found else None
        raise SolverError(
            f"tridiagonal eigensolver did not converge for {spec}: {exc}", index
        ) from exc
    return EigenSystem(spec, lambdas, _fix_signs(vectors))


def eigensystem(H: TridiagonalHamiltonian) -> EigenSystem:
    """Cached per Hamiltonian; the result is immutable and safe to share."""
    return _decompose(H.spec, H.offdiag.tobytes())


def _check(psi0: WaveFunction, es: EigenSystem) -> None:
    if psi0.subspace.d != es.d:
        raise ShapeMismatch(f"state of dimension {psi0.subspace.d}, spectrum of {es.d}")


def eigen_weights(psi0: WaveFunction, es: EigenSystem) -> np.ndarray:
    _check(psi0, es)
    return es.weights(psi0.amplitudes)


def spectral_lines_n3(
    psi0: WaveFunction, es: EigenSystem, prune: Optional[float] = None
) -> SpectralLines:
    """Lines of <n3>(tau) = sum_ij w_ij exp(i (lambda_i - lambda_j) tau).

    w_ij = conj(eps_i) eps_j sum_k beta_ik beta_jk k.
    """
    eps = eigen_weights(psi0, es)
    prune = settings.LINE_PRUNE if prune is None else prune
    V = es.vectors
    index = np.arange(es.d)
    moments = (V.T * index) @ V
    weights = np.conj(eps)[:, None] * eps[None, :] * moments
    freqs = es.lambdas[:, None] - es.lambdas[None, :]
    ii, jj = np.meshgrid(index, index, indexing="ij")

    magnitude = np.abs(weights)
    top = float(magnitude.max()) if magnitude.size else 0.0
    retained = magnitude > prune * top if top > 0.0 else np.zeros_like(magnitude, bool)
    lines = SpectralLines(
        freq=freqs.ravel(),
        weight=weights.ravel(),
        i=ii.ravel(),
        j=jj.ravel(),
        retained=retained.ravel(),
        threshold=prune * top,
    )
    logger.debug("%d of %d lines retained", lines.n_retained, len(lines))
    return lines


def reconstruct_n3(lines: SpectralLines, tau):
    """Sum of all lines at tau (scalar or grid); the conjugate pairs cancel the
    imaginary part up to rounding."""
    taus = np.asarray(tau, dtype=float)
    flat = taus.ravel()
    values = np.empty(flat.shape, dtype=complex)
    for start in range(0, flat.size, 64):
        chunk = flat[start:start + 64]
        values[start:start + 64] = (
            np.exp(1j * np.multiply.outer(chunk, lines.freq)) @ lines.weight
        )
    values = values.reshape(taus.shape)
    scale = max(float(np.max(np.abs(values.real), initial=0.0)), 1.0)
    residue = float(np.max(np.abs(values.imag), initial=0.0))
    if residue > 1e-9 * scale:
        logger.warning("reconstructed <n3> has imaginary residue %.2e", residue)
    return float(values.real) if taus.ndim == 0 else values.real


def spacing_diagnostic(
    es: EigenSystem, threshold: Optional[float] = None
) -> SpacingReport:
    """Fit the nonnegative half of the spectrum to lambda = c_k * base.

    c_k = k for odd d (anchored at the zero eigenvalue) and k - 1/2 for even d.
    """
    if es.d < 3:
        raise DomainError(f"spacing diagnostic needs d >= 3, got d={es.d}")
    threshold = settings.LINEAR_SPACING_THRESHOLD if threshold is None else threshold
    half = es.d // 2
    positive = np.sort(es.lambdas)[es.d - half:]
    c = np.arange(1, half + 1, dtype=float)
    if es.d % 2 == 0:
        c -= 0.5
    base = float(np.dot(c, positive) / np.dot(c, c))
    fitted = c * base
    deviation = float(np.max(np.abs(positive - fitted) / fitted))
    return SpacingReport(base=base, max_deviation=deviation, threshold=threshold)


def _distinct(values: np.ndarray, tol: float) -> int:
    if values.size == 0:
        return 0
    ordered = np.sort(values)
    return 1 + int(np.count_nonzero(np.diff(ordered) > tol))


def count_distinct_frequencies(
    es: EigenSystem,
    lines: Optional[SpectralLines] = None,
    tol: Optional[float] = None,
    spacing: Optional[SpacingReport] = None,
) -> FrequencyCounts:
    """Distinct |lambda_i - lambda_j| over all eigenpairs, within tol * max|lambda|.

    For a linearly spaced spectrum the lattice count (distinct multiples of the
    base) is reported as well.
    """
    tol = settings.FREQUENCY_TOLERANCE if tol is None else tol
    width = tol * es.scale
    gaps = np.abs(es.lambdas[:, None] - es.lambdas[None, :])
    n_distinct = _distinct(gaps.ravel(), width)

    n_lattice = None
    if spacing is None and es.d >= 3:
        spacing = spacing_diagnostic(es)
    if spacing is not None and spacing.linear_verdict:
        n_lattice = len(np.unique(np.rint(gaps / spacing.base).astype(int)))

    if lines is None:
        return FrequencyCounts(n_distinct, n_lattice, 0, 0, 0)
    kept = np.abs(lines.freq[lines.retained])
    return FrequencyCounts(
        n_distinct=n_distinct,
        n_lattice=n_lattice,
        n_lines=len(lines),
        n_retained=lines.n_retained,
        n_retained_distinct=_distinct(kept, width),
    )


def fidelity(es: EigenSystem, psi0: WaveFunction, taus) -> np.ndarray:
    """|<Psi(0), Psi(tau)>|^2 = |sum_j |eps_j|^2 exp(-i lambda_j tau)|^2."""
    populations = np.abs(eigen_weights(psi0, es)) ** 2
    taus = np.asarray(taus, dtype=float)
    flat = taus.ravel()
    out = np.empty(flat.shape)
    for start in range(0, flat.size, _FIDELITY_CHUNK):
        chunk = flat[start:start + _FIDELITY_CHUNK]
        overlap = np.exp(-1j * np.multiply.outer(chunk, es.lambdas)) @ populations
        out[start:start + _FIDELITY_CHUNK] = np.abs(overlap) ** 2
    return out.reshape(taus.shape)


def scan_grid(es: EigenSystem, horizon: float) -> np.ndarray:
    step = (2.0 * np.pi / es.scale) / settings.RECURRENCE_SAMPLES
    n = int(np.ceil(horizon / step))
    return np.linspace(0.0, n * step, n + 1)


def _refine(
    es: EigenSystem, psi0: WaveFunction, bounds: Tuple[float, float]
) -> Tuple[float, float]:
    result = minimize_scalar(
        lambda tau: -float(fidelity(es, psi0, tau)),
        bounds=bounds,
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(result.x), -float(result.fun)


def recurrence_time(
    H: TridiagonalHamiltonian,
    psi0: WaveFunction,
    horizon: float,
    fidelity_threshold: float,
) -> RecurrenceResult:
    """First return of |<Psi(0), Psi(tau)>|^2 above the threshold.

    The scan waits for the fidelity to drop below the threshold first; a state
    that never leaves (an eigenvector) is reported at the first grid point and
    flagged degenerate.
    """
    if horizon <= 0.0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    if not 0.0 < fidelity_threshold < 1.0:
        raise DomainError(f"threshold must lie in (0, 1), got {fidelity_threshold}")

    es = eigensystem(H)
    taus = scan_grid(es, horizon)
    trace = fidelity(es, psi0, taus)
    common = dict(
        threshold=fidelity_threshold,
        horizon=horizon,
        max_fidelity=float(trace[1:].max()) if len(trace) > 1 else 1.0,
        taus=taus,
        trace=trace,
    )

    below = np.flatnonzero(trace < fidelity_threshold)
    if below.size == 0:
        k = min(1, len(taus) - 1)
        return RecurrenceResult(
            float(taus[k]), float(trace[k]), degenerate=True, **common
        )

    after = np.flatnonzero(trace[below[0]:] >= fidelity_threshold)
    if after.size == 0:
        # report the best revival inside the horizon for context
        top = below[0] + int(np.argmax(trace[below[0]:]))
        common["max_fidelity"] = float(trace[top])
        return RecurrenceResult(None, None, degenerate=False, **common)

    start = below[0] + int(after[0])
    stop = start
    while stop + 1 < len(trace) and trace[stop + 1] >= fidelity_threshold:
        stop += 1
    peak = start + int(np.argmax(trace[start:stop + 1]))
    lo = taus[max(peak - 1, 0)]
    hi = taus[min(peak + 1, len(taus) - 1)]
    tau_rec, value = _refine(es, psi0, (float(lo), float(hi)))
    if value < trace[peak]:
        tau_rec, value = float(taus[peak]), float(trace[peak])
    logger.info("recurrence at tau=%.6g (fidelity %.6f)", tau_rec, value)
    return RecurrenceResult(tau_rec, value, degenerate=False, **common)
