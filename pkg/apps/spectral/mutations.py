# - Export spectrum - k,lambda_k for every eigenvalue.
# - Export weights - eigenvalue plus the complex overlap eps_k of the initial state.
# - Export lines - the <n3> spectral lines (retained ones by default).
# - Export diagnostics - spacing verdict and frequency counts as JSON.
# - Export recurrence - recurrence summary JSON and the scanned fidelity trace CSV.

from pathlib import Path

import numpy as np

from core.artifacts import ArtifactResponse, failed, write_csv, write_json
from core.exceptions import ShapeMismatch

from .models import (
    EigenSystem,
    FrequencyCounts,
    RecurrenceResult,
    SpacingReport,
    SpectralLines,
)


def export_spectrum(es: EigenSystem, path: Path) -> ArtifactResponse:
    try:
        artifact = write_csv(path, ["k", "lambda_k"], enumerate(es.lambdas))
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)


def export_weights(es: EigenSystem, eps: np.ndarray, path: Path) -> ArtifactResponse:
    try:
        if len(eps) != es.d:
            raise ShapeMismatch(f"{len(eps)} weights for a spectrum of {es.d}")
        rows = (
            [k, lam, complex(e).real, complex(e).imag]
            for k, (lam, e) in enumerate(zip(es.lambdas, eps))
        )
        artifact = write_csv(path, ["k", "lambda_k", "eps_re", "eps_im"], rows)
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)


def export_lines(
    lines: SpectralLines, path: Path, retained_only: bool = True
) -> ArtifactResponse:
    try:
        keep = np.flatnonzero(lines.retained) if retained_only else range(len(lines))
        rows = (
            [
                lines.freq[k],
                lines.weight[k].real,
                lines.weight[k].imag,
                lines.i[k],
                lines.j[k],
            ]
            for k in keep
        )
        artifact = write_csv(
            path, ["freq", "weight_re", "weight_im", "i", "j"], rows
        )
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)


def diagnostics_payload(report: SpacingReport, counts: FrequencyCounts) -> dict:
    return {
        "linear_verdict": report.linear_verdict,
        "base": report.base,
        "max_deviation": report.max_deviation,
        "n_distinct_freqs": counts.n_distinct,
        "n_lattice_freqs": counts.n_lattice,
        "n_lines": counts.n_lines,
        "n_retained": counts.n_retained,
        "n_retained_distinct": counts.n_retained_distinct,
    }


def export_diagnostics(
    report: SpacingReport, counts: FrequencyCounts, path: Path
) -> ArtifactResponse:
    try:
        artifact = write_json(path, diagnostics_payload(report, counts))
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)


def export_recurrence(result: RecurrenceResult, path: Path) -> ArtifactResponse:
    try:
        artifact = write_json(
            path,
            {
                "tau_rec": result.tau_rec,
                "fidelity": result.fidelity,
                "degenerate": result.degenerate,
                "threshold": result.threshold,
                "horizon": result.horizon,
                "max_fidelity": result.max_fidelity,
            },
        )
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)


def export_fidelity(result: RecurrenceResult, path: Path) -> ArtifactResponse:
    try:
        artifact = write_csv(path, ["tau", "fidelity"], zip(result.taus, result.trace))
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)
