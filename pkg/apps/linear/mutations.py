# - Export params - gamma_Q, B_Q, C1, the initial variance and the validity bound.
# - Export comparison - exact and linear <n1> side by side, one row per grid time.

from pathlib import Path

from core.artifacts import ArtifactResponse, failed, write_csv, write_json

from .models import LinearComparison, QuantumLinearParams

COMPARISON_HEADER = ["tau", "n1_exact", "n1_linear", "dn1_exact", "dn1_linear"]


def export_params(params: QuantumLinearParams, path: Path) -> ArtifactResponse:
    try:
        artifact = write_json(path, params.as_dict())
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)


def export_comparison(comparison: LinearComparison, path: Path) -> ArtifactResponse:
    try:
        rows = zip(
            comparison.taus,
            comparison.n1_exact,
            comparison.n1_linear,
            comparison.dn1_exact,
            comparison.dn1_linear,
        )
        artifact = write_csv(path, COMPARISON_HEADER, rows)
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)
