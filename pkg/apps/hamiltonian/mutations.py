# - Export couplings - Write the off-diagonal couplings h_i of one subspace as
#   CSV (i,h_i) or JSON for debugging and cross-implementation diffing.

from pathlib import Path

from core.artifacts import ArtifactResponse, failed, write_csv, write_json
from core.exceptions import ConfigError

from .models import TridiagonalHamiltonian


def export_couplings(
    H: TridiagonalHamiltonian, path: Path, format: str = "csv"
) -> ArtifactResponse:
    try:
        if format == "csv":
            artifact = write_csv(path, ["i", "h_i"], enumerate(H.offdiag))
        elif format == "json":
            artifact = write_json(
                path,
                {
                    "s2": H.spec.s2,
                    "s3": H.spec.s3,
                    "d": H.d,
                    "couplings": [
                        {"i": i, "h_i": float(h)} for i, h in enumerate(H.offdiag)
                    ],
                },
            )
        else:
            raise ConfigError(f"format: unsupported coupling format {format!r}")
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)
