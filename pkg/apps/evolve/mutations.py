# - Export time series - Write tau, the three expectations, the n1 variance and
#   optionally every basis-state probability, one row per snapshot.
# - Export summary - Norm drift and the final expectations as JSON.

import logging
from pathlib import Path

from core import settings
from core.artifacts import ArtifactResponse, failed, write_csv, write_json
from core.exceptions import ConfigError

from .responses import EvolutionResult

logger = logging.getLogger(__name__)


def timeseries_header(d: int, with_probabilities: bool):
    header = ["tau", "en1", "en2", "en3", "var_n1"]
    if with_probabilities:
        header += [f"p{i}" for i in range(d)]
    return header


def export_timeseries(
    result: EvolutionResult, path: Path, with_probabilities: bool = False
) -> ArtifactResponse:
    try:
        d = result.final_state.subspace.d
        if with_probabilities and result.snapshots[0].probabilities is None:
            raise ConfigError(
                "with_probabilities: snapshots were evolved without probabilities"
            )
        if with_probabilities and d > settings.PROBABILITY_WARN_DIMENSION:
            logger.warning(
                "writing %d x %d probability cells to %s",
                len(result.snapshots),
                d,
                path,
            )

        def rows():
            for s in result.snapshots:
                row = [s.tau, s.en1, s.en2, s.en3, s.variance_n1]
                if with_probabilities:
                    row.extend(s.probabilities)
                yield row

        artifact = write_csv(path, timeseries_header(d, with_probabilities), rows())
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)


def export_summary(result: EvolutionResult, path: Path) -> ArtifactResponse:
    try:
        spec = result.final_state.subspace
        last = result.snapshots[-1]
        artifact = write_json(
            path,
            {
                "s2": spec.s2,
                "s3": spec.s3,
                "d": spec.d,
                "points": len(result.snapshots),
                "tau_max": last.tau,
                "norm_drift": result.norm_drift,
                "final": {
                    "en1": last.en1,
                    "en2": last.en2,
                    "en3": last.en3,
                    "var_n1": last.variance_n1,
                },
            },
        )
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)
