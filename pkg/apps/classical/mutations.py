# - Export trajectory - Write a classical amplitude trajectory as CSV with the
#   actions, both invariants and the split complex amplitudes per time.
# - Export linear params - Growth rate, B and C1 of the linearized solution as JSON.

from pathlib import Path

from core.artifacts import ArtifactResponse, failed, write_csv, write_json

from .models import ClassicalLinearParams, ClassicalTrajectory

TRAJECTORY_HEADER = [
    "t",
    "I1",
    "I2",
    "I3",
    "s2",
    "s3",
    "ReA1",
    "ImA1",
    "ReA2",
    "ImA2",
    "ReA3",
    "ImA3",
]


def _rows(trajectory: ClassicalTrajectory):
    actions, s2, s3 = trajectory.actions, trajectory.s2, trajectory.s3
    for k, t in enumerate(trajectory.times):
        A = trajectory.amplitudes[k]
        yield [
            t,
            *actions[k],
            s2[k],
            s3[k],
            A[0].real,
            A[0].imag,
            A[1].real,
            A[1].imag,
            A[2].real,
            A[2].imag,
        ]


def export_trajectory(trajectory: ClassicalTrajectory, path: Path) -> ArtifactResponse:
    try:
        artifact = write_csv(path, TRAJECTORY_HEADER, _rows(trajectory))
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)


def export_linear_params(params: ClassicalLinearParams, path: Path) -> ArtifactResponse:
    try:
        artifact = write_json(
            path,
            {
                "I": [params.I1i, params.I2i, params.I3i],
                "gammaC": params.gammaC,
                "gammaC_sq": params.growth.squared,
                "unstable": params.growth.unstable,
                "BC": params.BC,
                "C1": params.C1,
                "c1_printed": params.c1_printed,
            },
        )
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)
