from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from core.artifacts import Artifact, sha256_of
from core.exceptions import ArtifactError, Error

SWEEP_COLUMNS = [
    "label",
    "s2",
    "s3",
    "m",
    "epsilon",
    "n1i",
    "n2i",
    "n3i",
    "gammaQ",
    "gammaC",
    "ratio_minus_one",
    "C1",
    "divergence_time",
    "spacing_deviation",
    "error_code",
    "error_message",
]


@dataclass(frozen=True)
class RunManifest:
    config: dict
    artifacts: List[Artifact]
    version: str
    duration_s: float
    path: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "config": self.config,
            "artifacts": [a.as_dict() for a in self.artifacts],
            "version": self.version,
            "duration_s": self.duration_s,
        }

    def verify(self) -> None:
        """Every listed artifact exists and still matches its checksum."""
        for artifact in self.artifacts:
            path = Path(artifact.path)
            if not path.is_file():
                raise ArtifactError(f"missing artifact {path}")
            if sha256_of(path) != artifact.sha256:
                raise ArtifactError(f"checksum mismatch for {path}")


@dataclass(frozen=True)
class SweepReport:
    rows: List[dict] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> list:
        return [row.get(name) for row in self.rows]

    @property
    def failures(self) -> List[Error]:
        return [
            Error(row["error_message"], row["error_code"])
            for row in self.rows
            if row.get("error_code")
        ]
