"""
Artifact writing shared by the export mutations.

CSV and JSON are written with floats in their shortest round-trip form so a
fixed config reproduces byte-identical files. Every write returns an
``Artifact`` record carrying the sha256 checksum that ends up in the run
manifest.
"""

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .exceptions import ArtifactError, Error

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Artifact:
    path: str
    sha256: str
    bytes: int

    def as_dict(self) -> dict:
        return {"path": self.path, "sha256": self.sha256, "bytes": self.bytes}


@dataclass(frozen=True)
class ArtifactResponse:
    success: bool
    artifact: Optional[Artifact] = None
    error: Optional[Error] = None
    # the exception behind a failed export, kept for chaining
    cause: Optional[BaseException] = field(default=None, repr=False, compare=False)


def fmt(value: Any) -> str:
    """Cell formatting: integers as-is, floats via repr (round-trip exact)."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def record(path: Path) -> Artifact:
    path = Path(path)
    try:
        artifact = Artifact(str(path), sha256_of(path), path.stat().st_size)
    except OSError as e:
        raise ArtifactError(f"cannot read back {path}: {e}") from e
    logger.info("wrote %s (%d bytes)", path, artifact.bytes)
    return artifact


def _prepare(path: Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ArtifactError(f"cannot create {path.parent}: {e}") from e
    return path


def write_csv(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> Artifact:
    path = _prepare(path)
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) for v in row])
    except OSError as e:
        raise ArtifactError(f"cannot write {path}: {e}") from e
    return record(path)


def write_json(path: Path, payload: Any) -> Artifact:
    path = _prepare(path)
    try:
        with open(path, "w") as handle:
            json.dump(_plain(payload), handle, indent=2, sort_keys=True)
            handle.write("\n")
    except OSError as e:
        raise ArtifactError(f"cannot write {path}: {e}") from e
    return record(path)


def failed(e: Exception) -> ArtifactResponse:
    """Wrap an export failure the way every export mutation reports it."""
    error = getattr(e, "to_error", None)
    if error is not None:
        return ArtifactResponse(success=False, error=error(), cause=e)
    if isinstance(e, OSError):
        return ArtifactResponse(
            success=False, error=Error(str(e), "IO_ERROR"), cause=e
        )
    return ArtifactResponse(
        success=False, error=Error(str(e), "INTERNAL_ERROR"), cause=e
    )
