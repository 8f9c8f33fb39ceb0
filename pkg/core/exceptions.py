"""
Error hierarchy shared by every app.

Each error carries a human-readable ``message`` and an upper-snake ``code`` so it
can be reported as an ``Error`` record (see ``apps.experiments.responses``).
"""

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class Error:
    message: str
    code: str


class ThreeWaveError(Exception):
    code = "INTERNAL_ERROR"

    def __init__(self, message: str, code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        if code is not None:
            self.code = code

    def to_error(self) -> Error:
        return Error(message=self.message, code=self.code)


# Misuse: bad arguments, bad configs


class UsageError(ThreeWaveError):
    code = "USAGE_ERROR"


class DomainError(UsageError):
    code = "DOMAIN_ERROR"


class ConventionError(UsageError):
    code = "CONVENTION_VIOLATION"


class IndexOutOfRange(UsageError, IndexError):
    code = "INDEX_OUT_OF_RANGE"


class ShapeMismatch(UsageError, ValueError):
    code = "SHAPE_MISMATCH"


class BoundaryError(UsageError):
    code = "BOUNDARY_ERROR"


class BranchError(UsageError):
    code = "STABLE_BRANCH"


class ConfigError(UsageError):
    code = "VALIDATION_ERROR"


# Numerical failures


class NumericalError(ThreeWaveError):
    code = "NUMERICAL_ERROR"


class NormalizationError(NumericalError):
    code = "NORMALIZATION_ERROR"


class DegenerateError(NumericalError):
    code = "DEGENERATE"


class DivergenceError(NumericalError):
    code = "DIVERGENCE"

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class IntegrationQualityError(NumericalError):
    code = "INTEGRATION_QUALITY"


class SolverError(NumericalError):
    code = "SOLVER_ERROR"

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


# Filesystem


class ArtifactError(ThreeWaveError):
    code = "IO_ERROR"
