"""
Experiment configs.

A config is a small YAML document; every validation failure raises
``ConfigError`` whose message starts with the dotted path of the offending
field, e.g. ``initial.epsilon: requires initial.m``.
"""

from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Any, List, Optional, Tuple

import yaml

from apps.evolve.inputs import Method
from apps.fock.models import SubspaceSpec
from core.exceptions import ConfigError, ThreeWaveError


class Kind(str, Enum):
    EVOLVE = "evolve"
    CLASSICAL = "classical"
    LINEAR_COMPARE = "linear-compare"
    SPECTRUM = "spectrum"
    CASCADE = "cascade"
    RECURRENCE = "recurrence"
    SWEEP = "sweep"


class Format(str, Enum):
    CSV = "csv"
    JSON = "json"
    SVG = "svg"


def _enum(kind, value, path):
    try:
        return kind(value)
    except ValueError:
        choices = ", ".join(k.value for k in kind)
        raise ConfigError(f"{path}: {value!r} is not one of {choices}")


def _number(value, path, cast=float, minimum=None, positive=False):
    if value is None:
        return None
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    try:
        number = cast(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if cast is int and number != value:
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if positive and number <= 0:
        raise ConfigError(f"{path}: must be positive, got {value!r}")
    if minimum is not None and number < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {value!r}")
    return number


def _numbers(values, path, cast=float, minimum=None) -> Tuple:
    if values is None:
        return ()
    if not isinstance(values, (list, tuple)):
        raise ConfigError(f"{path}: expected a list, got {values!r}")
    return tuple(
        _number(v, f"{path}[{k}]", cast, minimum) for k, v in enumerate(values)
    )


def _mapping(raw, path) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping, got {raw!r}")
    return raw


def _reject_unknown(raw: dict, cls, path: str) -> None:
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        prefix = f"{path}." if path else ""
        raise ConfigError(f"{prefix}{unknown[0]}: unknown field")


@dataclass(frozen=True)
class InitialCondition:
    """Basis index m (optionally spread by epsilon), explicit amplitudes given
    as [re, im] pairs, or classical actions (I1, I2, I3)."""

    m: Optional[int] = None
    epsilon: Optional[float] = None
    amplitudes: Optional[Tuple[Tuple[float, float], ...]] = None
    actions: Optional[Tuple[float, float, float]] = None

    @classmethod
    def from_dict(cls, raw: Any, path: str = "initial") -> "InitialCondition":
        raw = _mapping(raw, path)
        _reject_unknown(raw, cls, path)
        amplitudes = raw.get("amplitudes")
        if amplitudes is not None:
            if not isinstance(amplitudes, list) or not amplitudes:
                raise ConfigError(f"{path}.amplitudes: expected a non-empty list")
            pairs = []
            for k, value in enumerate(amplitudes):
                where = f"{path}.amplitudes[{k}]"
                if isinstance(value, (list, tuple)):
                    if len(value) != 2:
                        raise ConfigError(f"{where}: expected [re, im]")
                    pairs.append(tuple(_numbers(value, where)))
                else:
                    pairs.append((_number(value, where), 0.0))
            amplitudes = tuple(pairs)
        actions = raw.get("actions")
        if actions is not None:
            actions = _numbers(actions, f"{path}.actions", minimum=0.0)
            if len(actions) != 3:
                raise ConfigError(f"{path}.actions: expected three actions")
        condition = cls(
            m=_number(raw.get("m"), f"{path}.m", int, minimum=0),
            epsilon=_number(raw.get("epsilon"), f"{path}.epsilon", minimum=0.0),
            amplitudes=amplitudes,
            actions=actions,
        )
        condition.validate(path)
        return condition

    def validate(self, path: str = "initial") -> None:
        if self.epsilon is not None and self.m is None:
            raise ConfigError(f"{path}.epsilon: requires {path}.m")
        if self.epsilon is not None and self.epsilon >= 1.0:
            raise ConfigError(f"{path}.epsilon: must be below 1, got {self.epsilon}")
        if self.m is not None and self.amplitudes is not None:
            raise ConfigError(f"{path}.amplitudes: conflicts with {path}.m")

    def to_dict(self) -> dict:
        out = {}
        if self.m is not None:
            out["m"] = self.m
        if self.epsilon is not None:
            out["epsilon"] = self.epsilon
        if self.amplitudes is not None:
            out["amplitudes"] = [list(pair) for pair in self.amplitudes]
        if self.actions is not None:
            out["actions"] = list(self.actions)
        return out


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian expansion s2 x s3 x m x epsilon; an empty s3 list means
    s3 = s2 for every row."""

    s2: Tuple[int, ...] = ()
    s3: Tuple[int, ...] = ()
    m: Tuple[int, ...] = (0,)
    epsilon: Tuple[float, ...] = (0.0,)
    divergence: bool = False
    spectrum: bool = False

    @classmethod
    def from_dict(cls, raw: Any, path: str = "sweep") -> "SweepSpec":
        raw = _mapping(raw, path)
        _reject_unknown(raw, cls, path)
        for flag in ("divergence", "spectrum"):
            if not isinstance(raw.get(flag, False), bool):
                raise ConfigError(f"{path}.{flag}: expected true or false")
        return cls(
            s2=_numbers(raw.get("s2"), f"{path}.s2", int, minimum=0),
            s3=_numbers(raw.get("s3"), f"{path}.s3", int, minimum=0),
            m=_numbers(raw.get("m", [0]), f"{path}.m", int, minimum=0),
            epsilon=_numbers(raw.get("epsilon", [0.0]), f"{path}.epsilon", minimum=0.0),
            divergence=raw.get("divergence", False),
            spectrum=raw.get("spectrum", False),
        )

    def expand(self) -> List[Tuple[int, int, int, float]]:
        rows = []
        for s2 in self.s2:
            for s3 in self.s3 or (s2,):
                for m in self.m:
                    for epsilon in self.epsilon:
                        rows.append((s2, s3, m, epsilon))
        return rows

    def to_dict(self) -> dict:
        return {
            "s2": list(self.s2),
            "s3": list(self.s3),
            "m": list(self.m),
            "epsilon": list(self.epsilon),
            "divergence": self.divergence,
            "spectrum": self.spectrum,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    kind: Kind
    label: str = ""
    s2: Optional[int] = None
    s3: Optional[int] = None
    initial: InitialCondition = field(default_factory=InitialCondition)
    tau_max: float = 1.0
    points: int = 101
    method: Method = Method.EXACT_EIGEN
    dt: Optional[float] = None
    with_probabilities: bool = False
    lines: bool = False
    horizon: float = 10.0
    threshold: float = 0.99
    formats: Tuple[Format, ...] = (Format.CSV, Format.JSON)
    sweep: Optional[SweepSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", _enum(Kind, self.kind, "kind"))
        object.__setattr__(self, "method", _enum(Method, self.method, "method"))
        object.__setattr__(
            self,
            "formats",
            tuple(
                _enum(Format, f, f"formats[{k}]") for k, f in enumerate(self.formats)
            ),
        )
        if not self.label:
            object.__setattr__(self, "label", self.kind.value)
        self.validate()

    @property
    def quantum(self) -> bool:
        return self.kind not in (Kind.CLASSICAL, Kind.SWEEP)

    def subspace(self) -> SubspaceSpec:
        try:
            return SubspaceSpec(self.s2, self.s3)
        except ThreeWaveError as e:
            raise ConfigError(f"subspace: {e.message}")

    def validate(self) -> None:
        if self.quantum:
            if self.s2 is None or self.s3 is None:
                raise ConfigError("subspace: s2 and s3 are required")
            spec = self.subspace()
            if self.initial.m is not None and self.initial.m > spec.s2:
                raise ConfigError(
                    f"initial.m: {self.initial.m} outside [0, {spec.s2}]"
                )
            if self.initial.amplitudes is not None and len(
                self.initial.amplitudes
            ) != spec.d:
                raise ConfigError(
                    f"initial.amplitudes: expected {spec.d} amplitudes for {spec}"
                )
        if self.kind is Kind.CLASSICAL and self.initial.actions is None:
            raise ConfigError("initial.actions: required for classical runs")
        if self.kind is Kind.SWEEP and self.sweep is None:
            raise ConfigError("sweep: required for sweep runs")
        if self.points < 2:
            raise ConfigError(f"grid.points: need at least 2, got {self.points}")
        if self.tau_max <= 0.0:
            raise ConfigError(f"grid.tau_max: must be positive, got {self.tau_max}")
        if self.dt is not None and self.dt <= 0.0:
            raise ConfigError(f"dt: must be positive, got {self.dt}")
        if self.horizon <= 0.0:
            raise ConfigError(
                f"recurrence.horizon: must be positive, got {self.horizon}"
            )
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(
                f"recurrence.threshold: must lie in (0, 1), got {self.threshold}"
            )
        if not self.formats:
            raise ConfigError("formats: at least one output format is required")

    @classmethod
    def from_dict(cls, raw: Any) -> "ExperimentConfig":
        raw = _mapping(raw, "config")
        known = {
            "kind",
            "label",
            "subspace",
            "initial",
            "grid",
            "method",
            "dt",
            "with_probabilities",
            "lines",
            "recurrence",
            "formats",
            "sweep",
        }
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"{unknown[0]}: unknown field")
        if "kind" not in raw:
            raise ConfigError("kind: required")
        subspace = _mapping(raw.get("subspace"), "subspace")
        grid = _mapping(raw.get("grid"), "grid")
        recurrence = _mapping(raw.get("recurrence"), "recurrence")
        for flag in ("with_probabilities", "lines"):
            if not isinstance(raw.get(flag, False), bool):
                raise ConfigError(f"{flag}: expected true or false")
        formats = raw.get("formats", ["csv", "json"])
        if not isinstance(formats, list):
            raise ConfigError(f"formats: expected a list, got {formats!r}")
        sweep = raw.get("sweep")
        return cls(
            kind=raw["kind"],
            label=str(raw.get("label", "")),
            s2=_number(subspace.get("s2"), "subspace.s2", int),
            s3=_number(subspace.get("s3"), "subspace.s3", int),
            initial=InitialCondition.from_dict(raw.get("initial")),
            tau_max=_number(grid.get("tau_max", 1.0), "grid.tau_max"),
            points=_number(grid.get("points", 101), "grid.points", int),
            method=raw.get("method", Method.EXACT_EIGEN.value),
            dt=_number(raw.get("dt"), "dt", positive=True),
            with_probabilities=raw.get("with_probabilities", False),
            lines=raw.get("lines", False),
            horizon=_number(recurrence.get("horizon", 10.0), "recurrence.horizon"),
            threshold=_number(
                recurrence.get("threshold", 0.99), "recurrence.threshold"
            ),
            formats=tuple(formats),
            sweep=None if sweep is None else SweepSpec.from_dict(sweep),
        )

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "label": self.label}
        if self.s2 is not None or self.s3 is not None:
            out["subspace"] = {"s2": self.s2, "s3": self.s3}
        initial = self.initial.to_dict()
        if initial:
            out["initial"] = initial
        out["grid"] = {"tau_max": self.tau_max, "points": self.points}
        out["method"] = self.method.value
        if self.dt is not None:
            out["dt"] = self.dt
        out["with_probabilities"] = self.with_probabilities
        out["lines"] = self.lines
        out["recurrence"] = {"horizon": self.horizon, "threshold": self.threshold}
        out["formats"] = [f.value for f in self.formats]
        if self.sweep is not None:
            out["sweep"] = self.sweep.to_dict()
        return out

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(_load(text))

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def wants(self, fmt: Format) -> bool:
        return fmt in self.formats


def _load(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"config: not valid YAML ({e})")


def load_configs(path: Path) -> List[ExperimentConfig]:
    """One config or a list of configs from a YAML file."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"config: cannot read {path}: {e}")
    raw = _load(text)
    if isinstance(raw, list):
        configs = []
        for k, item in enumerate(raw):
            try:
                configs.append(ExperimentConfig.from_dict(item))
            except ConfigError as e:
                raise ConfigError(f"[{k}].{e.message}")
        return configs
    return [ExperimentConfig.from_dict(raw)]
