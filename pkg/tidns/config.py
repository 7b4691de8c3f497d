from __future__ import annotations

import dataclasses
import enum
import itertools
import logging
import pathlib
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib  # type: ignore[no-redef]
import typing as t

import tomli_w

from tidns import exceptions
from tidns.baselines import BaselineParams
from tidns.baselines import Scheme
from tidns.contracts import IncentiveParams
from tidns.simnet import SimParams
from tidns.simnet import resolve_param_name


if t.TYPE_CHECKING:
    import os

    import typing_extensions as te

    from tidns import types as tt


LOG = logging.getLogger(__name__)

FULL_SCALE_ATTEMPTS = 1_000_000

T = t.TypeVar("T")


@dataclasses.dataclass(frozen=True, kw_only=True)
class PipelineParams:
    block_size: int = 10
    block_interval_ms: tt.TimeMs = 100.0
    create_service_ms: tt.TimeMs = 5.9
    vote_service_ms: tt.TimeMs = 5.0
    finish_service_ms: tt.TimeMs = 9.0
    send_rates: tuple[float, ...] = (
        50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0, 450.0,
    )
    duration_s: float = 10.0
    resolvers: int = 12

    def __post_init__(self) -> None:
        if self.block_size < 1:
            raise exceptions.InvalidConfigError("pipeline", "block_size < 1")
        if self.block_interval_ms <= 0:
            raise exceptions.InvalidConfigError(
                "pipeline", "block_interval_ms <= 0"
            )
        if min(self.service_times(), default=0) <= 0:
            raise exceptions.InvalidConfigError(
                "pipeline", "service times must be positive"
            )
        if self.duration_s < 0:
            raise exceptions.InvalidConfigError("pipeline", "duration_s < 0")
        if any(rate <= 0 for rate in self.send_rates):
            raise exceptions.InvalidConfigError(
                "pipeline", "send rates must be positive"
            )
        if self.resolvers < 2:
            raise exceptions.InvalidConfigError("pipeline", "resolvers < 2")

    def service_times(self) -> tuple[tt.TimeMs, ...]:
        return (
            self.create_service_ms,
            self.vote_service_ms,
            self.finish_service_ms,
        )


@dataclasses.dataclass(frozen=True, kw_only=True)
class PerfParams:
    send_rates: tuple[float, ...] = (
        20.0, 40.0, 60.0, 80.0, 100.0, 120.0, 140.0, 160.0, 180.0, 200.0,
    )
    duration_s: float = 30.0
    consulted: int = 5
    upstream_base_ms: tt.TimeMs = 20.0
    upstream_jitter_ms: tt.TimeMs = 10.0
    upstream_service_ms: tt.TimeMs = 1.2
    resolver_service_ms: tt.TimeMs = 5.0
    ledger_read_ms: tt.TimeMs = 0.5
    dependns_scoring_ms: tt.TimeMs = 1.0
    dnssec_ms: tt.TimeMs = 2.0
    cache_hit_ratio: float = 0.0
    under_attack: bool = False

    def __post_init__(self) -> None:
        if self.consulted < 1:
            raise exceptions.InvalidConfigError("perf", "consulted < 1")
        if not 0 <= self.cache_hit_ratio <= 1:
            raise exceptions.InvalidConfigError(
                "perf", "cache_hit_ratio must be in [0, 1]"
            )
        if self.duration_s < 0:
            raise exceptions.InvalidConfigError("perf", "duration_s < 0")
        if any(rate <= 0 for rate in self.send_rates):
            raise exceptions.InvalidConfigError(
                "perf", "send rates must be positive"
            )
        costs = (
            self.upstream_base_ms,
            self.upstream_jitter_ms,
            self.upstream_service_ms,
            self.resolver_service_ms,
            self.ledger_read_ms,
            self.dependns_scoring_ms,
            self.dnssec_ms,
        )
        if min(costs) < 0:
            raise exceptions.InvalidConfigError(
                "perf", "latency components must be >= 0"
            )


@dataclasses.dataclass(frozen=True, kw_only=True)
class ExperimentParams:
    schemes: tuple[Scheme, ...] = (Scheme.TIDNS,)
    sweep: tuple[tuple[str, tuple[float, ...]], ...] = ()
    replications: int = 3
    out: str | None = dataclasses.field(
        default=None, metadata={"type": str}
    )
    workers: int | None = dataclasses.field(
        default=None, metadata={"type": int}
    )
    full: bool = False
    stake_samples: int = 100

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise exceptions.InvalidConfigError(
                "experiment", "replications must be >= 1"
            )
        if not self.schemes:
            raise exceptions.InvalidConfigError(
                "experiment", "at least one scheme is required"
            )
        if self.workers is not None and self.workers < 1:
            raise exceptions.InvalidConfigError(
                "experiment", "workers must be >= 1"
            )
        for name, values in self.sweep:
            if not values:
                raise exceptions.InvalidConfigError(
                    "experiment", f"sweep {name} has no values"
                )


@dataclasses.dataclass(frozen=True, kw_only=True)
class SweepPoint:
    values: tuple[tuple[str, float], ...] = ()

    def __str__(self) -> str:
        if not self.values:
            return "-"

        return ";".join(f"{name}={fmt_number(v)}" for name, v in self.values)


@dataclasses.dataclass(frozen=True, kw_only=True)
class ExperimentConfig:
    sim: SimParams = dataclasses.field(default_factory=SimParams)
    incentive: IncentiveParams = dataclasses.field(
        default_factory=IncentiveParams
    )
    baseline: BaselineParams = dataclasses.field(
        default_factory=BaselineParams
    )
    pipeline: PipelineParams = dataclasses.field(
        default_factory=PipelineParams
    )
    perf: PerfParams = dataclasses.field(default_factory=PerfParams)
    experiment: ExperimentParams = dataclasses.field(
        default_factory=ExperimentParams
    )

    @classmethod
    def load(cls, path: os.PathLike[str] | pathlib.Path) -> te.Self:
        path = pathlib.Path(path)

        try:
            with path.open("rb") as fp:
                doc = tomllib.load(fp)
        except OSError as exc:
            raise exceptions.InvalidConfigError(
                "experiment", f"cannot read {path}: {exc}"
            ) from exc
        except tomllib.TOMLDecodeError as exc:
            raise exceptions.InvalidConfigError(
                "experiment", f"{path} is not valid TOML: {exc}"
            ) from exc

        LOG.debug("Loaded configuration from %s", path)

        return cls.from_document(doc)

    @classmethod
    def loads(cls, text: str) -> te.Self:
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise exceptions.InvalidConfigError(
                "experiment", f"invalid TOML: {exc}"
            ) from exc

        return cls.from_document(doc)

    @classmethod
    def from_document(cls, doc: t.Mapping[str, t.Any]) -> te.Self:
        sections = {field.name: field for field in dataclasses.fields(cls)}

        if unknown := set(doc) - set(sections):
            raise exceptions.InvalidConfigError(
                "experiment", f"unknown sections {sorted(unknown)}"
            )

        built: dict[str, t.Any] = {}
        for name, value in doc.items():
            if not isinstance(value, dict):
                raise exceptions.InvalidConfigError(name, "must be a table")
            section_cls = sections[name].default_factory
            if name == "experiment":
                value = dict(value)
                value["sweep"] = sweep_from_document(
                    value.get("sweep", {})
                )
            built[name] = build_section(section_cls, name, value)

        config = cls(**built)
        config.sweep_points()

        return config

    def to_document(self) -> dict[str, t.Any]:
        doc = {
            field.name: section_to_document(getattr(self, field.name))
            for field in dataclasses.fields(self)
        }
        doc["experiment"]["sweep"] = {
            name: list(values) for name, values in self.experiment.sweep
        }

        return doc

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_document())

    def dump(self, path: os.PathLike[str] | pathlib.Path) -> None:
        pathlib.Path(path).write_text(self.dumps(), encoding="utf-8")

    def replace(self, **changes: t.Any) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)

    def with_overrides(
        self,
        *,
        seed: int | None = None,
        attempts: int | None = None,
        schemes: t.Sequence[Scheme] | None = None,
        sweep: t.Sequence[tuple[str, tuple[float, ...]]] | None = None,
        out: str | None = None,
        full: bool = False,
        workers: int | None = None,
    ) -> ExperimentConfig:
        """Apply command line flags on top of file values."""

        sim_changes: dict[str, t.Any] = {}
        if seed is not None:
            sim_changes["seed"] = seed
        if attempts is not None:
            sim_changes["attempts"] = attempts
        elif full or self.experiment.full:
            sim_changes["attempts"] = FULL_SCALE_ATTEMPTS

        experiment_changes: dict[str, t.Any] = {}
        if schemes:
            experiment_changes["schemes"] = tuple(schemes)
        if sweep:
            experiment_changes["sweep"] = tuple(sweep)
        if out is not None:
            experiment_changes["out"] = out
        if full:
            experiment_changes["full"] = True
        if workers is not None:
            experiment_changes["workers"] = workers

        config = self.replace(
            sim=dataclasses.replace(self.sim, **sim_changes),
            experiment=dataclasses.replace(
                self.experiment, **experiment_changes
            ),
        )
        config.sweep_points()

        return config

    def sweep_points(self) -> list[tuple[SweepPoint, ExperimentConfig]]:
        """Every sweep point with its configuration, validated up front."""

        names = [name for name, _ in self.experiment.sweep]
        for name in names:
            locate_param(name)

        points = []
        grids = [values for _, values in self.experiment.sweep]
        for combination in itertools.product(*grids):
            point = SweepPoint(values=tuple(zip(names, combination)))
            points.append((point, self.at(point)))

        return points

    def at(self, point: SweepPoint) -> ExperimentConfig:
        changes: dict[str, dict[str, t.Any]] = {}

        for name, value in point.values:
            section, field = locate_param(name)
            current = getattr(getattr(self, section), field)
            changes.setdefault(section, {})[field] = coerce_value(
                section, field, type(current), value
            )

        return self.replace(
            **{
                section: dataclasses.replace(getattr(self, section), **values)
                for section, values in changes.items()
            }
        )


SWEEPABLE_SECTIONS: dict[str, type] = {
    "sim": SimParams,
    "incentive": IncentiveParams,
    "baseline": BaselineParams,
}


def locate_param(name: str) -> tuple[str, str]:
    field = resolve_param_name(name)

    for section, section_cls in SWEEPABLE_SECTIONS.items():
        if field in {f.name for f in dataclasses.fields(section_cls)}:
            return section, field

    raise exceptions.UnknownSweepParameterError(name)


def parse_sweep(text: str) -> tuple[str, tuple[float, ...]]:
    """Parse a --sweep flag like A=5,7,9."""

    name, sep, raw_values = text.partition("=")
    name = name.strip()
    if not sep or not name or not raw_values.strip():
        raise exceptions.InvalidConfigError(
            "experiment", f"sweep {text!r} is not name=v1,v2,..."
        )

    locate_param(name)

    try:
        values = tuple(
            parse_number(item) for item in raw_values.split(",") if item
        )
    except ValueError as exc:
        raise exceptions.InvalidConfigError(
            "experiment", f"sweep {text!r} has a bad value"
        ) from exc

    return name, values


def parse_number(text: str) -> float:
    text = text.strip()

    try:
        return int(text)
    except ValueError:
        return float(text)


def fmt_number(value: float) -> str:
    if isinstance(value, float) and value.is_integer():
        return str(int(value))

    return str(value)


def sweep_from_document(
    doc: t.Any,
) -> tuple[tuple[str, tuple[float, ...]], ...]:
    if not isinstance(doc, dict):
        raise exceptions.InvalidConfigError(
            "experiment", "sweep must be a table of lists"
        )

    sweep = []
    for name, values in doc.items():
        if not isinstance(values, list) or not all(
            isinstance(v, int | float) and not isinstance(v, bool)
            for v in values
        ):
            raise exceptions.InvalidConfigError(
                "experiment", f"sweep {name} must be a list of numbers"
            )
        locate_param(name)
        sweep.append((name, tuple(values)))

    return tuple(sweep)


def build_section(cls: type[T], section: str, doc: dict[str, t.Any]) -> T:
    fields = {field.name: field for field in dataclasses.fields(cls)}

    if unknown := set(doc) - set(fields):
        raise exceptions.InvalidConfigError(
            section, f"unknown keys {sorted(unknown)}"
        )

    values = {}
    for name, value in doc.items():
        field = fields[name]
        if name == "sweep":
            values[name] = value
            continue

        default = (
            field.default
            if field.default is not dataclasses.MISSING
            else field.default_factory()  # type: ignore[misc]
        )
        kind = field.metadata.get("type", type(default))
        if isinstance(default, tuple):
            if not isinstance(value, list):
                raise exceptions.InvalidConfigError(
                    section, f"{name} must be a list"
                )
            item_kind = type(default[0]) if default else float
            values[name] = tuple(
                coerce_value(section, name, item_kind, item) for item in value
            )
        else:
            values[name] = coerce_value(section, name, kind, value)

    return cls(**values)


def coerce_value(section: str, name: str, kind: type, value: t.Any) -> t.Any:
    if isinstance(value, bool) and kind is not bool:
        raise exceptions.InvalidConfigError(
            section, f"{name} must not be bool"
        )

    try:
        if issubclass(kind, enum.Enum):
            return kind(value)
    except ValueError as exc:
        raise exceptions.InvalidConfigError(
            section, f"{name} has unknown value {value!r}"
        ) from exc

    if kind is float and isinstance(value, int | float):
        return float(value)
    if kind is int and isinstance(value, float) and value.is_integer():
        return int(value)
    if not isinstance(value, kind):
        raise exceptions.InvalidConfigError(
            section, f"{name} must be {kind.__name__}, got {value!r}"
        )

    return value


def section_to_document(section: t.Any) -> dict[str, t.Any]:
    doc = {}

    for field in dataclasses.fields(section):
        value = getattr(section, field.name)
        if value is None:
            continue
        doc[field.name] = to_toml_value(value)

    return doc


def to_toml_value(value: t.Any) -> t.Any:
    match value:
        case enum.Enum():
            return value.value
        case tuple() | list():
            return [to_toml_value(item) for item in value]

    return value

