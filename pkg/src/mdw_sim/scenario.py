"""
This module reads and writes scenarios and fiber plans and holds the shipped presets.

Scenario files are plain text with one `dotted.key = value [unit]` per line. `#` starts a comment, blank lines are
ignored. Dimensional quantities need a unit; they are converted to SI here and nowhere else.
"""

import hashlib
import logging
import re
import time
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Callable, Mapping, Self

from .errors import InvariantViolation, ScenarioParseError, ScenarioValidationError, ValidationError, raise_collected
from .fiber import FiberPlan
from .grid import GridOptions, GridSpec
from .lgfields import MediumSpec, PulseSpec
from .types import UNSET, FieldPath

_logger = logging.getLogger(__name__)

UNITS: dict[str, tuple[str, float]] = {
    "m": ("length", 1.0),
    "cm": ("length", 1e-2),
    "mm": ("length", 1e-3),
    "um": ("length", 1e-6),
    "nm": ("length", 1e-9),
    "J": ("energy", 1.0),
    "mJ": ("energy", 1e-3),
    "uJ": ("energy", 1e-6),
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "ps": ("time", 1e-12),
    "fs": ("time", 1e-15),
    "kg/m^3": ("density", 1.0),
    "g/cm^3": ("density", 1e3),
    "Pa": ("pressure", 1.0),
    "GPa": ("pressure", 1e9),
    "1/m": ("inverse_length", 1.0),
    "1/cm": ("inverse_length", 1e2),
    "W/m^2": ("intensity", 1.0),
    "W/cm^2": ("intensity", 1e4),
    "J/m^3": ("energy_density", 1.0),
    "J/cm^3": ("energy_density", 1e6),
}
"""unit suffix -> (dimension, factor to SI)"""

SI_UNITS: dict[str, str] = {dimension: unit for unit, (dimension, factor) in UNITS.items() if factor == 1.0}


@dataclass(frozen=True)
class KeySpec:
    """
    Type, dimension and default of one scenario key. Keys whose default is UNSET are mandatory.
    """

    kind: type
    dimension: str | None = None
    default: Any = UNSET

    @property
    def required(self) -> bool:
        """
        True if the key has no default
        """
        return self.default is UNSET


_PULSE_KEYS: dict[str, KeySpec] = {
    "pulse.p": KeySpec(int),
    "pulse.l": KeySpec(int),
    "pulse.sigma": KeySpec(int),
    "pulse.U0": KeySpec(float, "energy"),
    "pulse.lambda0": KeySpec(float, "length"),
    "pulse.rel_bandwidth": KeySpec(float),
    "pulse.w0": KeySpec(float, "length"),
}
_MEDIUM_KEYS: dict[str, KeySpec] = {
    "medium.n": KeySpec(float),
    "medium.rho0": KeySpec(float, "density"),
    "medium.C11": KeySpec(float, "pressure"),
    "medium.C12": KeySpec(float, "pressure"),
    "medium.C44": KeySpec(float, "pressure"),
    "medium.alpha": KeySpec(float, "inverse_length", 0.0),
}
_DEFAULT_GRID = GridOptions()
_GRID_KEYS: dict[str, KeySpec] = {
    "grid.cells_per_waist": KeySpec(float, default=_DEFAULT_GRID.cells_per_waist),
    "grid.cells_per_sigma": KeySpec(float, default=_DEFAULT_GRID.cells_per_sigma),
    "grid.transverse_extent": KeySpec(float, default=_DEFAULT_GRID.transverse_extent),
    "grid.longitudinal_extent": KeySpec(float, default=_DEFAULT_GRID.longitudinal_extent),
    "grid.substeps": KeySpec(int, default=None),
    "grid.comoving_cells": KeySpec(int, default=None),
    "grid.margin": KeySpec(float, default=_DEFAULT_GRID.margin),
    "grid.include_exit": KeySpec(bool, default=_DEFAULT_GRID.include_exit),
}
_RUN_KEYS: dict[str, KeySpec] = {
    "run.name": KeySpec(str, default=None),
    "run.mode": KeySpec(str, default=FieldPath.TIME_AVERAGED.value),
    "run.elasticity": KeySpec(bool, default=False),
    "run.snapshot_every": KeySpec(int, default=0),
    "run.field_dump": KeySpec(bool, default=False),
    "run.report_dir": KeySpec(str, default="reports"),
    "run.deterministic_reductions": KeySpec(bool, default=False),
}
SCENARIO_KEYS: dict[str, KeySpec] = _PULSE_KEYS | _MEDIUM_KEYS | _GRID_KEYS | _RUN_KEYS

FIBER_KEYS: dict[str, KeySpec] = {
    "fiber.R": KeySpec(float, "length", None),
    "fiber.d": KeySpec(float, "length", None),
    "fiber.L": KeySpec(float, "length"),
    "fiber.I": KeySpec(float, "intensity"),
    "fiber.sigma": KeySpec(int),
    "fiber.u_th": KeySpec(float, "energy_density", FiberPlan.u_th),
    "fiber.lambda0": KeySpec(float, "length", FiberPlan.lambda0),
} | _MEDIUM_KEYS

_TRUE = {"true", "yes", "on"}
_FALSE = {"false", "no", "off"}
_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class OutputOptions:
    """
    What a run writes besides the summary.
    """

    snapshot_every: int = 0
    """take a snapshot every this many steps, never if 0"""
    field_dump: bool = False
    report_dir: str = "reports"
    deterministic_reductions: bool = False
    """sum cell values with math.fsum so that reports do not depend on the summation order"""


@dataclass(frozen=True)
class Scenario:
    """
    Everything a run needs: pulse, medium, grid resolution, field path and run controls.
    """

    pulse: PulseSpec
    medium: MediumSpec
    grid_options: GridOptions = field(default_factory=GridOptions)
    mode: FieldPath = FieldPath.TIME_AVERAGED
    elasticity: bool = False
    outputs: OutputOptions = field(default_factory=OutputOptions)
    name: str = "scenario"

    @cached_property
    def grid(self) -> GridSpec:
        """
        The grid resolving the pulse with the configured options
        """
        return GridSpec.for_pulse(self.pulse, self.medium, self.mode, self.grid_options)

    def violations(self) -> list[InvariantViolation]:
        """
        All violated invariants of pulse, medium, grid and run controls. The grid is only checked if the pulse, the
        medium and the grid options are valid, since it cannot be built otherwise.
        """
        found = self.pulse.violations() + self.medium.violations() + _grid_option_violations(self.grid_options)
        if self.outputs.snapshot_every < 0:
            found.append(InvariantViolation("run.snapshot_every", "must not be negative"))
        if not found:
            found.extend(self.grid.violations(self.pulse, self.medium, self.mode, self.elasticity))
        return found

    def validate(self) -> Self:
        """
        Raises a ScenarioValidationError listing every violated invariant. Returns self otherwise.
        """
        raise_collected(f"Invalid scenario {self.name!r}", self.violations())
        return self

    def with_mode(self, mode: FieldPath) -> Self:
        """
        The same scenario on another field path (the grid is derived anew)
        """
        return replace(self, mode=mode, name=f"{self.name}-{mode}")

    def with_grid_options(self, options: GridOptions) -> Self:
        """
        The same scenario with other grid options
        """
        return replace(self, grid_options=options)

    def on_grid_of(self, other: "Scenario") -> Self:
        """
        The same scenario with grid options reproducing the cell length and the time step of `other`'s grid
        """
        grid = other.grid
        options = replace(
            other.grid_options,
            cells_per_sigma=self.pulse.delta_z(self.medium.n) / grid.dz,
            substeps=grid.substeps,
        )
        return replace(self, grid_options=options)

    def with_outputs(self, **changes: Any) -> Self:
        """
        The same scenario with some run controls replaced
        """
        return replace(self, outputs=replace(self.outputs, **changes))


def _grid_option_violations(options: GridOptions) -> list[InvariantViolation]:
    found = []
    for key in ("cells_per_waist", "cells_per_sigma", "transverse_extent", "longitudinal_extent"):
        if not getattr(options, key) > 0:
            found.append(InvariantViolation(f"grid.{key}", f"must be positive, got {getattr(options, key)}"))
    if not options.margin >= 0:
        found.append(InvariantViolation("grid.margin", f"must not be negative, got {options.margin}"))
    if options.substeps is not None and options.substeps < 1:
        found.append(InvariantViolation("grid.substeps", f"must be at least 1, got {options.substeps}"))
    if options.comoving_cells is not None and options.comoving_cells < 0:
        found.append(InvariantViolation("grid.comoving_cells", f"must not be negative, got {options.comoving_cells}"))
    return found


def _convert(kind: type, token: str) -> Any:
    if kind is bool:
        if token.lower() in _TRUE:
            return True
        if token.lower() in _FALSE:
            return False
        raise ValueError(f"expected true or false, got {token!r}")
    return kind(token)


# pylint: disable=too-many-locals
def parse_text(text: str, schema: Mapping[str, KeySpec], source: Path | str = "<string>") -> dict[str, Any]:
    """
    Parses `key = value [unit]` lines into a dictionary of SI values. Only keys of `schema` are accepted.
    Raises a ScenarioParseError pointing at the first malformed line and column.
    """
    values: dict[str, Any] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        first_column = len(line) - len(line.lstrip()) + 1
        if "=" not in line:
            raise ScenarioParseError(source, line_number, first_column, "expected 'key = value [unit]'")
        key_part, value_part = line.split("=", 1)
        key = key_part.strip()
        if key not in schema:
            raise ScenarioParseError(source, line_number, first_column, f"unknown key {key!r}")
        if key in values:
            raise ScenarioParseError(source, line_number, first_column, f"duplicate key {key!r}")
        value_offset = len(key_part) + 2
        spec = schema[key]
        tokens = list(_TOKEN.finditer(value_part))
        if not tokens:
            raise ScenarioParseError(source, line_number, value_offset, f"missing value for {key}")
        if spec.kind is str:
            values[key] = value_part.strip()
            continue
        value_token = tokens[0]
        try:
            value = _convert(spec.kind, value_token.group())
        except ValueError:
            raise ScenarioParseError(
                source,
                line_number,
                value_offset + value_token.start(),
                f"{value_token.group()!r} is not a valid {spec.kind.__name__} for {key}",
            ) from None
        unit_tokens = tokens[1:]
        if spec.dimension is None:
            if unit_tokens:
                raise ScenarioParseError(
                    source, line_number, value_offset + unit_tokens[0].start(), f"{key} is dimensionless, drop the unit"
                )
            values[key] = value
            continue
        if not unit_tokens:
            raise ScenarioParseError(
                source,
                line_number,
                value_offset + value_token.end(),
                f"{key} needs a unit of {spec.dimension}, e.g. {SI_UNITS[spec.dimension]}",
            )
        unit = unit_tokens[0]
        if len(unit_tokens) > 1:
            raise ScenarioParseError(
                source, line_number, value_offset + unit_tokens[1].start(), "unexpected text after the unit"
            )
        if unit.group() not in UNITS:
            raise ScenarioParseError(source, line_number, value_offset + unit.start(), f"unknown unit {unit.group()!r}")
        dimension, factor = UNITS[unit.group()]
        if dimension != spec.dimension:
            raise ScenarioParseError(
                source,
                line_number,
                value_offset + unit.start(),
                f"{unit.group()} is a unit of {dimension}, {key} needs {spec.dimension}",
            )
        values[key] = value * factor
    return values


def _missing(values: Mapping[str, Any], keys: Mapping[str, KeySpec]) -> list[InvariantViolation]:
    return [
        InvariantViolation(key, "missing mandatory key")
        for key, spec in keys.items()
        if spec.required and key not in values
    ]


def _get(values: Mapping[str, Any], schema: Mapping[str, KeySpec], key: str) -> Any:
    return values.get(key, schema[key].default)


def _medium_from_values(values: Mapping[str, Any], schema: Mapping[str, KeySpec]) -> MediumSpec:
    return MediumSpec(
        n=_get(values, schema, "medium.n"),
        rho0=_get(values, schema, "medium.rho0"),
        C11=_get(values, schema, "medium.C11"),
        C12=_get(values, schema, "medium.C12"),
        C44=_get(values, schema, "medium.C44"),
        alpha=_get(values, schema, "medium.alpha"),
    )


def scenario_from_values(values: Mapping[str, Any], default_name: str = "scenario") -> Scenario:
    """
    Builds and validates a scenario from parsed SI values. Every missing key and every violated invariant is
    reported in one ScenarioValidationError.
    """
    violations = _missing(values, SCENARIO_KEYS)
    try:
        mode = FieldPath(_get(values, SCENARIO_KEYS, "run.mode"))
    except ValueError:
        violations.append(
            InvariantViolation("run.mode", f"must be one of {', '.join(path.value for path in FieldPath)}")
        )
        mode = FieldPath.TIME_AVERAGED
    pulse = None
    if not _missing(values, _PULSE_KEYS):
        pulse = PulseSpec(**{key.removeprefix("pulse."): _get(values, SCENARIO_KEYS, key) for key in _PULSE_KEYS})
    medium = None
    if not _missing(values, _MEDIUM_KEYS):
        medium = _medium_from_values(values, SCENARIO_KEYS)
    options = GridOptions(**{key.removeprefix("grid."): _get(values, SCENARIO_KEYS, key) for key in _GRID_KEYS})
    outputs = OutputOptions(
        snapshot_every=_get(values, SCENARIO_KEYS, "run.snapshot_every"),
        field_dump=_get(values, SCENARIO_KEYS, "run.field_dump"),
        report_dir=_get(values, SCENARIO_KEYS, "run.report_dir"),
        deterministic_reductions=_get(values, SCENARIO_KEYS, "run.deterministic_reductions"),
    )
    if pulse is None or medium is None:
        if pulse is not None:
            violations.extend(pulse.violations())
        if medium is not None:
            violations.extend(medium.violations())
        violations.extend(_grid_option_violations(options))
        raise ScenarioValidationError("Invalid scenario", violations)
    scenario = Scenario(
        pulse=pulse,
        medium=medium,
        grid_options=options,
        mode=mode,
        elasticity=_get(values, SCENARIO_KEYS, "run.elasticity"),
        outputs=outputs,
        name=_get(values, SCENARIO_KEYS, "run.name") or default_name,
    )
    raise_collected(f"Invalid scenario {scenario.name!r}", violations + scenario.violations())
    return scenario


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as error:
        raise ScenarioParseError(path, 0, 0, f"cannot read file: {error.strerror or error}") from error


def load_scenario(path: Path | str) -> Scenario:
    """
    Reads, parses and validates a scenario file. The scenario is named after the file unless it sets run.name.
    """
    path = Path(path)
    scenario = scenario_from_values(parse_text(_read(path), SCENARIO_KEYS, path), default_name=path.stem)
    _logger.debug("Loaded scenario %s from %s", scenario.name, path)
    return scenario


def _format_value(value: Any, spec: KeySpec) -> str:
    if isinstance(value, bool):
        text = "true" if value else "false"
    elif isinstance(value, float):
        text = repr(value)
    else:
        text = str(value)
    if spec.dimension is not None:
        text = f"{text} {SI_UNITS[spec.dimension]}"
    return text


def _scenario_values(scenario: Scenario) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for key, value in asdict(scenario.pulse).items():
        values[f"pulse.{key}"] = value
    for key, value in asdict(scenario.medium).items():
        values[f"medium.{key}"] = value
    for key, value in asdict(scenario.grid_options).items():
        values[f"grid.{key}"] = value
    values["run.name"] = scenario.name
    values["run.mode"] = scenario.mode.value
    values["run.elasticity"] = scenario.elasticity
    for key, value in asdict(scenario.outputs).items():
        values[f"run.{key}"] = value
    return values


def dump_values(values: Mapping[str, Any], schema: Mapping[str, KeySpec], title: str) -> str:
    """
    Formats SI values as `key = value unit` lines in schema order. Keys holding None are left out.
    """
    lines = [f"# {title}"]
    section = ""
    for key, spec in schema.items():
        value = values.get(key)
        if value is None:
            continue
        if key.split(".", 1)[0] != section:
            if section:
                lines.append("")
            section = key.split(".", 1)[0]
        lines.append(f"{key} = {_format_value(value, spec)}")
    return "\n".join(lines) + "\n"


def dump_scenario(scenario: Scenario) -> str:
    """
    The scenario in the file format, all quantities in SI units. Loading the text gives back an equal scenario.
    """
    return dump_values(_scenario_values(scenario), SCENARIO_KEYS, f"mdw-sim scenario {scenario.name}")


def save_scenario(scenario: Scenario, path: Path | str) -> Path:
    """
    Writes dump_scenario(scenario) to `path`.
    """
    path = Path(path)
    path.write_text(dump_scenario(scenario), encoding="utf-8")
    return path


def _silicon_preset(name: str, l: int, sigma: int) -> Callable[[], Scenario]:
    def build() -> Scenario:
        medium = MediumSpec.silicon()
        return Scenario(PulseSpec.desk_scale(0, l, sigma, medium.n), medium, name=name)

    return build


def _vacuum_null() -> Scenario:
    medium = MediumSpec.vacuum_like()
    return Scenario(PulseSpec.desk_scale(0, 0, 0, medium.n), medium, name="vacuum-null")


PRESETS: dict[str, Callable[[], Scenario]] = {
    "silicon-lg02-linear": _silicon_preset("silicon-lg02-linear", 2, 0),
    "silicon-lg00-circular": _silicon_preset("silicon-lg00-circular", 0, 1),
    "silicon-lg01-linear": _silicon_preset("silicon-lg01-linear", 1, 0),
    "silicon-lg01-circular": _silicon_preset("silicon-lg01-circular", 1, 1),
    "vacuum-null": _vacuum_null,
}


def preset_names() -> list[str]:
    """
    Names of the shipped presets
    """
    return list(PRESETS)


def load_preset(name: str) -> Scenario:
    """
    A shipped scenario. Raises a ValidationError listing the known names if `name` is unknown.
    """
    try:
        return PRESETS[name]().validate()
    except KeyError:
        raise ValidationError(f"Unknown preset {name!r}. Known presets: {', '.join(PRESETS)}") from None


def resolve_scenario(name_or_path: str) -> Scenario:
    """
    A preset if `name_or_path` names one, the scenario file at that path otherwise.
    """
    if name_or_path in PRESETS:
        return load_preset(name_or_path)
    return load_scenario(name_or_path)


ORACLE_GRID = GridOptions(cells_per_waist=1.5, comoving_cells=0, include_exit=False)
ORACLE_REL_BANDWIDTH = 0.03


def oracle_variant(scenario: Scenario) -> Scenario:
    """
    A cheaper version of the scenario for the instantaneous field path, which has to resolve the carrier: three times
    the bandwidth (a shorter pulse), a coarser transverse grid and a run that ends with the pulse in the window
    center. The per-photon angular momenta do not depend on these choices.
    """
    pulse = replace(scenario.pulse, rel_bandwidth=max(scenario.pulse.rel_bandwidth, ORACLE_REL_BANDWIDTH))
    return replace(scenario, pulse=pulse, grid_options=ORACLE_GRID, name=f"{scenario.name}-oracle")


def fiber_plan_from_values(values: Mapping[str, Any]) -> FiberPlan:
    """
    Builds and validates a fiber plan from parsed SI values. Either fiber.R or fiber.d must be given.
    """
    violations = _missing(values, FIBER_KEYS)
    radius = values.get("fiber.R")
    diameter = values.get("fiber.d")
    if (radius is None) == (diameter is None):
        violations.append(InvariantViolation("fiber.R", "give exactly one of fiber.R and fiber.d"))
    raise_collected("Invalid fiber plan", violations)
    plan = FiberPlan(
        R=radius if radius is not None else diameter / 2,
        L=_get(values, FIBER_KEYS, "fiber.L"),
        I=_get(values, FIBER_KEYS, "fiber.I"),
        sigma=_get(values, FIBER_KEYS, "fiber.sigma"),
        medium=_medium_from_values(values, FIBER_KEYS),
        u_th=_get(values, FIBER_KEYS, "fiber.u_th"),
        lambda0=_get(values, FIBER_KEYS, "fiber.lambda0"),
    )
    return plan.validate()


def load_fiber_plan(path: Path | str) -> FiberPlan:
    """
    Reads, parses and validates a fiber plan file.
    """
    path = Path(path)
    return fiber_plan_from_values(parse_text(_read(path), FIBER_KEYS, path))


def dump_fiber_plan(plan: FiberPlan) -> str:
    """
    The plan in the file format, all quantities in SI units
    """
    values: dict[str, Any] = {f"fiber.{key}": getattr(plan, key) for key in ("R", "L", "I", "sigma", "u_th", "lambda0")}
    values |= {f"medium.{key}": value for key, value in asdict(plan.medium).items()}
    return dump_values(values, FIBER_KEYS, "mdw-sim fiber plan")


REFERENCE_FIBER_DIAMETER = 2.5e-6
REFERENCE_FIBER_LENGTH = 1e-2
REFERENCE_FIBER_INTENSITY = 1.1e13  # 1 % of the silicon breakdown threshold, in W/m^2


def reference_fiber_plan() -> FiberPlan:
    """
    The silicon fiber of the rotation experiment: d = 2.5 um, I = 1.1e9 W/cm^2, right circular light.
    """
    return FiberPlan.from_diameter(
        REFERENCE_FIBER_DIAMETER, REFERENCE_FIBER_LENGTH, REFERENCE_FIBER_INTENSITY, 1, MediumSpec.silicon()
    )


def resolve_fiber_plan(name_or_path: str) -> FiberPlan:
    """
    The reference plan for "silicon-reference", the plan file at that path otherwise.
    """
    if name_or_path == "silicon-reference":
        return reference_fiber_plan().validate()
    return load_fiber_plan(name_or_path)


def code_version() -> str:
    """
    The installed version of mdw-sim, "unknown" when running from a source checkout
    """
    try:
        return version("mdw-sim")
    except PackageNotFoundError:
        return "unknown"


def scenario_hash(scenario: Scenario) -> str:
    """
    sha256 of the serialized scenario
    """
    return hashlib.sha256(dump_scenario(scenario).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    """
    What produced a summary. Reruns with the same scenario hash, code version and deterministic reductions reproduce
    the summary byte for byte; the wall clock time naturally differs.
    """

    scenario_name: str
    scenario_hash: str
    code_version: str
    deterministic_reductions: bool
    wall_clock: float
    """seconds"""
    started_at: float
    """unix time"""
    convergence: dict[str, Any] | None = None

    @classmethod
    def for_run(
        cls, scenario: Scenario, started_at: float, convergence: dict[str, Any] | None = None
    ) -> "RunManifest":
        """
        The manifest of a run that started at `started_at` (time.time()) and has just finished.
        """
        return cls(
            scenario_name=scenario.name,
            scenario_hash=scenario_hash(scenario),
            code_version=code_version(),
            deterministic_reductions=scenario.outputs.deterministic_reductions,
            wall_clock=time.time() - started_at,
            started_at=started_at,
            convergence=convergence,
        )

    def to_dict(self) -> dict[str, Any]:
        """
        plain dictionary for the json file
        """
        return asdict(self)
