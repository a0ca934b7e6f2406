"""
This module writes run results: the machine summary (json with sorted keys), comma-separated tables and raw field
dumps (little-endian 64 bit floats) with a text header next to them.
"""

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Protocol, Sequence

import numpy as np

from .dynamics import Trajectory
from .errors import ReportWriteError, ValidationError
from .observables import FieldGrid, MomentumReport
from .types import FloatArray, ReportFormat

_logger = logging.getLogger(__name__)

DUMP_DTYPE = "<f8"
DUMP_FORMAT = "mdw-sim field dump 1"
HEADER_SUFFIX = ".hdr"


class Tabular(Protocol):
    """
    Anything with a one-line header and rows of numbers
    """

    @property
    def header(self) -> list[str]:
        """column names"""

    def rows(self) -> list[list[float]]:
        """the table body"""


@dataclass(frozen=True)
class Table:
    """
    A plain table
    """

    columns: list[str]
    body: list[list[Any]]

    @property
    def header(self) -> list[str]:
        """
        column names
        """
        return self.columns

    def rows(self) -> list[list[Any]]:
        """
        the table body
        """
        return self.body


@dataclass(frozen=True)
class FieldDump:
    """
    Arrays sharing the window shape (nx, ny, nz), each with a unit. Vector arrays carry a trailing axis of length 3.
    """

    shape: tuple[int, int, int]
    spacing: tuple[float, float, float]
    arrays: dict[str, FloatArray] = field(default_factory=dict)
    units: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_center(cls, trajectory: Trajectory, field_grid: FieldGrid) -> "FieldDump":
        """
        The medium state and the cycle-averaged field with the pulse in the window center
        """
        state = trajectory.center.state
        grid = trajectory.grid
        return cls(
            shape=grid.shape,
            spacing=grid.spacing,
            arrays={
                "ra": state.ra,
                "va": state.va,
                "rho_mdw": state.rho_mdw,
                "S_avg": field_grid.S_avg,
                "energy_density": field_grid.energy_density,
            },
            units={"ra": "m", "va": "m/s", "rho_mdw": "kg/m^3", "S_avg": "W/m^2", "energy_density": "J/m^3"},
        )

    def header_lines(self) -> list[str]:
        """
        The sidecar header describing the binary layout
        """
        lines = [
            f"format = {DUMP_FORMAT}",
            f"dtype = {DUMP_DTYPE}",
            "order = C",
            f"shape = {' '.join(str(size) for size in self.shape)}",
            f"spacing = {' '.join(repr(float(step)) for step in self.spacing)} m",
        ]
        for name, array in self.arrays.items():
            components = 1 if array.shape == tuple(self.shape) else int(array.shape[-1])
            lines.append(f"variable = {name} {components} {self.units.get(name, '1')}")
        return lines


def _summary_of(report: MomentumReport | Mapping[str, Any]) -> dict[str, Any]:
    if isinstance(report, MomentumReport):
        return report.summary()
    return dict(report)


def _write_summary(report: MomentumReport | Mapping[str, Any], path: Path) -> list[Path]:
    path.write_text(json.dumps(_summary_of(report), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return [path]


def _write_table(table: Tabular, path: Path) -> list[Path]:
    with path.open("w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(table.header)
        writer.writerows(table.rows())
    return [path]


def _write_field_dump(dump: FieldDump, path: Path) -> list[Path]:
    header = path.with_name(path.name + HEADER_SUFFIX)
    with path.open("wb") as file:
        for array in dump.arrays.values():
            np.ascontiguousarray(array, dtype=DUMP_DTYPE).tofile(file)
    header.write_text("\n".join(dump.header_lines()) + "\n", encoding="utf-8")
    return [path, header]


def emit_report(report: Any, fmt: ReportFormat, path: Path | str, logger: logging.Logger = _logger) -> list[Path]:
    """
    Writes `report` in the given format and returns the written files.
    The machine summary takes a MomentumReport or a mapping, tables take anything with `header` and `rows()`
    (e.g. a FiberTable), field dumps take a FieldDump. I/O failures are raised as ReportWriteError naming the path.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        match fmt:
            case ReportFormat.SUMMARY:
                written = _write_summary(report, path)
            case ReportFormat.TABLE:
                written = _write_table(report, path)
            case ReportFormat.FIELD_DUMP:
                if not isinstance(report, FieldDump):
                    raise ValidationError(f"A field dump needs a FieldDump, got {type(report).__name__}")
                written = _write_field_dump(report, path)
            case _:
                raise ValidationError(f"Unknown report format {fmt!r}")
    except OSError as error:
        raise ReportWriteError(error.filename or path, error.strerror or str(error)) from error
    logger.info("Wrote %s", ", ".join(str(file) for file in written))
    return written


def read_field_dump(path: Path | str) -> tuple[dict[str, Any], dict[str, FloatArray]]:
    """
    Reads a field dump and its header. Returns the header entries and the arrays by name, bit-identical to what was
    written.
    """
    path = Path(path)
    header: dict[str, Any] = {"variables": []}
    for line in path.with_name(path.name + HEADER_SUFFIX).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "variable":
            name, components, unit = value.split()
            header["variables"].append((name, int(components), unit))
        else:
            header[key] = value
    if header.get("format") != DUMP_FORMAT:
        raise ValidationError(f"{path} is not a field dump (format {header.get('format')!r})")
    shape = tuple(int(size) for size in header["shape"].split())
    header["shape"] = shape
    header["spacing"] = tuple(float(step) for step in header["spacing"].split()[:3])
    data = np.fromfile(path, dtype=header["dtype"])
    arrays: dict[str, FloatArray] = {}
    start = 0
    for name, components, _ in header["variables"]:
        variable_shape = shape if components == 1 else (*shape, components)
        size = int(np.prod(variable_shape))
        arrays[name] = data[start : start + size].reshape(variable_shape)
        start += size
    if start != data.size:
        raise ValidationError(f"{path} holds {data.size} values, the header describes {start}")
    return header, arrays


def diagnostics_table(trajectory: Trajectory) -> Table:
    """
    Per-step diagnostics of a run: kinetic energy and the z components of MDW momentum, angular momentum and impulse
    """
    body = [
        [float(t), float(kinetic), float(momentum[2]), float(angular[2]), float(impulse[2])]
        for t, kinetic, momentum, angular, impulse in zip(
            trajectory.times,
            trajectory.kinetic_energy,
            trajectory.momentum,
            trajectory.angular_momentum,
            trajectory.impulse,
        )
    ]
    return Table(["t_s", "kinetic_energy_J", "P_mdw_z", "J_mdw_z", "impulse_z"], body)


def convergence_table(levels: Sequence[Mapping[str, Any]]) -> Table:
    """
    One row per refinement level of a convergence study
    """
    columns = ["level", "dz", "dt", "velocity_error", "quantization_error", "quantization_order", "observed_order"]
    return Table(columns, [[level.get(column) for column in columns] for level in levels])
