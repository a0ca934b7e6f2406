"""
This module contains the simulation window: a rectangular grid of cells that sits still while the pulse enters, then
follows the pulse at the group speed c/n and finally sits still again while the pulse leaves.

Coordinates are chosen such that the pulse center is at z = c t / n and coincides with the window center at t = 0.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Self

import numpy as np

from .constants import C_LIGHT
from .errors import InvariantViolation, raise_collected
from .lgfields import MediumSpec, PulseSpec
from .types import FieldPath, FloatArray, RunPhase

MIN_TRANSVERSE_EXTENT = 6.0  # in waists
MIN_LONGITUDINAL_EXTENT = 8.0  # in envelope standard deviations
TIME_AVERAGED_STEP_LIMIT = 0.05  # dt * c * dk0
CARRIER_STEPS_PER_PERIOD = 32
CARRIER_CELLS_PER_WAVELENGTH = 8
ELASTIC_CFL = 0.5
_ROUNDING = 1e-9


@dataclass(frozen=True)
class GridOptions:
    """
    How finely and how far the window resolves the pulse. Extents and margins are given in waists (transverse) and
    envelope standard deviations (longitudinal).
    """

    cells_per_waist: float = 3.0
    cells_per_sigma: float = 4.0
    transverse_extent: float = 8.0
    longitudinal_extent: float = 14.0
    substeps: int | None = None
    """time steps per window cell, derived from the step guards if None"""
    comoving_cells: int | None = None
    """number of cells the window moves with the pulse, one full window length if None"""
    margin: float = 9.0
    """distance between pulse center and window face at the start and the end of the run"""
    include_exit: bool = True
    """if False the run ends with the pulse in the window center"""

    def refined(self, factor: int) -> Self:
        """
        The same options with the longitudinal cell size and the time step divided by `factor`.
        """
        return type(self)(
            cells_per_waist=self.cells_per_waist,
            cells_per_sigma=self.cells_per_sigma * factor,
            transverse_extent=self.transverse_extent,
            longitudinal_extent=self.longitudinal_extent,
            substeps=self.substeps,
            comoving_cells=None if self.comoving_cells is None else self.comoving_cells * factor,
            margin=self.margin,
            include_exit=self.include_exit,
        )


def _odd_cells(extent_in_cells: float) -> int:
    return 2 * math.ceil(extent_in_cells / 2 - _ROUNDING) + 1


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class GridSpec:
    """
    Cell counts, spacings, the window speed and the time axis of a run. Every phase lasts an integer number of window
    cells and every cell an integer number (`substeps`) of time steps, so that phase boundaries fall on steps.
    """

    nx: int
    ny: int
    nz: int
    dx: float
    dy: float
    dz: float
    window_speed: float
    t0: float
    t1: float
    dt: float
    substeps: int
    approach_cells: int
    comoving_cells: int
    exit_cells: int

    @classmethod
    def for_pulse(
        cls, pulse: PulseSpec, medium: MediumSpec, path: FieldPath, options: GridOptions | None = None
    ) -> Self:
        """
        Builds the grid resolving the given pulse. On the instantaneous path the cells also resolve the carrier
        (lambda0 / (8 n)) and the time step is at most a 32nd of the carrier period.
        """
        options = options or GridOptions()
        dx = pulse.w0 / options.cells_per_waist
        nx = _odd_cells(options.transverse_extent * options.cells_per_waist)
        delta_z = pulse.delta_z(medium.n)
        dz = delta_z / options.cells_per_sigma
        if path == FieldPath.INSTANTANEOUS:
            dz = min(dz, pulse.lambda0 / (CARRIER_CELLS_PER_WAVELENGTH * medium.n))
        nz = _odd_cells(options.longitudinal_extent * delta_z / dz)
        speed = C_LIGHT / medium.n
        substeps = options.substeps
        if substeps is None:
            if path == FieldPath.INSTANTANEOUS:
                steps_per_cell = dz / speed / (pulse.carrier_period / CARRIER_STEPS_PER_PERIOD)
            else:
                steps_per_cell = dz / speed * C_LIGHT * pulse.delta_k0 / TIME_AVERAGED_STEP_LIMIT
            substeps = max(1, math.ceil(steps_per_cell - _ROUNDING))
        dt = dz / (speed * substeps)
        margin_cells = math.ceil(options.margin * delta_z / dz - _ROUNDING)
        approach_cells = (nz - 1) // 2 + margin_cells
        comoving_cells = nz if options.comoving_cells is None else options.comoving_cells
        exit_cells = approach_cells if options.include_exit else 0
        t0 = -approach_cells * dz / speed
        n_steps = substeps * (approach_cells + comoving_cells + exit_cells)
        return cls(
            nx=nx,
            ny=nx,
            nz=nz,
            dx=dx,
            dy=dx,
            dz=dz,
            window_speed=speed,
            t0=t0,
            t1=t0 + n_steps * dt,
            dt=dt,
            substeps=substeps,
            approach_cells=approach_cells,
            comoving_cells=comoving_cells,
            exit_cells=exit_cells,
        )

    # pylint: disable=too-many-branches
    def violations(
        self, pulse: PulseSpec, medium: MediumSpec, path: FieldPath, elasticity: bool = False
    ) -> list[InvariantViolation]:
        """
        All violated resolution and stability invariants of this grid for the given pulse.
        """
        found = []
        if min(self.nx, self.ny, self.nz) < 3:
            found.append(
                InvariantViolation("grid.cells_per_waist", f"need at least 3 cells per axis, got {self.shape}")
            )
        if min(self.dx, self.dy, self.dz, self.dt) <= 0:
            found.append(InvariantViolation("grid.substeps", "spacings and time step must be positive"))
            return found
        if min(self.nx * self.dx, self.ny * self.dy) < MIN_TRANSVERSE_EXTENT * pulse.w0:
            found.append(
                InvariantViolation(
                    "grid.transverse_extent",
                    f"transverse extent must be at least {MIN_TRANSVERSE_EXTENT} waists, "
                    f"got {min(self.nx * self.dx, self.ny * self.dy) / pulse.w0:.3g}",
                )
            )
        delta_z = pulse.delta_z(medium.n)
        if self.nz * self.dz < MIN_LONGITUDINAL_EXTENT * delta_z:
            found.append(
                InvariantViolation(
                    "grid.longitudinal_extent",
                    f"longitudinal extent must be at least {MIN_LONGITUDINAL_EXTENT} envelope widths, "
                    f"got {self.nz * self.dz / delta_z:.3g}",
                )
            )
        if path == FieldPath.TIME_AVERAGED:
            if self.dt * C_LIGHT * pulse.delta_k0 > TIME_AVERAGED_STEP_LIMIT * (1 + _ROUNDING):
                found.append(
                    InvariantViolation(
                        "grid.substeps",
                        f"dt = {self.dt:.3e} s exceeds {TIME_AVERAGED_STEP_LIMIT} / (c dk0) "
                        f"= {TIME_AVERAGED_STEP_LIMIT / (C_LIGHT * pulse.delta_k0):.3e} s",
                    )
                )
        else:
            if self.dt > pulse.carrier_period / CARRIER_STEPS_PER_PERIOD * (1 + _ROUNDING):
                found.append(
                    InvariantViolation(
                        "grid.substeps",
                        f"dt = {self.dt:.3e} s exceeds a {CARRIER_STEPS_PER_PERIOD}th of the carrier period",
                    )
                )
            if self.dz > pulse.lambda0 / (4 * medium.n):
                found.append(
                    InvariantViolation("grid.cells_per_sigma", "dz must resolve the carrier (dz <= lambda0 / (4 n))")
                )
        if elasticity:
            sound_speed = math.sqrt(medium.C11 / medium.rho0)
            limit = ELASTIC_CFL * min(self.dx, self.dy, self.dz) / sound_speed
            if self.dt > limit:
                found.append(
                    InvariantViolation("grid.substeps", f"dt = {self.dt:.3e} s exceeds the elastic limit {limit:.3e} s")
                )
        if self.comoving_cells < 0:
            found.append(InvariantViolation("grid.comoving_cells", "must not be negative"))
        return found

    def validate(self, pulse: PulseSpec, medium: MediumSpec, path: FieldPath, elasticity: bool = False) -> Self:
        """
        Raises a ScenarioValidationError listing every violated invariant. Returns self otherwise.
        """
        raise_collected("Invalid grid", self.violations(pulse, medium, path, elasticity))
        return self

    @property
    def shape(self) -> tuple[int, int, int]:
        """
        (nx, ny, nz)
        """
        return self.nx, self.ny, self.nz

    @property
    def spacing(self) -> tuple[float, float, float]:
        """
        (dx, dy, dz)
        """
        return self.dx, self.dy, self.dz

    @property
    def cell_volume(self) -> float:
        """
        dx dy dz
        """
        return self.dx * self.dy * self.dz

    @cached_property
    def x(self) -> FloatArray:
        """
        cell centers along x, symmetric around the axis
        """
        return (np.arange(self.nx) - (self.nx - 1) / 2) * self.dx

    @cached_property
    def y(self) -> FloatArray:
        """
        cell centers along y, symmetric around the axis
        """
        return (np.arange(self.ny) - (self.ny - 1) / 2) * self.dy

    def z_window(self, offset: int) -> FloatArray:
        """
        Lab-frame cell centers along z of the window after it has moved by `offset` cells.
        """
        return (offset + np.arange(self.nz) - (self.nz - 1) / 2) * self.dz

    def window_center(self, offset: int) -> float:
        """
        Lab-frame z of the window center after it has moved by `offset` cells.
        """
        return offset * self.dz

    def positions(self, offset: int) -> FloatArray:
        """
        Cell centers of the window, shape (nx, ny, nz, 3).
        """
        X, Y, Z = np.meshgrid(self.x, self.y, self.z_window(offset), indexing="ij")
        return np.stack([X, Y, Z], axis=-1)

    @property
    def n_steps(self) -> int:
        """
        Number of time steps from t0 to t1
        """
        return self.substeps * (self.approach_cells + self.comoving_cells + self.exit_cells)

    @property
    def center_step(self) -> int:
        """
        The step after which the pulse center sits in the window center for the last time (end of the co-moving
        phase).
        """
        return self.substeps * (self.approach_cells + self.comoving_cells)

    @property
    def center_time(self) -> float:
        """
        The time belonging to center_step
        """
        return self.time(self.center_step)

    def time(self, step: int) -> float:
        """
        Time at the start of step `step` (t0 for step 0)
        """
        return self.t0 + step * self.dt

    def offset_at_step(self, step: int) -> int:
        """
        How many cells the window has moved once `step` steps are done.
        """
        moved = (step - self.substeps * self.approach_cells) // self.substeps
        return min(max(moved, 0), self.comoving_cells)

    def phase_at_step(self, step: int) -> RunPhase:
        """
        The phase step number `step` belongs to.
        """
        if step < self.substeps * self.approach_cells:
            return RunPhase.APPROACH
        if step < self.center_step:
            return RunPhase.COMOVING
        return RunPhase.EXIT
