"""
This module integrates the motion of the medium atoms under the optical (and optionally the elastic) force density
with the velocity Verlet scheme and drives complete runs through the approach, co-moving and exit phases.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Callable, Sequence

import numpy as np

from .constants import C_LIGHT
from .errors import NumericalAbortError, WakeLossError
from .forces import ForceField, OpticalForceModel, elastic_force_density, optical_force_density
from .grid import GridSpec
from .guard import numerical_guard
from .hooks import snapshot_hook
from .lgfields import MediumSpec, PulseField, normalize_u0
from .types import FieldPath, FloatArray, RunPhase

if TYPE_CHECKING:
    from .scenario import Scenario

_logger = logging.getLogger(__name__)

MAX_SPEED_FRACTION = 1e-6
"""atom speeds must stay below this fraction of c for the nonrelativistic equation of motion"""
WAKE_LOSS_FRACTION = 1e-8
"""cells may leave the co-moving window only with speeds below this fraction of the peak speed"""
RING_AZIMUTHS = 64


def _zero_vector() -> FloatArray:
    return np.zeros(3)


@dataclass(frozen=True)
class WakeLedger:
    """
    Momentum, angular momentum (about the origin) and mass excess of the cells that left the co-moving window.
    Those cells feel no force any more, so their momentum and angular momentum stay constant.
    """

    momentum: FloatArray = field(default_factory=_zero_vector)
    angular_momentum: FloatArray = field(default_factory=_zero_vector)
    mass: float = 0.0
    cells: int = 0
    max_speed: float = 0.0

    def angular_momentum_about(self, origin: FloatArray) -> FloatArray:
        """
        angular momentum of the wake about another origin
        """
        return self.angular_momentum - np.cross(origin, self.momentum)


@dataclass(frozen=True)
class MediumState:
    """
    Displacement ra and velocity va of the atoms of every window cell, shape (..., 3), and the mass density
    perturbation rho_mdw = -rho0 div(ra). `offset` counts the cells the window has moved.
    """

    ra: FloatArray
    va: FloatArray
    rho_mdw: FloatArray
    offset: int = 0
    wake: WakeLedger = field(default_factory=WakeLedger)
    peak_speed: float = 0.0

    @classmethod
    def at_rest(cls, shape: tuple[int, ...]) -> "MediumState":
        """
        Undisplaced atoms at rest
        """
        return cls(np.zeros((*shape, 3)), np.zeros((*shape, 3)), np.zeros(shape))

    def momentum(self, medium: MediumSpec, cell_volume: float) -> FloatArray:
        """
        Momentum of the window cells (without wake)
        """
        return medium.rho0 * cell_volume * np.sum(self.va.reshape(-1, 3), axis=0)

    def kinetic_energy(self, medium: MediumSpec, cell_volume: float) -> float:
        """
        Kinetic energy of the window cells
        """
        return 0.5 * medium.rho0 * cell_volume * float(np.sum(self.va**2))


def divergence(ra: FloatArray, spacing: tuple[float, float, float]) -> FloatArray:
    """
    div(ra) on a grid by second-order differences (first order at the faces)
    """
    return sum(np.gradient(ra[..., axis], spacing[axis], axis=axis) for axis in range(3))


def _abort_if_not_finite(array: FloatArray, quantity: str) -> None:
    finite = np.isfinite(array)
    if not finite.all():
        index = tuple(int(i) for i in np.argwhere(~finite)[0][:-1])
        raise NumericalAbortError(f"{quantity} is not finite in cell {index}", index, quantity)


def step(  # pylint: disable=too-many-arguments
    state: MediumState,
    forces: ForceField,
    medium: MediumSpec,
    dt: float,
    *,
    spacing: tuple[float, float, float] | None = None,
    next_forces: Callable[[FloatArray], ForceField] | None = None,
) -> MediumState:
    """
    One velocity Verlet step: ra += va dt + a dt^2 / 2, va += (a + a_next) dt / 2.
    `next_forces` computes the force density at the end of the step from the new displacements; without it the force
    is taken as constant over the step. With `spacing` the mass density perturbation is updated as well.
    Raises a NumericalAbortError if a displacement or velocity stops being finite or an atom gets faster than
    1e-6 c.
    """
    acceleration = forces.f / medium.rho0
    ra = state.ra + state.va * dt + 0.5 * acceleration * dt**2
    _abort_if_not_finite(ra, "ra")
    next_acceleration = acceleration if next_forces is None else next_forces(ra).f / medium.rho0
    va = state.va + 0.5 * (acceleration + next_acceleration) * dt
    _abort_if_not_finite(va, "va")
    speeds = np.linalg.norm(va, axis=-1)
    speed = float(np.max(speeds)) if speeds.size else 0.0
    if speed >= MAX_SPEED_FRACTION * C_LIGHT:
        index = tuple(int(i) for i in np.unravel_index(int(np.argmax(speeds)), speeds.shape))
        raise NumericalAbortError(
            f"atom speed {speed:.3e} m/s in cell {index} exceeds {MAX_SPEED_FRACTION} c", index, "va"
        )
    rho_mdw = -medium.rho0 * divergence(ra, spacing) if spacing is not None else np.zeros(ra.shape[:-1])
    return replace(state, ra=ra, va=va, rho_mdw=rho_mdw, peak_speed=max(state.peak_speed, speed))


def _window_positions(grid: GridSpec, offset: int, cells: slice) -> FloatArray:
    X, Y, Z = np.meshgrid(grid.x, grid.y, grid.z_window(offset)[cells], indexing="ij")
    return np.stack([X, Y, Z], axis=-1)


def comoving_remap(
    state: MediumState, shift: int, grid: GridSpec, medium: MediumSpec, *, wake_limit: float | None = None
) -> MediumState:
    """
    Moves the window forward by `shift` cells. The trailing cells leave the window and their momentum, angular
    momentum and mass excess go to the wake; new cells enter at the leading face undisplaced and at rest.
    Raises a WakeLossError if a leaving cell moves faster than `wake_limit`.
    """
    if shift < 0:
        raise ValueError(f"The window only moves forward, got shift {shift}")
    if shift == 0:
        return state
    shift = min(shift, grid.nz)
    leaving = slice(0, shift)
    va_leaving = state.va[:, :, leaving]
    speed = float(np.max(np.linalg.norm(va_leaving, axis=-1)))
    if wake_limit is not None and speed > wake_limit:
        raise WakeLossError(speed, wake_limit)
    cell_mass = medium.rho0 * grid.cell_volume
    momentum = cell_mass * va_leaving
    positions = _window_positions(grid, state.offset, leaving)
    wake = WakeLedger(
        momentum=state.wake.momentum + np.sum(momentum.reshape(-1, 3), axis=0),
        angular_momentum=state.wake.angular_momentum + np.sum(np.cross(positions, momentum).reshape(-1, 3), axis=0),
        mass=state.wake.mass + float(np.sum(state.rho_mdw[:, :, leaving])) * grid.cell_volume,
        cells=state.wake.cells + shift * grid.nx * grid.ny,
        max_speed=max(state.wake.max_speed, speed),
    )

    def shifted(array: FloatArray) -> FloatArray:
        entering = np.zeros_like(array[:, :, :shift])
        return np.concatenate([array[:, :, shift:], entering], axis=2)

    return replace(
        state,
        ra=shifted(state.ra),
        va=shifted(state.va),
        rho_mdw=shifted(state.rho_mdw),
        offset=state.offset + shift,
        wake=wake,
    )


@dataclass(frozen=True)
class Snapshot:
    """
    The medium state after `step` steps at time `time`.
    """

    step: int
    time: float
    phase: RunPhase
    state: MediumState


# pylint: disable=too-many-instance-attributes
@dataclass
class Trajectory:
    """
    The result of a run: diagnostics per step, the snapshots taken at the configured cadence, the state with the
    pulse in the window center and the final state.
    """

    grid: GridSpec
    u0: float
    times: FloatArray
    kinetic_energy: FloatArray
    momentum: FloatArray
    """window plus wake, shape (steps, 3)"""
    angular_momentum: FloatArray
    """window plus wake about the origin, shape (steps, 3)"""
    impulse: FloatArray
    """time integral of the net force, shape (steps, 3)"""
    bookkeeping_residual: float
    """max |momentum - impulse| relative to the integrated absolute force"""
    center: Snapshot
    final: Snapshot
    snapshots: list[Snapshot] = field(default_factory=list)


class _ForceEvaluator:
    """
    Total force density on the window: optical plus (optionally) elastic.
    """

    def __init__(self, optical: OpticalForceModel, medium: MediumSpec, grid: GridSpec, elasticity: bool):
        self.optical = optical
        self.medium = medium
        self.grid = grid
        self.elasticity = elasticity

    def __call__(self, offset: int, time: float, ra: FloatArray) -> ForceField:
        forces = self.optical.density(self.grid.z_window(offset), time)
        if self.elasticity:
            forces = forces + elastic_force_density(ra, self.medium, self.grid.spacing)
        return forces


# pylint: disable=too-many-locals, too-many-statements
def run(
    scenario: "Scenario",
    *,
    hooks: Sequence[Callable[..., Any]] = (),
    u0: float | None = None,
    logger: logging.Logger = _logger,
) -> Trajectory:
    """
    Runs the scenario from t0 to t1. The window stays put while the pulse enters, follows it for
    `comoving_cells` cells and stays put again while the pulse leaves. The snapshot with the pulse in the window
    center is taken at the end of the co-moving phase.
    The mode amplitude is normalized to the pulse energy unless `u0` is given. Hooks are called for every snapshot
    as hook(state, time, step).
    """
    pulse, medium, grid = scenario.pulse, scenario.medium, scenario.grid
    if u0 is None:
        u0 = normalize_u0(pulse, medium, grid, logger)
    optical = OpticalForceModel(PulseField(pulse, medium, u0, grid.x, grid.y), scenario.mode)
    total_force = _ForceEvaluator(optical, medium, grid, scenario.elasticity)
    snapshot_hooks = [snapshot_hook(hook) for hook in hooks]
    cadence = scenario.outputs.snapshot_every
    volume = grid.cell_volume
    cell_mass = medium.rho0 * volume

    n_steps = grid.n_steps
    times = np.empty(n_steps)
    kinetic = np.empty(n_steps)
    momentum = np.empty((n_steps, 3))
    angular = np.empty((n_steps, 3))
    impulse = np.empty((n_steps, 3))
    integrated_impulse = np.zeros(3)
    integrated_abs_force = 0.0
    snapshots: list[Snapshot] = []

    state = MediumState.at_rest(grid.shape)
    positions = grid.positions(state.offset)
    forces = total_force(state.offset, grid.t0, state.ra)
    center: Snapshot | None = None
    phase = grid.phase_at_step(0)
    logger.info(
        "Running %s on %s cells, %d steps of %.3e s (%s path)",
        scenario.name,
        grid.shape,
        n_steps,
        grid.dt,
        optical.path,
    )
    for index in range(n_steps):
        t_next = grid.time(index + 1)
        computed: list[ForceField] = []

        def next_forces(
            ra: FloatArray, offset: int = state.offset, time: float = t_next, sink: list[ForceField] = computed
        ) -> ForceField:
            sink.append(total_force(offset, time, ra))
            return sink[-1]

        with numerical_guard("ra"):
            state = step(state, forces, medium, grid.dt, spacing=grid.spacing, next_forces=next_forces)
        force_now = forces.total(volume)
        force_next = computed[-1].total(volume)
        integrated_impulse += 0.5 * (force_now + force_next) * grid.dt
        absolute = float(np.sum(np.abs(forces.f)) + np.sum(np.abs(computed[-1].f)))
        integrated_abs_force += 0.5 * grid.dt * volume * absolute

        new_offset = grid.offset_at_step(index + 1)
        if new_offset > state.offset:
            state = comoving_remap(
                state, new_offset - state.offset, grid, medium, wake_limit=WAKE_LOSS_FRACTION * state.peak_speed
            )
            positions = grid.positions(state.offset)
            forces = total_force(state.offset, t_next, state.ra)
        else:
            forces = computed[-1]

        times[index] = t_next
        kinetic[index] = state.kinetic_energy(medium, volume)
        momentum[index] = state.momentum(medium, volume) + state.wake.momentum
        angular[index] = (
            cell_mass * np.sum(np.cross(positions, state.va).reshape(-1, 3), axis=0) + state.wake.angular_momentum
        )
        impulse[index] = integrated_impulse

        new_phase = grid.phase_at_step(index + 1)
        if new_phase != phase:
            logger.info("%s phase done at t = %.6e s", phase, t_next)
            phase = new_phase
        if cadence and (index + 1) % cadence == 0:
            snapshot = Snapshot(index + 1, t_next, phase, state)
            snapshots.append(snapshot)
            logger.debug("Snapshot at step %d", index + 1)
            for hook in snapshot_hooks:
                hook(state, t_next, index + 1)
        if index + 1 == grid.center_step:
            center = Snapshot(index + 1, t_next, RunPhase.COMOVING, state)

    final = Snapshot(n_steps, grid.t1, phase, state)
    if center is None:
        center = final
    scale = integrated_abs_force if integrated_abs_force > 0 else 1.0
    residual = float(np.max(np.abs(momentum - impulse))) / scale if n_steps else 0.0
    logger.info("Run finished, momentum bookkeeping residual %.3e", residual)
    return Trajectory(
        grid=grid,
        u0=u0,
        times=times,
        kinetic_energy=kinetic,
        momentum=momentum,
        angular_momentum=angular,
        impulse=impulse,
        bookkeeping_residual=residual,
        center=center,
        final=final,
        snapshots=snapshots,
    )


@dataclass(frozen=True)
class RingProbe:
    """
    Velocities of atoms on a ring around the beam axis in the plane z = 0, sampled when the pulse center reaches
    the plane.
    """

    radius: float
    phi: FloatArray
    velocities: FloatArray
    time: float

    @property
    def transverse_speed(self) -> FloatArray:
        """
        |v_perp| per azimuth
        """
        return np.hypot(self.velocities[:, 0], self.velocities[:, 1])


def probe_ring(
    scenario: "Scenario",
    radius: float | None = None,
    n_azimuth: int = RING_AZIMUTHS,
    *,
    path: FieldPath | None = None,
    u0: float | None = None,
) -> RingProbe:
    """
    Integrates the motion of atoms on a ring of the given radius (default w0 / 2) from the start of the run until
    the pulse center reaches their plane. The instantaneous path steps with a 32nd of the carrier period.
    """
    pulse, medium, grid = scenario.pulse, scenario.medium, scenario.grid
    path = scenario.mode if path is None else path
    if u0 is None:
        u0 = normalize_u0(pulse, medium, grid)
    radius = pulse.w0 / 2 if radius is None else radius
    phi = 2 * np.pi * np.arange(n_azimuth) / n_azimuth
    r = np.stack([radius * np.cos(phi), radius * np.sin(phi), np.zeros(n_azimuth)], axis=-1)
    dt = pulse.carrier_period / 32 if path == FieldPath.INSTANTANEOUS else grid.dt
    n_steps = math.ceil(-grid.t0 / dt)
    t = -n_steps * dt
    state = MediumState.at_rest((n_azimuth,))
    forces = optical_force_density(path, pulse, u0, medium, r, t)
    for index in range(n_steps):
        t_next = -(n_steps - index - 1) * dt
        computed: list[ForceField] = []

        def next_forces(_: FloatArray, time: float = t_next, sink: list[ForceField] = computed) -> ForceField:
            sink.append(optical_force_density(path, pulse, u0, medium, r, time))
            return sink[-1]

        state = step(state, forces, medium, dt, next_forces=next_forces)
        forces = computed[-1]
    return RingProbe(radius, phi, state.va, 0.0)


def azimuthal_variation(velocities: FloatArray) -> float:
    """
    Coefficient of variation std / mean of the transverse speed |v_perp| around a ring. 0 if nothing moves.
    """
    speeds = np.hypot(velocities[..., 0], velocities[..., 1])
    mean = float(np.mean(speeds))
    if mean == 0:
        return 0.0
    return float(np.std(speeds)) / mean
