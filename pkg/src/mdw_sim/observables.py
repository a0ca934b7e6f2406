"""
This module computes the linear and angular momenta of the field, the mass density wave and the mass polariton from a
field snapshot and a medium state, together with the transferred mass and the decompositions of the field angular
momentum into orbital and spin parts and into external and internal parts.
All densities are cycle averages.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from .constants import C_LIGHT, EPSILON0, HBAR
from .dynamics import MediumState, Trajectory
from .grid import GridSpec
from .lgfields import MediumSpec, PulseField, PulseSpec
from .types import ComplexArray, FloatArray

if TYPE_CHECKING:
    from .scenario import Scenario

_logger = logging.getLogger(__name__)

SUMMARY_DIGITS = 6


def reduce_cells(values: FloatArray, deterministic: bool = False) -> FloatArray | float:
    """
    Sums a per-cell quantity over all cells. Vector quantities (trailing axis of length 3) keep their last axis.
    The deterministic reduction uses math.fsum, whose result is exactly rounded and thus independent of the
    summation order.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim > 1 and values.shape[-1] == 3:
        flat = values.reshape(-1, 3)
        if deterministic:
            return np.array([math.fsum(flat[:, axis]) for axis in range(3)])
        return np.sum(flat, axis=0)
    if deterministic:
        return math.fsum(values.ravel())
    return float(np.sum(values))


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class FieldGrid:
    """
    Cycle-averaged field quantities on the cells of the simulation window at one time. E and H are the complex
    phasors including carrier and envelope; the gradients of E are taken spectrally across the beam and analytically
    along z.
    """

    x: FloatArray
    y: FloatArray
    z: FloatArray
    time: float
    cell_volume: float
    omega0: float
    E: ComplexArray
    H: ComplexArray
    S_avg: FloatArray
    energy_density: FloatArray
    dE_dx: ComplexArray
    dE_dy: ComplexArray
    dE_dz: ComplexArray

    @classmethod
    def from_pulse_field(cls, pulse_field: PulseField, z: FloatArray, time: float, dz: float) -> "FieldGrid":
        """
        Samples the pulse on the window cells at positions `z` along the axis.
        """
        E, H = pulse_field.phasors(z, time)
        factor = (np.exp(1j * pulse_field.wavenumber * z) * pulse_field.envelope(z, time))[None, None, :, None]
        factor = factor * np.exp(-1j * pulse_field.spec.omega0 * time)
        dE_dx_t, dE_dy_t = pulse_field.transverse_gradient
        along_z = 1j * pulse_field.wavenumber - pulse_field.envelope_rate * pulse_field.retarded(z, time)
        x, y = pulse_field.x, pulse_field.y
        dx = float(x[1] - x[0]) if len(x) > 1 else 1.0
        dy = float(y[1] - y[0]) if len(y) > 1 else 1.0
        return cls(
            x=x,
            y=y,
            z=np.asarray(z, dtype=float),
            time=time,
            cell_volume=dx * dy * dz,
            omega0=pulse_field.spec.omega0,
            E=E,
            H=H,
            S_avg=pulse_field.poynting_avg(z, time),
            energy_density=pulse_field.energy_density(z, time),
            dE_dx=dE_dx_t[:, :, None, :] * factor,
            dE_dy=dE_dy_t[:, :, None, :] * factor,
            dE_dz=E * along_z[None, None, :, None],
        )

    @property
    def positions(self) -> FloatArray:
        """
        cell centers, shape (nx, ny, nz, 3)
        """
        X, Y, Z = np.meshgrid(self.x, self.y, self.z, indexing="ij")
        return np.stack([X, Y, Z], axis=-1)


def _origin(origin: FloatArray | None) -> FloatArray:
    return np.zeros(3) if origin is None else np.asarray(origin, dtype=float)


def field_energy(grid: FieldGrid, deterministic: bool = False) -> float:
    """
    Cycle-averaged electromagnetic energy in the window
    """
    return float(reduce_cells(grid.energy_density, deterministic)) * grid.cell_volume


def energy_centroid(grid: FieldGrid, deterministic: bool = False) -> FloatArray:
    """
    Energy-weighted mean position of the field
    """
    weighted = grid.positions * grid.energy_density[..., None]
    return np.asarray(reduce_cells(weighted, deterministic)) / float(reduce_cells(grid.energy_density, deterministic))


def linear_momentum_field(grid: FieldGrid, deterministic: bool = False) -> FloatArray:
    """
    sum of S_avg / c^2 V
    """
    return np.asarray(reduce_cells(grid.S_avg, deterministic)) * grid.cell_volume / C_LIGHT**2


def angular_momentum_field(
    grid: FieldGrid, origin: FloatArray | None = None, deterministic: bool = False
) -> FloatArray:
    """
    sum of (r - origin) x S_avg / c^2 V
    """
    lever = grid.positions - _origin(origin)
    return np.asarray(reduce_cells(np.cross(lever, grid.S_avg), deterministic)) * grid.cell_volume / C_LIGHT**2


def linear_momentum_mdw(
    state: MediumState, medium: MediumSpec, cell_volume: float, deterministic: bool = False
) -> FloatArray:
    """
    sum of rho0 va V over the window plus the wake
    """
    window = np.asarray(reduce_cells(state.va, deterministic)) * medium.rho0 * cell_volume
    return window + state.wake.momentum


def angular_momentum_mdw(
    state: MediumState,
    grid: GridSpec,
    medium: MediumSpec,
    origin: FloatArray | None = None,
    deterministic: bool = False,
) -> FloatArray:
    """
    sum of (r - origin) x rho0 va V over the window plus the wake
    """
    origin = _origin(origin)
    lever = grid.positions(state.offset) - origin
    window = np.asarray(reduce_cells(np.cross(lever, state.va), deterministic)) * medium.rho0 * grid.cell_volume
    return window + state.wake.angular_momentum_about(origin)


def angular_momentum_mp(
    field_grid: FieldGrid,
    state: MediumState,
    grid: GridSpec,
    medium: MediumSpec,
    origin: FloatArray | None = None,
    deterministic: bool = False,
) -> FloatArray:
    """
    field plus mass density wave
    """
    return angular_momentum_field(field_grid, origin, deterministic) + angular_momentum_mdw(
        state, grid, medium, origin, deterministic
    )


def linear_momenta(
    field_grid: FieldGrid, state: MediumState, medium: MediumSpec, deterministic: bool = False
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """
    (P_field, P_mdw, P_mp)
    """
    p_field = linear_momentum_field(field_grid, deterministic)
    p_mdw = linear_momentum_mdw(state, medium, field_grid.cell_volume, deterministic)
    return p_field, p_mdw, p_field + p_mdw


def transferred_mass(state: MediumState, cell_volume: float, deterministic: bool = False) -> float:
    """
    Mass excess the pulse carries along: the integral of rho_mdw over the window plus the mass the wake took along.
    The transverse redistribution of atoms integrates to zero, so only the mass moved forward across the trailing
    face remains.
    """
    return float(reduce_cells(state.rho_mdw, deterministic)) * cell_volume + state.wake.mass


def compressed_mass(state: MediumState, cell_volume: float, deterministic: bool = False) -> float:
    """
    Integral of the positive part of rho_mdw over the window. Larger than transferred_mass by the transverse
    rarefaction next to the compressed regions.
    """
    return float(reduce_cells(np.maximum(state.rho_mdw, 0.0), deterministic)) * cell_volume


@dataclass(frozen=True)
class AngularDecomposition:
    """
    The field angular momentum split into orbital and spin parts and into external (r0 x P) and internal parts.
    """

    L_field: FloatArray  # pylint: disable=invalid-name
    S_field: FloatArray  # pylint: disable=invalid-name
    J_ext: FloatArray  # pylint: disable=invalid-name
    J_int: FloatArray  # pylint: disable=invalid-name
    J_field: FloatArray  # pylint: disable=invalid-name
    r0: FloatArray

    def summary(self, N_ph: float) -> dict[str, Any]:  # pylint: disable=invalid-name
        """
        Totals and per-photon values (units hbar) as plain floats
        """
        result: dict[str, Any] = {}
        for name in ("L_field", "S_field", "J_ext", "J_int", "J_field"):
            vector = getattr(self, name)
            for axis, component in zip("xyz", vector):
                result[f"{name}_{axis}"] = float(component)
            result[f"{name}_per_photon_z"] = _significant(float(vector[2]) / (N_ph * HBAR))
        result["r0"] = [float(component) for component in self.r0]
        return result


def oam_sam_split(
    grid: FieldGrid, deterministic: bool = False, logger: logging.Logger = _logger
) -> tuple[FloatArray, FloatArray]:
    """
    Orbital and spin angular momentum of the field, cycle-averaged, with the transverse vector potential
    A = E / (i omega0):
        L = eps0 / 2 Re sum_i E_i* (r x grad) A_i V,  S = eps0 / 2 Re (E* x A) V.
    The split is only approximate for paraxial fields.
    """
    logger.warning("The orbital/spin split of paraxial fields is approximate")
    scale = 1 / (1j * grid.omega0)
    r = grid.positions
    x, y, z = r[..., 0:1], r[..., 1:2], r[..., 2:3]
    E_conj = np.conj(grid.E)
    # (r x grad) A_i for every component i, the component index being the last axis
    orbital_x = np.real(np.sum(E_conj * (y * grid.dE_dz - z * grid.dE_dy) * scale, axis=-1))
    orbital_y = np.real(np.sum(E_conj * (z * grid.dE_dx - x * grid.dE_dz) * scale, axis=-1))
    orbital_z = np.real(np.sum(E_conj * (x * grid.dE_dy - y * grid.dE_dx) * scale, axis=-1))
    orbital = np.stack([orbital_x, orbital_y, orbital_z], axis=-1)
    spin = np.real(np.cross(E_conj, grid.E * scale))
    factor = 0.5 * EPSILON0 * grid.cell_volume
    return (
        np.asarray(reduce_cells(orbital, deterministic)) * factor,
        np.asarray(reduce_cells(spin, deterministic)) * factor,
    )


def external_internal_split(
    grid: FieldGrid, r0: FloatArray | None = None, deterministic: bool = False
) -> tuple[FloatArray, FloatArray]:
    """
    J_ext = r0 x P_field and J_int = J_field - J_ext, the angular momentum about r0 (default: the energy centroid).
    """
    r0 = energy_centroid(grid, deterministic) if r0 is None else np.asarray(r0, dtype=float)
    j_ext = np.cross(r0, linear_momentum_field(grid, deterministic))
    j_int = angular_momentum_field(grid, r0, deterministic)
    return j_ext, j_int


def angular_decomposition(
    grid: FieldGrid, r0: FloatArray | None = None, deterministic: bool = False, logger: logging.Logger = _logger
) -> AngularDecomposition:
    """
    Both splits of the field angular momentum about the origin.
    """
    r0 = energy_centroid(grid, deterministic) if r0 is None else np.asarray(r0, dtype=float)
    orbital, spin = oam_sam_split(grid, deterministic, logger)
    j_ext, j_int = external_internal_split(grid, r0, deterministic)
    return AngularDecomposition(orbital, spin, j_ext, j_int, angular_momentum_field(grid, None, deterministic), r0)


def closed_form_expectations(pulse: PulseSpec, medium: MediumSpec) -> dict[str, float]:
    """
    The ideal per-photon angular momenta (units hbar), per-photon linear momenta (units hbar omega0 / c), total linear
    momenta (kg m/s) and transferred mass (kg) of the pulse.
    """
    n = medium.n
    charge = pulse.l + pulse.sigma
    return {
        "J_field_per_photon_z": charge / n**2,
        "J_mdw_per_photon_z": charge * (1 - 1 / n**2),
        "J_mp_per_photon_z": float(charge),
        "P_field_per_photon_z": 1 / n,
        "P_mdw_per_photon_z": n - 1 / n,
        "P_mp_per_photon_z": n,
        "P_field_z": pulse.U0 / (n * C_LIGHT),
        "P_mdw_z": (n - 1 / n) * pulse.U0 / C_LIGHT,
        "P_mp_z": n * pulse.U0 / C_LIGHT,
        "delta_m": (n**2 - 1) * pulse.U0 / C_LIGHT**2,
    }


def _significant(value: float, digits: int = SUMMARY_DIGITS) -> float:
    return float(f"{value:.{digits}g}")


def _ratio(numerator: float, denominator: float) -> float | None:
    return numerator / denominator if denominator != 0 else None


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class MomentumReport:
    """
    Momenta of field, mass density wave (MDW) and mass polariton (MP) with the pulse in the window center.
    Per-photon angular momenta are in units of hbar, per-photon linear momenta in units of hbar omega0 / c.
    """

    P_field: FloatArray  # pylint: disable=invalid-name
    P_mdw: FloatArray  # pylint: disable=invalid-name
    P_mp: FloatArray  # pylint: disable=invalid-name
    J_field: FloatArray  # pylint: disable=invalid-name
    J_mdw: FloatArray  # pylint: disable=invalid-name
    J_mp: FloatArray  # pylint: disable=invalid-name
    U_field: float  # pylint: disable=invalid-name
    delta_m: float
    N_ph: float  # pylint: disable=invalid-name
    omega0: float
    n: float
    kinetic_energy: float
    bookkeeping_residual: float
    expectations: dict[str, float] = field(default_factory=dict)

    @classmethod
    def assemble(  # pylint: disable=too-many-arguments
        cls,
        p_field: FloatArray,
        p_mdw: FloatArray,
        j_field: FloatArray,
        j_mdw: FloatArray,
        u_field: float,
        delta_m: float,
        pulse: PulseSpec,
        medium: MediumSpec,
        kinetic_energy: float = 0.0,
        bookkeeping_residual: float = 0.0,
    ) -> "MomentumReport":
        """
        Builds the report; the mass polariton totals are the sums of field and MDW.
        """
        return cls(
            P_field=p_field,
            P_mdw=p_mdw,
            P_mp=p_field + p_mdw,
            J_field=j_field,
            J_mdw=j_mdw,
            J_mp=j_field + j_mdw,
            U_field=u_field,
            delta_m=delta_m,
            N_ph=pulse.N_ph,
            omega0=pulse.omega0,
            n=medium.n,
            kinetic_energy=kinetic_energy,
            bookkeeping_residual=bookkeeping_residual,
            expectations=closed_form_expectations(pulse, medium),
        )

    def per_photon(self, name: str) -> FloatArray:
        """
        The named angular momentum ("J_field", "J_mdw", "J_mp") in units of hbar or linear momentum ("P_...") in
        units of hbar omega0 / c, per photon.
        """
        vector = getattr(self, name)
        if name.startswith("J"):
            return vector / (self.N_ph * HBAR)
        return vector / (self.N_ph * HBAR * self.omega0 / C_LIGHT)

    @property
    def angular_ratio(self) -> float | None:
        """
        J_mdw_z / J_field_z, n^2 - 1 ideally
        """
        return _ratio(float(self.J_mdw[2]), float(self.J_field[2]))

    @property
    def momentum_ratio(self) -> float | None:
        """
        P_mdw_z / P_field_z, n^2 - 1 ideally
        """
        return _ratio(float(self.P_mdw[2]), float(self.P_field[2]))

    @property
    def energy_ratio(self) -> float | None:
        """
        delta_m c^2 / U_field, n^2 - 1 ideally
        """
        return _ratio(self.delta_m * C_LIGHT**2, self.U_field)

    def summary(self) -> dict[str, Any]:
        """
        A flat dictionary with all totals and the per-photon values (6 significant digits). Keys are stable.
        """
        result: dict[str, Any] = {}
        for name in ("P_field", "P_mdw", "P_mp", "J_field", "J_mdw", "J_mp"):
            vector = getattr(self, name)
            per_photon = self.per_photon(name)
            for axis in range(3):
                component = "xyz"[axis]
                result[f"{name}_{component}"] = float(vector[axis])
                result[f"{name}_per_photon_{component}"] = _significant(float(per_photon[axis]))
        result.update(
            {
                "U_field": self.U_field,
                "delta_m": self.delta_m,
                "N_ph": self.N_ph,
                "n": self.n,
                "kinetic_energy": self.kinetic_energy,
                "bookkeeping_residual": self.bookkeeping_residual,
                "angular_ratio": self.angular_ratio,
                "momentum_ratio": self.momentum_ratio,
                "energy_ratio": self.energy_ratio,
                "expected": {key: _significant(value) for key, value in self.expectations.items()},
            }
        )
        return result


def center_field_grid(trajectory: Trajectory, scenario: "Scenario") -> FieldGrid:
    """
    The field on the window at the time of the pulse-center snapshot
    """
    grid = trajectory.grid
    pulse_field = PulseField(scenario.pulse, scenario.medium, trajectory.u0, grid.x, grid.y)
    center = trajectory.center
    return FieldGrid.from_pulse_field(pulse_field, grid.z_window(center.state.offset), center.time, grid.dz)


def momentum_report(
    trajectory: Trajectory, scenario: "Scenario", deterministic: bool | None = None
) -> MomentumReport:
    """
    Assembles the momentum report from the pulse-center snapshot of a run. Angular momenta are taken about the
    beam axis.
    """
    if deterministic is None:
        deterministic = scenario.outputs.deterministic_reductions
    grid, medium = trajectory.grid, scenario.medium
    state = trajectory.center.state
    field_grid = center_field_grid(trajectory, scenario)
    p_field, p_mdw, _ = linear_momenta(field_grid, state, medium, deterministic)
    return MomentumReport.assemble(
        p_field=p_field,
        p_mdw=p_mdw,
        j_field=angular_momentum_field(field_grid, None, deterministic),
        j_mdw=angular_momentum_mdw(state, grid, medium, None, deterministic),
        u_field=field_energy(field_grid, deterministic),
        delta_m=transferred_mass(state, grid.cell_volume, deterministic),
        pulse=scenario.pulse,
        medium=medium,
        kinetic_energy=state.kinetic_energy(medium, grid.cell_volume),
        bookkeeping_residual=trajectory.bookkeeping_residual,
    )


def scaled_to_reference(report: MomentumReport, N_ph: float) -> dict[str, float]:  # pylint: disable=invalid-name
    """
    Absolute z angular momenta (units hbar) for a pulse with N_ph photons, from the per-photon values of the report.
    """
    return {name: float(report.per_photon(name)[2]) * N_ph for name in ("J_field", "J_mdw", "J_mp")}
