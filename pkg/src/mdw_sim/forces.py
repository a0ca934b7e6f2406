"""
This module contains the force densities acting on the medium atoms: the optical force driving the mass density wave
and the elastic restoring force of a cubic crystal.
"""

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .constants import C_LIGHT, EPSILON0
from .errors import UnderresolvedInterfaceError
from .lgfields import MediumSpec, PulseField, PulseSpec, fields, poynting_instantaneous
from .types import FieldPath, FloatArray, ForceProvenance


CENTERED_DIFFERENCE_FRACTION = 1 / 64
"""half width of the centered time difference on the instantaneous path, in carrier periods"""
MAX_INDEX_JUMP = 0.05
"""largest relative change of n^2 between neighboring cells the gradient stencil resolves"""


@dataclass(frozen=True)
class ForceField:
    """
    A force density in N/m^3, last axis of length 3.
    """

    f: FloatArray
    provenance: ForceProvenance = ForceProvenance.OPTICAL

    def __add__(self, other: "ForceField") -> "ForceField":
        return ForceField(self.f + other.f, ForceProvenance.TOTAL)

    def total(self, cell_volume: float) -> FloatArray:
        """
        The net force in N on a window whose cells have the given volume
        """
        return np.sum(self.f.reshape(-1, 3), axis=0) * cell_volume


def _centered_difference_step(pulse: PulseSpec) -> float:
    return pulse.carrier_period * CENTERED_DIFFERENCE_FRACTION


def optical_force_density(
    path: FieldPath, pulse: PulseSpec, u0: float, medium: MediumSpec, r: FloatArray, t: float
) -> ForceField:
    """
    The optical force density ((n^2 - 1) / c^2) d/dt (E x H) at the positions r (shape (..., 3)) and time t.
    The time-averaged path differentiates the cycle-averaged Poynting vector analytically through the envelope. The
    instantaneous path takes a centered difference of the instantaneous E x H with half width T / 64.
    The index gradient term vanishes for the homogeneous media this function accepts.
    """
    r = np.asarray(r, dtype=float)
    factor = (medium.n**2 - 1) / C_LIGHT**2
    if path == FieldPath.TIME_AVERAGED:
        s = r[..., 2] - C_LIGHT * t / medium.n
        rate = 2 * (medium.n * pulse.delta_k0) ** 2 * (C_LIGHT / medium.n) * s
        dS_dt = fields(pulse, u0, medium, r, t).S_avg * rate[..., None]
    else:
        half = _centered_difference_step(pulse)
        later = fields(pulse, u0, medium, r, t + half)
        earlier = fields(pulse, u0, medium, r, t - half)
        dS_dt = (poynting_instantaneous(later.E, later.H) - poynting_instantaneous(earlier.E, earlier.H)) / (2 * half)
    return ForceField(factor * dS_dt, ForceProvenance.OPTICAL)


def index_gradient_force_density(
    mean_square_field: FloatArray, n_squared: FloatArray, spacing: tuple[float, float, float]
) -> ForceField:
    """
    The index gradient term -(eps0 / 2) E^2 grad(n^2) on a grid. `mean_square_field` is the (cycle-averaged or
    instantaneous) E^2, shape (nx, ny, nz); `n_squared` the squared index on the same grid.
    Raises an UnderresolvedInterfaceError where n^2 jumps by more than 5 % between neighboring cells.
    """
    for axis in range(3):
        jumps = np.abs(np.diff(n_squared, axis=axis)) / np.min(n_squared)
        if jumps.size and float(np.max(jumps)) > MAX_INDEX_JUMP:
            index = np.unravel_index(int(np.argmax(jumps)), jumps.shape)
            raise UnderresolvedInterfaceError(
                f"n^2 changes by {float(np.max(jumps)):.3g} between neighboring cells along axis {axis}; "
                "refine the grid at the interface.",
                tuple(int(i) for i in index),
                "n",
            )
    gradient = np.stack(np.gradient(n_squared, *spacing), axis=-1)
    return ForceField(-0.5 * EPSILON0 * mean_square_field[..., None] * gradient, ForceProvenance.OPTICAL)


class OpticalForceModel:
    """
    The optical force density on the cells of a simulation window. Only the z positions change from step to step;
    the transverse profile is precomputed by the PulseField.
    """

    def __init__(self, field: PulseField, path: FieldPath = FieldPath.TIME_AVERAGED):
        self.field = field
        self.path = path
        self.factor = (field.medium.n**2 - 1) / C_LIGHT**2
        self.half_step = _centered_difference_step(field.spec)

    def density(self, z: FloatArray, t: float) -> ForceField:
        """
        Force density on the window cells at the z positions `z`, shape (nx, ny, nz, 3).
        """
        if self.path == FieldPath.TIME_AVERAGED:
            dS_dt = self.field.poynting_avg_rate(z, t)
        else:
            later = self.field.poynting_instantaneous(z, t + self.half_step)
            earlier = self.field.poynting_instantaneous(z, t - self.half_step)
            dS_dt = (later - earlier) / (2 * self.half_step)
        return ForceField(self.factor * dS_dt, ForceProvenance.OPTICAL)


def _interior(padded: FloatArray, offsets: tuple[int, int, int]) -> FloatArray:
    """
    The view of an array padded by one halo cell shifted by `offsets` cells, with the shape of the unpadded array.
    """
    slices = tuple(slice(1 + offset, padded.shape[axis] - 1 + offset) for axis, offset in enumerate(offsets))
    return padded[slices]


def _shift(axis: int, step: int) -> tuple[int, int, int]:
    offsets = [0, 0, 0]
    offsets[axis] = step
    return offsets[0], offsets[1], offsets[2]


def _second_derivative(padded: FloatArray, axis: int, h: float) -> FloatArray:
    return (
        _interior(padded, _shift(axis, 1)) - 2 * _interior(padded, (0, 0, 0)) + _interior(padded, _shift(axis, -1))
    ) / h**2


def _mixed_derivative(padded: FloatArray, axis_a: int, axis_b: int, h_a: float, h_b: float) -> FloatArray:
    def corner(sign_a: int, sign_b: int) -> FloatArray:
        offsets = [0, 0, 0]
        offsets[axis_a] = sign_a
        offsets[axis_b] = sign_b
        return _interior(padded, (offsets[0], offsets[1], offsets[2]))

    return (corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)) / (4 * h_a * h_b)


def _other_axes(axis: int) -> Iterator[int]:
    return (other for other in range(3) if other != axis)


def elastic_force_density(ra: FloatArray, medium: MediumSpec, spacing: tuple[float, float, float]) -> ForceField:
    """
    Restoring force density of a cubic crystal,
    f_i = C11 d_i^2 u_i + C44 sum_{j != i} d_j^2 u_i + (C12 + C44) sum_{j != i} d_i d_j u_j,
    by second-order central differences. The halo repeats the edge cells (no traction across the window faces), so
    the force densities sum to zero over the window as long as the displacement vanishes at the transverse corners.
    """
    padded = [np.pad(ra[..., i], 1, mode="edge") for i in range(3)]
    components = []
    for i in range(3):
        f_i = medium.C11 * _second_derivative(padded[i], i, spacing[i])
        for j in _other_axes(i):
            f_i = f_i + medium.C44 * _second_derivative(padded[i], j, spacing[j])
            f_i = f_i + (medium.C12 + medium.C44) * _mixed_derivative(padded[j], i, j, spacing[i], spacing[j])
        components.append(f_i)
    return ForceField(np.stack(components, axis=-1), ForceProvenance.ELASTIC)


def navier_force_density(
    ra: FloatArray, bulk_modulus: float, shear_modulus: float, spacing: tuple[float, float, float]
) -> ForceField:
    """
    Isotropic (Navier) restoring force density (B + G / 3) grad(div u) + G laplace(u) with the stencils of
    elastic_force_density.
    """
    padded = [np.pad(ra[..., i], 1, mode="edge") for i in range(3)]
    components = []
    for i in range(3):
        grad_div = _second_derivative(padded[i], i, spacing[i])
        laplace = _second_derivative(padded[i], i, spacing[i])
        for j in _other_axes(i):
            grad_div = grad_div + _mixed_derivative(padded[j], i, j, spacing[i], spacing[j])
            laplace = laplace + _second_derivative(padded[i], j, spacing[j])
        components.append((bulk_modulus + shear_modulus / 3) * grad_div + shear_modulus * laplace)
    return ForceField(np.stack(components, axis=-1), ForceProvenance.ELASTIC)


def longitudinal_sound_speed(medium: MediumSpec) -> float:
    """
    sqrt(C11 / rho0), along a cube axis
    """
    return math.sqrt(medium.C11 / medium.rho0)


def transverse_sound_speed(medium: MediumSpec) -> float:
    """
    sqrt(C44 / rho0), along a cube axis
    """
    return math.sqrt(medium.C44 / medium.rho0)


def is_isotropic(medium: MediumSpec, rel_tol: float = 1e-9) -> bool:
    """
    True if C11 - C12 = 2 C44, the cubic crystal then responds like an isotropic solid
    """
    return math.isclose(medium.C11 - medium.C12, 2 * medium.C44, rel_tol=rel_tol)
