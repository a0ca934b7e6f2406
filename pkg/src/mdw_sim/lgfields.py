"""
This module evaluates Laguerre-Gaussian mode functions and the electric and magnetic fields of linearly and circularly
polarized Laguerre-Gaussian pulses in a nondispersive medium.

The fields use the monochromatic form: the spectral prefactors are evaluated at the central wavenumber, leaving the
carrier exp(i(n k0 z - omega0 t)) and the Gaussian envelope exp(-(n dk0)^2 (z - c t / n)^2 / 2). Beams have a
constant waist (no Gouy phase, no wavefront curvature). The exact Gaussian-spectrum fields are available through
`fields_spectral` for validation.

All complex quantities are phasors in the exp(-i omega t) convention; physical fields are their real parts.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Self

import numpy as np
from scipy.special import roots_hermite

from .constants import (
    C_LIGHT,
    DESK_REL_BANDWIDTH,
    DESK_WAIST_WAVELENGTHS,
    EPSILON0,
    HBAR,
    MU0,
    REFERENCE_DELTA_KX_OVER_K0,
    REFERENCE_LAMBDA0,
    REFERENCE_REL_BANDWIDTH,
    REFERENCE_U0,
    SILICON_ALPHA,
    SILICON_C11,
    SILICON_C12,
    SILICON_C44,
    SILICON_N,
    SILICON_RHO0,
)
from .errors import EnvelopeClippingError, InvariantViolation, raise_collected
from .types import ComplexArray, FloatArray

if TYPE_CHECKING:
    from .grid import GridSpec

_logger = logging.getLogger(__name__)

MAX_REL_BANDWIDTH = 0.1
CLIPPING_LIMIT = 1e-6
SPECTRAL_NODES = 129


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class PulseSpec:
    """
    A Laguerre-Gaussian pulse. sigma is 0 for linear x polarization and +1/-1 for circular polarization.
    """

    p: int
    l: int
    sigma: int
    U0: float
    """total electromagnetic energy in J"""
    lambda0: float
    """central vacuum wavelength in m"""
    rel_bandwidth: float
    """dk0 / k0"""
    w0: float
    """waist radius in m"""

    def violations(self) -> list[InvariantViolation]:
        """
        All violated invariants of this pulse.
        """
        found = []
        if not isinstance(self.p, (int, np.integer)) or self.p < 0:
            found.append(InvariantViolation("pulse.p", f"radial index must be a nonnegative integer, got {self.p}"))
        if not isinstance(self.l, (int, np.integer)):
            found.append(InvariantViolation("pulse.l", f"topological charge must be an integer, got {self.l}"))
        if self.sigma not in (-1, 0, 1):
            found.append(InvariantViolation("pulse.sigma", f"helicity must be -1, 0 or +1, got {self.sigma}"))
        if not self.U0 > 0:
            found.append(InvariantViolation("pulse.U0", f"energy must be positive, got {self.U0}"))
        if not self.lambda0 > 0:
            found.append(InvariantViolation("pulse.lambda0", f"wavelength must be positive, got {self.lambda0}"))
        if not self.w0 > 0:
            found.append(InvariantViolation("pulse.w0", f"waist must be positive, got {self.w0}"))
        if not 0 < self.rel_bandwidth < MAX_REL_BANDWIDTH:
            found.append(
                InvariantViolation(
                    "pulse.rel_bandwidth",
                    f"must lie in (0, {MAX_REL_BANDWIDTH}) for the monochromatic field form, got {self.rel_bandwidth}",
                )
            )
        return found

    def validate(self) -> Self:
        """
        Raises a ScenarioValidationError listing every violated invariant. Returns self otherwise.
        """
        raise_collected("Invalid pulse", self.violations())
        return self

    @property
    def is_circular(self) -> bool:
        """
        True for sigma = +1 or -1
        """
        return self.sigma != 0

    @property
    def k0(self) -> float:
        """
        vacuum wavenumber in 1/m
        """
        return 2 * math.pi / self.lambda0

    @property
    def omega0(self) -> float:
        """
        central angular frequency in 1/s
        """
        return C_LIGHT * self.k0

    @property
    def carrier_period(self) -> float:
        """
        2 pi / omega0 in s
        """
        return 2 * math.pi / self.omega0

    @property
    def N_ph(self) -> float:  # pylint: disable=invalid-name
        """
        photon number U0 / (hbar omega0)
        """
        return self.U0 / (HBAR * self.omega0)

    @property
    def delta_k0(self) -> float:
        """
        spectral width of the vacuum wavenumber in 1/m
        """
        return self.rel_bandwidth * self.k0

    @property
    def delta_kx(self) -> float:
        """
        transverse wavenumber width sqrt(2) / w0 (equal for x and y)
        """
        return math.sqrt(2) / self.w0

    def delta_z(self, n: float) -> float:
        """
        standard deviation of the intensity envelope along z in a medium of index n
        """
        return 1 / (math.sqrt(2) * n * self.delta_k0)

    def delta_t(self, n: float) -> float:
        """
        standard deviation of the intensity envelope in time
        """
        return n * self.delta_z(n) / C_LIGHT

    def fwhm_duration(self, n: float) -> float:
        """
        full width at half maximum of the intensity in time
        """
        return 2 * math.sqrt(2 * math.log(2)) * self.delta_t(n)

    @classmethod
    def desk_scale(  # pylint: disable=too-many-arguments
        cls,
        p: int,
        l: int,
        sigma: int,
        n: float,
        *,
        U0: float = REFERENCE_U0,
        lambda0: float = REFERENCE_LAMBDA0,
        rel_bandwidth: float = DESK_REL_BANDWIDTH,
    ) -> Self:
        """
        A pulse with w0 = 20 lambda0 / n, small enough for a workstation grid. The per-photon angular momenta do not
        depend on the waist or the bandwidth.
        """
        return cls(p, l, sigma, U0, lambda0, rel_bandwidth, DESK_WAIST_WAVELENGTHS * lambda0 / n)

    @classmethod
    def from_beam_divergence(  # pylint: disable=too-many-arguments
        cls,
        p: int,
        l: int,
        sigma: int,
        delta_kx_over_k0: float = REFERENCE_DELTA_KX_OVER_K0,
        rel_bandwidth: float = REFERENCE_REL_BANDWIDTH,
        *,
        U0: float = REFERENCE_U0,
        lambda0: float = REFERENCE_LAMBDA0,
    ) -> Self:
        """
        A pulse given by its transverse wavenumber width relative to k0, w0 = sqrt(2) / dk_x. The defaults give the
        millimeter-sized silicon reference pulse.
        """
        k0 = 2 * math.pi / lambda0
        return cls(p, l, sigma, U0, lambda0, rel_bandwidth, math.sqrt(2) / (delta_kx_over_k0 * k0))


@dataclass(frozen=True)
class MediumSpec:
    """
    A homogeneous nondispersive cubic crystal.
    """

    n: float
    rho0: float
    """mass density in kg/m^3"""
    C11: float  # pylint: disable=invalid-name
    C12: float  # pylint: disable=invalid-name
    C44: float  # pylint: disable=invalid-name
    alpha: float = 0.0
    """absorption coefficient in 1/m"""

    def violations(self) -> list[InvariantViolation]:
        """
        All violated invariants of this medium.
        """
        found = []
        if not self.n >= 1:
            found.append(InvariantViolation("medium.n", f"refractive index must be >= 1, got {self.n}"))
        if not self.rho0 > 0:
            found.append(InvariantViolation("medium.rho0", f"density must be positive, got {self.rho0}"))
        for key in ("C11", "C12", "C44"):
            value = getattr(self, key)
            if not value > 0:
                found.append(InvariantViolation(f"medium.{key}", f"elastic constant must be positive, got {value}"))
        if not self.alpha >= 0:
            found.append(InvariantViolation("medium.alpha", f"absorption must be nonnegative, got {self.alpha}"))
        return found

    def validate(self) -> Self:
        """
        Raises a ScenarioValidationError listing every violated invariant. Returns self otherwise.
        """
        raise_collected("Invalid medium", self.violations())
        return self

    @property
    def bulk_modulus(self) -> float:
        """
        B = (C11 + 2 C12) / 3
        """
        return (self.C11 + 2 * self.C12) / 3

    @property
    def shear_modulus(self) -> float:
        """
        G = C44
        """
        return self.C44

    @classmethod
    def silicon(cls, n: float = SILICON_N) -> Self:
        """
        Crystalline silicon. The index can be overridden to study the index dependence with silicon mechanics.
        """
        return cls(n, SILICON_RHO0, SILICON_C11, SILICON_C12, SILICON_C44, SILICON_ALPHA)

    @classmethod
    def vacuum_like(cls) -> Self:
        """
        n = 1 with silicon mechanics: the optical force vanishes identically.
        """
        return cls(1.0, SILICON_RHO0, SILICON_C11, SILICON_C12, SILICON_C44, 0.0)


@dataclass(frozen=True)
class ComplexAmplitude:
    """
    A complex mode amplitude split into real and imaginary part. Works for scalars and arrays alike.
    """

    re: float | FloatArray
    im: float | FloatArray

    @classmethod
    def from_complex(cls, value: complex | ComplexArray) -> Self:
        """
        Splits a complex number or array.
        """
        return cls(np.real(value), np.imag(value))

    @property
    def value(self) -> complex | ComplexArray:
        """
        re + i im
        """
        return self.re + 1j * self.im

    @property
    def magnitude(self) -> float | FloatArray:
        """
        |u|
        """
        return np.hypot(self.re, self.im)

    @property
    def phase(self) -> float | FloatArray:
        """
        arg(u) in (-pi, pi]
        """
        return np.arctan2(self.im, self.re)


@dataclass(frozen=True)
class FieldSample:
    """
    Fields at one or many points. Every array has a trailing axis of length 3.
    """

    E: FloatArray
    """electric field in V/m"""
    H: FloatArray
    """magnetic field in A/m"""
    S_avg: FloatArray
    """cycle-averaged Poynting vector in W/m^2"""


def laguerre(p: int, a: int, x: float | FloatArray) -> float | FloatArray:
    """
    Generalized Laguerre polynomial L_p^a(x) by the three-term recurrence
    (k + 1) L_{k+1} = (2k + 1 + a - x) L_k - (k + a) L_{k-1}.
    """
    x = np.asarray(x, dtype=float)
    previous = np.ones_like(x)
    if p == 0:
        return previous if previous.ndim else float(previous)
    current = 1.0 + a - x
    for k in range(1, p):
        previous, current = current, ((2 * k + 1 + a - x) * current - (k + a) * previous) / (k + 1)
    return current if current.ndim else float(current)


def lg_mode(spec: PulseSpec, u0: float, r: float | FloatArray, phi: float | FloatArray) -> ComplexAmplitude:
    """
    The mode function u_{p,l}(r, phi) = u0 (sqrt(2) r / w0)^|l| exp(-r^2 / w0^2) exp(i l phi) L_p^|l|(2 r^2 / w0^2).
    """
    m = abs(spec.l)
    r = np.asarray(r, dtype=float)
    rho2 = 2 * r**2 / spec.w0**2
    radial = u0 * np.sqrt(rho2) ** m * np.exp(-(r**2) / spec.w0**2) * laguerre(spec.p, m, rho2)
    return ComplexAmplitude.from_complex(radial * np.exp(1j * spec.l * np.asarray(phi, dtype=float)))


def mode_profile(
    spec: PulseSpec, u0: float, x: float | FloatArray, y: float | FloatArray
) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
    """
    Returns u, du/dx and du/dy in Cartesian coordinates. The vortex factor r^|l| exp(i l phi) is written as
    (x + i sgn(l) y)^|l| which keeps the derivatives regular on the axis.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    m = abs(spec.l)
    s = 1 if spec.l >= 0 else -1
    w2 = spec.w0**2
    q = x**2 + y**2
    gauss = np.exp(-q / w2)
    lag = laguerre(spec.p, m, 2 * q / w2)
    lag_prime = -laguerre(spec.p - 1, m + 1, 2 * q / w2) if spec.p > 0 else np.zeros_like(q)
    g = gauss * lag
    dg_dq = gauss * (-lag / w2 + 2 * lag_prime / w2)
    prefactor = u0 * (math.sqrt(2) / spec.w0) ** m
    zeta = x + 1j * s * y
    vortex = zeta**m
    u = prefactor * vortex * g
    du_dx = prefactor * vortex * dg_dq * 2 * x
    du_dy = prefactor * vortex * dg_dq * 2 * y
    if m > 0:
        d_vortex = m * zeta ** (m - 1)
        du_dx = du_dx + prefactor * d_vortex * g
        du_dy = du_dy + prefactor * 1j * s * d_vortex * g
    return u, du_dx, du_dy


def _stack(x: ComplexArray | complex, y: ComplexArray | complex, z: ComplexArray | complex) -> ComplexArray:
    x, y, z = np.broadcast_arrays(np.asarray(x), np.asarray(y), np.asarray(z))
    return np.stack([x, y, z], axis=-1).astype(complex)


# pylint: disable=too-many-arguments, too-many-locals
def mode_phasors(
    spec: PulseSpec,
    u0: float,
    medium: MediumSpec,
    x: float | FloatArray,
    y: float | FloatArray,
    *,
    omega: float | None = None,
    k: float | None = None,
) -> tuple[ComplexArray, ComplexArray]:
    """
    Transverse profiles of the E and H phasors (without carrier and envelope), shape (..., 3).
    `omega` and `k` (wavenumber in the medium) default to the central values omega0 and n k0; the spectral oracle
    passes other values.

    Linear polarization:
        E = i omega (u x + i du/dx / k z),  H = (i k / mu0) (u y + i du/dy / k z)
    Circular polarization (phase offset sigma pi / 2):
        E = (E_x-part + i sigma E_y-part) / sqrt(2),  H = (H_y-part - i sigma H_x-part) / sqrt(2)
    """
    omega = spec.omega0 if omega is None else omega
    k = medium.n * spec.k0 if k is None else k
    u, du_dx, du_dy = mode_profile(spec, u0, x, y)
    zero = np.zeros_like(u)
    e_xpart = 1j * omega * _stack(u, zero, 1j * du_dx / k)
    h_ypart = (1j * k / MU0) * _stack(zero, u, 1j * du_dy / k)
    if not spec.is_circular:
        return e_xpart, h_ypart
    e_ypart = 1j * omega * _stack(zero, u, 1j * du_dy / k)
    h_xpart = (1j * k / MU0) * _stack(u, zero, 1j * du_dx / k)
    offset = 1j * spec.sigma
    return (e_xpart + offset * e_ypart) / math.sqrt(2), (h_ypart - offset * h_xpart) / math.sqrt(2)


def poynting_avg(E: ComplexArray, H: ComplexArray) -> FloatArray:
    """
    Cycle average of Re(E e^{-i omega t}) x Re(H e^{-i omega t}): Re(E x H*) / 2.
    """
    return 0.5 * np.real(np.cross(E, np.conj(H)))


def energy_density_avg(E: ComplexArray, H: ComplexArray, medium: MediumSpec) -> FloatArray:
    """
    Cycle-averaged electromagnetic energy density (eps0 n^2 |E|^2 + mu0 |H|^2) / 4.
    """
    e2 = np.sum(np.abs(E) ** 2, axis=-1)
    h2 = np.sum(np.abs(H) ** 2, axis=-1)
    return 0.25 * (EPSILON0 * medium.n**2 * e2 + MU0 * h2)


def poynting_instantaneous(E: FloatArray, H: FloatArray) -> FloatArray:
    """
    E x H. The linear momentum density of the field is this divided by c^2.
    """
    return np.cross(E, H)


def envelope(spec: PulseSpec, medium: MediumSpec, z: float | FloatArray, t: float) -> FloatArray:
    """
    Field envelope exp(-(n dk0)^2 (z - c t / n)^2 / 2).
    """
    s = np.asarray(z, dtype=float) - C_LIGHT * t / medium.n
    return np.exp(-0.5 * (medium.n * spec.delta_k0 * s) ** 2)


def carrier(spec: PulseSpec, medium: MediumSpec, z: float | FloatArray, t: float) -> ComplexArray:
    """
    exp(i (n k0 z - omega0 t))
    """
    return np.exp(1j * (medium.n * spec.k0 * np.asarray(z, dtype=float) - spec.omega0 * t))


def _fields(spec: PulseSpec, u0: float, medium: MediumSpec, r: FloatArray, t: float) -> FieldSample:
    r = np.asarray(r, dtype=float)
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    E_t, H_t = mode_phasors(spec, u0, medium, x, y)
    env = envelope(spec, medium, z, t)[..., None]
    phase = carrier(spec, medium, z, t)[..., None]
    return FieldSample(
        E=np.real(E_t * phase) * env,
        H=np.real(H_t * phase) * env,
        S_avg=poynting_avg(E_t, H_t) * env**2,
    )


def fields_linear(spec: PulseSpec, u0: float, medium: MediumSpec, r: FloatArray, t: float) -> FieldSample:
    """
    Fields of the linearly (x) polarized pulse at position(s) r (shape (..., 3)) and time t.
    """
    if spec.sigma != 0:
        raise InvariantViolation("pulse.sigma", f"fields_linear needs sigma = 0, got {spec.sigma}")
    return _fields(spec, u0, medium, r, t)


def fields_circular(spec: PulseSpec, u0: float, medium: MediumSpec, r: FloatArray, t: float) -> FieldSample:
    """
    Fields of the circularly polarized pulse at position(s) r (shape (..., 3)) and time t.
    The cycle-averaged Poynting vector contains the spin term -(omega0 / 4 mu0) sigma d|u|^2/dr in the azimuthal
    direction in addition to the linear-polarization terms.
    """
    if not spec.is_circular:
        raise InvariantViolation("pulse.sigma", f"fields_circular needs sigma = +1 or -1, got {spec.sigma}")
    return _fields(spec, u0, medium, r, t)


def fields(spec: PulseSpec, u0: float, medium: MediumSpec, r: FloatArray, t: float) -> FieldSample:
    """
    Dispatches to fields_linear or fields_circular.
    """
    if spec.is_circular:
        return fields_circular(spec, u0, medium, r, t)
    return fields_linear(spec, u0, medium, r, t)


def fields_spectral(
    spec: PulseSpec, u0: float, medium: MediumSpec, r: FloatArray, t: float, nodes: int = SPECTRAL_NODES
) -> FieldSample:
    """
    Fields of the pulse with a Gaussian wavenumber spectrum centered at n k0 with width n dk0 and omega(k) = c k / n,
    integrated by Gauss-Hermite quadrature. The prefactors omega(k) and 1/k are evaluated per node. Validation only.
    S_avg is computed from the complex analytic signals at the central frequency.
    """
    r = np.asarray(r, dtype=float)
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    xi, weights = roots_hermite(nodes)
    k_center = medium.n * spec.k0
    k_width = medium.n * spec.delta_k0
    E_c = np.zeros(r.shape, dtype=complex)
    H_c = np.zeros(r.shape, dtype=complex)
    for xi_i, weight in zip(xi, weights):
        k = k_center + math.sqrt(2) * k_width * xi_i
        omega = C_LIGHT * k / medium.n
        E_t, H_t = mode_phasors(spec, u0, medium, x, y, omega=omega, k=k)
        phase = (weight / math.sqrt(math.pi)) * np.exp(1j * (k * z - omega * t))[..., None]
        E_c += E_t * phase
        H_c += H_t * phase
    return FieldSample(E=np.real(E_c), H=np.real(H_c), S_avg=poynting_avg(E_c, H_c))


class PulseField:
    """
    The pulse sampled on the transverse grid of a simulation window. The transverse phasor profiles are computed
    once; fields at any time on any set of z positions follow by broadcasting against carrier and envelope.
    Arrays returned have shape (nx, ny, nz, 3) or (nx, ny, nz).
    """

    def __init__(self, spec: PulseSpec, medium: MediumSpec, u0: float, x: FloatArray, y: FloatArray):
        self.spec = spec
        self.medium = medium
        self.u0 = u0
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        self.E_t, self.H_t = mode_phasors(spec, u0, medium, X, Y)
        self.S_t = poynting_avg(self.E_t, self.H_t)
        self.w_t = energy_density_avg(self.E_t, self.H_t, medium)

    @property
    def wavenumber(self) -> float:
        """
        n k0
        """
        return self.medium.n * self.spec.k0

    @property
    def envelope_rate(self) -> float:
        """
        (n dk0)^2, the curvature of the log-envelope
        """
        return (self.medium.n * self.spec.delta_k0) ** 2

    def retarded(self, z: FloatArray, t: float) -> FloatArray:
        """
        z - c t / n, the position relative to the pulse center
        """
        return np.asarray(z, dtype=float) - C_LIGHT * t / self.medium.n

    def envelope(self, z: FloatArray, t: float) -> FloatArray:
        """
        The field envelope along z
        """
        return envelope(self.spec, self.medium, z, t)

    def poynting_avg(self, z: FloatArray, t: float) -> FloatArray:
        """
        cycle-averaged Poynting vector
        """
        return self.S_t[:, :, None, :] * (self.envelope(z, t) ** 2)[None, None, :, None]

    def poynting_avg_rate(self, z: FloatArray, t: float) -> FloatArray:
        """
        d S_avg / dt from the analytic derivative of the squared envelope,
        d/dt exp(-a s^2) = 2 a (c / n) s exp(-a s^2) with s = z - c t / n and a = (n dk0)^2.
        """
        s = self.retarded(z, t)
        rate = 2 * self.envelope_rate * (C_LIGHT / self.medium.n) * s * self.envelope(z, t) ** 2
        return self.S_t[:, :, None, :] * rate[None, None, :, None]

    def energy_density(self, z: FloatArray, t: float) -> FloatArray:
        """
        cycle-averaged energy density
        """
        return self.w_t[:, :, None] * (self.envelope(z, t) ** 2)[None, None, :]

    def phasors(self, z: FloatArray, t: float) -> tuple[ComplexArray, ComplexArray]:
        """
        Complex E and H including carrier and envelope: the physical fields are their real parts.
        """
        factor = (carrier(self.spec, self.medium, z, t) * self.envelope(z, t))[None, None, :, None]
        return self.E_t[:, :, None, :] * factor, self.H_t[:, :, None, :] * factor

    def fields(self, z: FloatArray, t: float) -> tuple[FloatArray, FloatArray]:
        """
        Instantaneous E and H.
        """
        E, H = self.phasors(z, t)
        return np.real(E), np.real(H)

    def poynting_instantaneous(self, z: FloatArray, t: float) -> FloatArray:
        """
        Instantaneous E x H.
        """
        E, H = self.fields(z, t)
        return poynting_instantaneous(E, H)

    @cached_property
    def transverse_gradient(self) -> tuple[ComplexArray, ComplexArray]:
        """
        d E_t / dx and d E_t / dy by spectral differentiation of the transverse profile. The profile decays to
        nothing at the grid edges, so the periodic extension is harmless.
        """
        kx = 2 * np.pi * np.fft.fftfreq(len(self.x), d=self._spacing(self.x))
        ky = 2 * np.pi * np.fft.fftfreq(len(self.y), d=self._spacing(self.y))
        dE_dx = np.fft.ifft(1j * kx[:, None, None] * np.fft.fft(self.E_t, axis=0), axis=0)
        dE_dy = np.fft.ifft(1j * ky[None, :, None] * np.fft.fft(self.E_t, axis=1), axis=1)
        return dE_dx, dE_dy

    @staticmethod
    def _spacing(axis: FloatArray) -> float:
        return float(axis[1] - axis[0]) if len(axis) > 1 else 1.0


def normalize_u0(spec: PulseSpec, medium: MediumSpec, grid: "GridSpec", logger: logging.Logger = _logger) -> float:
    """
    Returns the mode amplitude u0 for which the cycle-averaged field energy on the grid, with the pulse centered in
    the window, equals U0.
    Raises an EnvelopeClippingError if more than 1e-6 of the energy lies outside the window. The transverse part of
    the clipped fraction is measured against a grid three times as wide, the longitudinal part against the analytic
    envelope integral.
    """
    x, y = grid.x, grid.y
    unit_field = PulseField(spec, medium, 1.0, x, y)
    transverse = float(np.sum(unit_field.w_t)) * grid.dx * grid.dy
    wide_x = grid.dx * (np.arange(3 * grid.nx) - (3 * grid.nx - 1) / 2)
    wide_y = grid.dy * (np.arange(3 * grid.ny) - (3 * grid.ny - 1) / 2)
    wide = float(np.sum(PulseField(spec, medium, 1.0, wide_x, wide_y).w_t)) * grid.dx * grid.dy
    z = grid.z_window(0)
    env2 = envelope(spec, medium, z - grid.window_center(0), 0.0) ** 2
    longitudinal = float(np.sum(env2)) * grid.dz
    longitudinal_exact = math.sqrt(math.pi) / (medium.n * spec.delta_k0)
    clipped = 1 - (transverse / wide) * min(longitudinal / longitudinal_exact, 1.0)
    if clipped > CLIPPING_LIMIT:
        raise EnvelopeClippingError(clipped, CLIPPING_LIMIT)
    u0 = math.sqrt(spec.U0 / (transverse * longitudinal))
    logger.debug("u0 = %.6e (clipped energy fraction %.2e)", u0, clipped)
    return u0
