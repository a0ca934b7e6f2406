"""
This module plans the fiber rotation experiment: a fiber of radius R and length L carries circularly polarized light
of intensity I, and the spin angular momentum the mass density wave leaves in the fiber sets it rotating.
Everything here is closed form.
"""

import math
from dataclasses import dataclass, replace
from typing import Any, Callable, NamedTuple, Self, Sequence

import numpy as np

from .constants import C_LIGHT, REFERENCE_LAMBDA0, SILICON_BREAKDOWN_ENERGY_DENSITY
from .errors import InvariantViolation, LinearizationError, ThresholdExceededError, raise_collected
from .lgfields import MediumSpec
from .types import FloatArray

LINEARIZATION_LIMIT = 0.1
"""largest alpha * L for which 1 - exp(-alpha L) ~ alpha L is accepted"""


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class FiberPlan:
    """
    A fiber of radius R and length L carrying light of intensity I (single beam, time-averaged) and helicity sigma.
    """

    R: float  # pylint: disable=invalid-name
    L: float  # pylint: disable=invalid-name
    I: float  # pylint: disable=invalid-name
    sigma: int
    medium: MediumSpec
    u_th: float = SILICON_BREAKDOWN_ENERGY_DENSITY
    lambda0: float = REFERENCE_LAMBDA0

    @classmethod
    def from_diameter(  # pylint: disable=too-many-arguments
        cls,
        d: float,
        L: float,  # pylint: disable=invalid-name
        I: float,  # pylint: disable=invalid-name
        sigma: int,
        medium: MediumSpec,
        u_th: float = SILICON_BREAKDOWN_ENERGY_DENSITY,
        lambda0: float = REFERENCE_LAMBDA0,
    ) -> Self:
        """
        The plan of a fiber with diameter d
        """
        return cls(d / 2, L, I, sigma, medium, u_th, lambda0)

    def violations(self) -> list[InvariantViolation]:
        """
        All violated invariants of the plan, including the intensity guard I <= I_th.
        """
        found = list(self.medium.violations())
        for key in ("R", "L", "I", "u_th", "lambda0"):
            if not getattr(self, key) > 0:
                found.append(InvariantViolation(f"fiber.{key}", f"must be positive, got {getattr(self, key)}"))
        if abs(self.sigma) != 1:
            found.append(InvariantViolation("fiber.sigma", f"helicity must be +1 or -1, got {self.sigma}"))
        if self.u_th > 0 and self.I > self.threshold:
            found.append(
                InvariantViolation(
                    "fiber.I", f"intensity {self.I:.4g} W/m^2 exceeds the threshold {self.threshold:.4g} W/m^2"
                )
            )
        return found

    def validate(self) -> Self:
        """
        Raises a ScenarioValidationError listing every violated invariant. Returns self otherwise.
        """
        raise_collected("Invalid fiber plan", self.violations())
        return self

    def check_threshold(self) -> None:
        """
        Raises a ThresholdExceededError if the intensity is above the breakdown threshold.
        """
        if self.I > self.threshold:
            raise ThresholdExceededError(self.I, self.threshold)

    @property
    def d(self) -> float:
        """
        fiber diameter 2 R
        """
        return 2 * self.R

    @property
    def omega0(self) -> float:
        """
        angular frequency of the light
        """
        return 2 * math.pi * C_LIGHT / self.lambda0

    @property
    def threshold(self) -> float:
        """
        breakdown threshold intensity I_th = u_th c / n
        """
        return threshold_intensity(self.medium, self.u_th)

    @property
    def margin(self) -> float:
        """
        I_th / I
        """
        return self.threshold / self.I

    @property
    def U_in(self) -> float:  # pylint: disable=invalid-name
        """
        electromagnetic energy inside the fiber, two beams: 2 n pi R^2 L I / c
        """
        return 2 * self.medium.n * math.pi * self.R**2 * self.L * self.I / C_LIGHT

    @property
    def I_mi(self) -> float:  # pylint: disable=invalid-name
        """
        moment of inertia of the fiber about its axis, pi rho0 R^4 L / 2
        """
        return 0.5 * math.pi * self.medium.rho0 * self.R**4 * self.L

    def with_diameter(self, d: float) -> Self:
        """
        the same plan for another fiber diameter
        """
        return replace(self, R=d / 2)


def _check_time(t: float) -> None:
    if t < 0:
        raise InvariantViolation("t", f"time must not be negative, got {t}")


def threshold_intensity(medium: MediumSpec, u_th: float) -> float:
    """
    I_th = u_th c / n
    """
    if not u_th > 0:
        raise InvariantViolation("fiber.u_th", f"threshold energy density must be positive, got {u_th}")
    return u_th * C_LIGHT / medium.n


def angular_velocity(plan: FiberPlan) -> float:
    """
    Rotation rate Omega = 4 sigma (n - 1/n) I / (c omega0 rho0 R^2) of the fiber driven by the mass density wave.
    Raises a ThresholdExceededError if the intensity is above the breakdown threshold.
    """
    plan.check_threshold()
    n = plan.medium.n
    return 4 * plan.sigma * (n - 1 / n) * plan.I / (C_LIGHT * plan.omega0 * plan.medium.rho0 * plan.R**2)


def displacement_mdw(plan: FiberPlan, t: float) -> float:
    """
    Azimuthal displacement of the fiber surface R Omega t
    """
    _check_time(t)
    return plan.R * angular_velocity(plan) * t


def angular_acceleration_abs(plan: FiberPlan) -> float:
    """
    Angular acceleration 4 alpha sigma I / (omega0 rho0 R^2) from the absorbed spin angular momentum
    """
    plan.check_threshold()
    return 4 * plan.medium.alpha * plan.sigma * plan.I / (plan.omega0 * plan.medium.rho0 * plan.R**2)


def displacement_abs(plan: FiberPlan, t: float) -> float:
    """
    Azimuthal displacement of the fiber surface from absorption, R alpha_abs t^2 / 2. Valid for alpha L <= 0.1 only,
    raises a LinearizationError otherwise.
    """
    _check_time(t)
    alpha_l = plan.medium.alpha * plan.L
    if alpha_l > LINEARIZATION_LIMIT:
        raise LinearizationError(alpha_l, LINEARIZATION_LIMIT)
    return 0.5 * plan.R * angular_acceleration_abs(plan) * t**2


def absorbed_angular_momentum(plan: FiberPlan, dt: float) -> float:
    """
    Spin angular momentum absorbed by the fiber from one beam within dt,
    (1 - exp(-alpha L)) 2 sigma pi R^2 I dt / omega0
    """
    _check_time(dt)
    absorbed_fraction = -math.expm1(-plan.medium.alpha * plan.L)
    return absorbed_fraction * 2 * plan.sigma * math.pi * plan.R**2 * plan.I * dt / plan.omega0


def mdw_angular_momentum(plan: FiberPlan) -> float:
    """
    Angular momentum carried by the mass density wave in the fiber, (1 - 1/n^2) sigma U_in / omega0
    """
    return (1 - 1 / plan.medium.n**2) * plan.sigma * plan.U_in / plan.omega0


def rotational_angular_momentum(plan: FiberPlan) -> float:
    """
    I_mi Omega, equal to mdw_angular_momentum
    """
    return plan.I_mi * angular_velocity(plan)


def counter_propagating_displacement(plan: FiberPlan, t: float) -> float:
    """
    Displacement from two beams of opposite helicity running in opposite directions. A beam running backwards with
    the opposite helicity turns the fiber the same way, so the displacements add.
    """
    forward = displacement_mdw(plan, t)
    backward = -displacement_mdw(replace(plan, sigma=-plan.sigma), t)
    return forward + backward


@dataclass(frozen=True)
class CrossoverResult:
    """
    The time at which the absorption-driven displacement catches up with the mass density wave displacement.
    `time` is None if it never does (no absorption).
    """

    time: float | None

    @property
    def never(self) -> bool:
        """
        True without absorption
        """
        return self.time is None

    def __str__(self) -> str:
        return "never" if self.time is None else f"{self.time:.6g} s"


def crossover_time(medium: MediumSpec) -> CrossoverResult:
    """
    t_eq = 2 (n - 1/n) / (c alpha). Independent of intensity, radius and helicity.
    """
    if medium.alpha == 0:
        return CrossoverResult(None)
    return CrossoverResult(2 * (medium.n - 1 / medium.n) / (C_LIGHT * medium.alpha))


def plan_summary(plan: FiberPlan, t: float | None = None) -> dict[str, Any]:
    """
    The planner outputs for one plan as plain values. Displacements are evaluated at `t`, by default at the crossover
    time (or after one second without absorption).
    """
    crossover = crossover_time(plan.medium)
    if t is None:
        t = crossover.time if crossover.time is not None else 1.0
    return {
        "R": plan.R,
        "d": plan.d,
        "L": plan.L,
        "I": plan.I,
        "sigma": plan.sigma,
        "threshold_intensity": plan.threshold,
        "threshold_margin": plan.margin,
        "angular_velocity": angular_velocity(plan),
        "angular_acceleration_abs": angular_acceleration_abs(plan),
        "crossover_time": crossover.time,
        "t": t,
        "displacement_mdw": displacement_mdw(plan, t),
        "displacement_abs": displacement_abs(plan, t),
        "counter_propagating_displacement": counter_propagating_displacement(plan, t),
        "mdw_angular_momentum": mdw_angular_momentum(plan),
        "rotational_angular_momentum": rotational_angular_momentum(plan),
        "absorbed_angular_momentum_per_second": absorbed_angular_momentum(plan, 1.0),
    }


@dataclass(frozen=True)
class FiberTable:
    """
    Displacements dr_MDW(t, d), shape (len(times), len(diameters)).
    """

    times: FloatArray
    diameters: FloatArray
    values: FloatArray

    @property
    def header(self) -> list[str]:
        """
        column names of the comma-separated form
        """
        return ["t_s", "d_m", "dr_mdw_m"]

    def rows(self) -> list[list[float]]:
        """
        one row per (t, d) pair, time major
        """
        return [
            [float(t), float(d), float(self.values[i, j])]
            for i, t in enumerate(self.times)
            for j, d in enumerate(self.diameters)
        ]


def sweep_grid(plan: FiberPlan, times: Sequence[float], diameters: Sequence[float]) -> FiberTable:
    """
    dr_MDW for every combination of time and fiber diameter. Times must not exceed the crossover time.
    """
    times_array = np.asarray(times, dtype=float)
    diameters_array = np.asarray(diameters, dtype=float)
    violations = []
    if times_array.size == 0 or np.any(times_array <= 0):
        violations.append(InvariantViolation("sweep.times", "times must be positive"))
    if diameters_array.size == 0 or np.any(diameters_array <= 0):
        violations.append(InvariantViolation("sweep.diameters", "diameters must be positive"))
    crossover = crossover_time(plan.medium)
    if not crossover.never and times_array.size and float(np.max(times_array)) > crossover.time:
        violations.append(
            InvariantViolation("sweep.times", f"times must not exceed the crossover time {crossover}")
        )
    raise_collected("Invalid sweep", violations)
    values = np.array(
        [[displacement_mdw(plan.with_diameter(d), t) for d in diameters_array] for t in times_array]
    )
    return FiberTable(times_array, diameters_array, values)


class Dimension(NamedTuple):
    """
    Exponents of length, mass and time of an SI quantity
    """

    length: int = 0
    mass: int = 0
    time: int = 0

    def __mul__(self, other: "Dimension") -> "Dimension":  # type: ignore[override]
        return Dimension(self.length + other.length, self.mass + other.mass, self.time + other.time)

    def __truediv__(self, other: "Dimension") -> "Dimension":
        return Dimension(self.length - other.length, self.mass - other.mass, self.time - other.time)

    def __pow__(self, exponent: int) -> "Dimension":
        return Dimension(self.length * exponent, self.mass * exponent, self.time * exponent)


DIMENSIONLESS = Dimension()
LENGTH = Dimension(length=1)
MASS = Dimension(mass=1)
TIME = Dimension(time=1)
_SPEED = LENGTH / TIME
_FREQUENCY = DIMENSIONLESS / TIME
_DENSITY = MASS / LENGTH**3
_INTENSITY = MASS / TIME**3
_ENERGY_DENSITY = MASS / (LENGTH * TIME**2)
_ABSORPTION = DIMENSIONLESS / LENGTH

_DECLARED_UNITS: dict[str, Dimension] = {
    "angular_velocity": _FREQUENCY,
    "displacement_mdw": LENGTH,
    "angular_acceleration_abs": _FREQUENCY**2,
    "displacement_abs": LENGTH,
    "crossover_time": TIME,
    "threshold_intensity": _INTENSITY,
    "absorbed_angular_momentum": MASS * LENGTH**2 / TIME,
    "mdw_angular_momentum": MASS * LENGTH**2 / TIME,
    "rotational_angular_momentum": MASS * LENGTH**2 / TIME,
    "U_in": MASS * LENGTH**2 / TIME**2,
    "I_mi": MASS * LENGTH**2,
}

# each formula rebuilt from the dimensions of its inputs, numeric factors dropped
_ASSEMBLED_UNITS: dict[str, Callable[[], Dimension]] = {
    "angular_velocity": lambda: _INTENSITY / (_SPEED * _FREQUENCY * _DENSITY * LENGTH**2),
    "displacement_mdw": lambda: LENGTH * _ASSEMBLED_UNITS["angular_velocity"]() * TIME,
    "angular_acceleration_abs": lambda: _ABSORPTION * _INTENSITY / (_FREQUENCY * _DENSITY * LENGTH**2),
    "displacement_abs": lambda: LENGTH * _ASSEMBLED_UNITS["angular_acceleration_abs"]() * TIME**2,
    "crossover_time": lambda: DIMENSIONLESS / (_SPEED * _ABSORPTION),
    "threshold_intensity": lambda: _ENERGY_DENSITY * _SPEED,
    "absorbed_angular_momentum": lambda: LENGTH**2 * _INTENSITY * TIME / _FREQUENCY,
    "mdw_angular_momentum": lambda: _ASSEMBLED_UNITS["U_in"]() / _FREQUENCY,
    "rotational_angular_momentum": lambda: _ASSEMBLED_UNITS["I_mi"]() * _ASSEMBLED_UNITS["angular_velocity"](),
    "U_in": lambda: LENGTH**2 * LENGTH * _INTENSITY / _SPEED,
    "I_mi": lambda: _DENSITY * LENGTH**4 * LENGTH,
}


def units_of(operation: str) -> Dimension:
    """
    The SI dimension of the output of a planner operation (or derived plan quantity).
    """
    try:
        return _DECLARED_UNITS[operation]
    except KeyError:
        raise ValueError(f"Unknown planner operation {operation!r}") from None


def assembled_units(operation: str) -> Dimension:
    """
    The SI dimension of an operation's output computed from the dimensions of its inputs.
    """
    try:
        return _ASSEMBLED_UNITS[operation]()
    except KeyError:
        raise ValueError(f"Unknown planner operation {operation!r}") from None


def planner_operations() -> list[str]:
    """
    Names accepted by units_of
    """
    return sorted(_DECLARED_UNITS)
