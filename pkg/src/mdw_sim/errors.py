"""
This module contains the exception hierarchy of mdw_sim. Every exception carries the exit code the command line
interface reports for it: 2 for invalid input, 3 for a numerically aborted run.
"""

from pathlib import Path
from typing import ClassVar, Iterable, Sequence

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class MdwSimError(Exception):
    """
    Base class of all errors raised deliberately by mdw_sim.
    """

    exit_code: ClassVar[int] = 1


class ValidationError(MdwSimError):
    """
    The input (scenario, fiber plan, preset name, ...) is not acceptable.
    """

    exit_code: ClassVar[int] = EXIT_VALIDATION


class NumericalAbortError(MdwSimError):
    """
    A run was aborted because a numerical guard fired. `cell_index` names the offending cell if there is one.
    """

    exit_code: ClassVar[int] = EXIT_NUMERICAL

    def __init__(self, message: str, cell_index: tuple[int, ...] | None = None, quantity: str | None = None):
        super().__init__(message)
        self.cell_index = cell_index
        self.quantity = quantity


class ScenarioParseError(ValidationError):
    """
    A scenario or plan file could not be parsed. Line and column are 1-based.
    """

    def __init__(self, path: Path | str, line: int, column: int, message: str):
        super().__init__(f"{path}:{line}:{column}: {message}")
        self.path = Path(path)
        self.line = line
        self.column = column


class InvariantViolation(ValidationError):
    """
    One violated invariant. `key` is the dotted scenario key the invariant is attached to.
    """

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class ScenarioValidationError(ExceptionGroup, ValidationError):  # type: ignore[misc]
    """
    Groups every violated invariant of a scenario, so that users see all problems at once.
    """

    exit_code: ClassVar[int] = EXIT_VALIDATION

    def __new__(cls, message: str, violations: Sequence[InvariantViolation]):
        return super().__new__(cls, message, violations)

    @property
    def keys(self) -> list[str]:
        """
        The dotted keys of all violations in this group
        """
        return [violation.key for violation in self.exceptions if isinstance(violation, InvariantViolation)]


class ThresholdExceededError(ValidationError):
    """
    The requested intensity is above the breakdown threshold of the medium.
    """

    def __init__(self, intensity: float, threshold: float):
        super().__init__(
            f"Intensity {intensity:.6g} W/m^2 exceeds the breakdown threshold {threshold:.6g} W/m^2 "
            f"(margin {threshold / intensity:.3g})."
        )
        self.intensity = intensity
        self.threshold = threshold

    @property
    def margin(self) -> float:
        """
        I_th / I. Values below 1 are refused.
        """
        return self.threshold / self.intensity


class LinearizationError(ValidationError):
    """
    The small-absorption linearization of the fiber planner does not hold (alpha * L too large).
    """

    def __init__(self, alpha_l: float, limit: float):
        super().__init__(f"alpha*L = {alpha_l:.3g} exceeds {limit:.3g}; the quadratic absorption law is invalid.")
        self.alpha_l = alpha_l
        self.limit = limit


class EnvelopeClippingError(NumericalAbortError):
    """
    The simulation window does not contain the pulse: a relevant fraction of the pulse energy lies outside.
    """

    def __init__(self, clipped_fraction: float, limit: float, boundary: str = "window"):
        super().__init__(
            f"{clipped_fraction:.3e} of the pulse energy lies outside the {boundary} (limit {limit:.1e}). "
            "Enlarge the grid extent.",
            quantity="energy",
        )
        self.clipped_fraction = clipped_fraction
        self.limit = limit


class WakeLossError(NumericalAbortError):
    """
    Cells leaving the co-moving window were still moving.
    """

    def __init__(self, wake_velocity: float, limit: float):
        super().__init__(
            f"Cells left the co-moving window with velocity {wake_velocity:.3e} m/s (limit {limit:.3e} m/s).",
            quantity="va",
        )
        self.wake_velocity = wake_velocity
        self.limit = limit


class UnderresolvedInterfaceError(NumericalAbortError):
    """
    The refractive index changes faster than the gradient stencil can follow.
    """


class ReportWriteError(MdwSimError):
    """
    Writing a report file failed.
    """

    exit_code: ClassVar[int] = 1

    def __init__(self, path: Path | str, reason: str):
        super().__init__(f"Could not write {path}: {reason}")
        self.path = Path(path)


def raise_collected(message: str, violations: Iterable[InvariantViolation]) -> None:
    """
    Raises a ScenarioValidationError if there is at least one violation. Does nothing otherwise.
    """
    violations = list(violations)
    if violations:
        raise ScenarioValidationError(message, violations)


def exit_code_of(error: BaseException) -> int:
    """
    Returns the exit code the command line interface reports for the given error.
    """
    if isinstance(error, MdwSimError):
        return error.exit_code
    if isinstance(error, BaseExceptionGroup):
        codes = {exit_code_of(sub_error) for sub_error in error.exceptions}
        return max(codes) if codes else 1
    return 1
