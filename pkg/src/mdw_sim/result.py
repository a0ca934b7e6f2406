"""
This module contains the result types of secured calls.
"""

from dataclasses import dataclass
from enum import StrEnum
from typing import Any, Generic, TypeAlias, TypeVar

from .errors import EXIT_OK, exit_code_of
from .types import UNSET

T = TypeVar("T")


class HookOutcome(StrEnum):
    """
    Whether a hook ran successfully, raised or was not called at all.
    """

    SUCCESS = "success"
    ERROR = "error"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class HookReport:
    """
    Outcome and return value (or raised error) of the success, error and finalize hooks of one secured call.
    A hook that was not called has the outcome SKIPPED and the value UNSET.
    """

    success: HookOutcome = HookOutcome.SKIPPED
    error: HookOutcome = HookOutcome.SKIPPED
    finalize: HookOutcome = HookOutcome.SKIPPED
    success_value: Any = UNSET
    error_value: Any = UNSET
    finalize_value: Any = UNSET

    def raised(self) -> list[BaseException]:
        """
        The errors raised by hooks, in call order
        """
        pairs = (
            (self.success, self.success_value),
            (self.error, self.error_value),
            (self.finalize, self.finalize_value),
        )
        return [value for outcome, value in pairs if outcome == HookOutcome.ERROR]


@dataclass(frozen=True)
class PositiveResult(Generic[T]):
    """
    A secured call that returned.
    """

    result: T

    @property
    def exit_code(self) -> int:
        """
        Always 0
        """
        return EXIT_OK


@dataclass(frozen=True)
class NegativeResult(Generic[T]):
    """
    A secured call that raised.
    """

    error: BaseException

    @property
    def exit_code(self) -> int:
        """
        The exit code belonging to the error (2 validation, 3 numerical abort, 1 otherwise)
        """
        return exit_code_of(self.error)


ResultType: TypeAlias = PositiveResult[T] | NegativeResult[T]
