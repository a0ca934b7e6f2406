"""
This module contains the Guard class, which runs simulation entry points in a secured context: errors are caught,
turned into a NegativeResult and handed to the error hook, successes are handed to the success hook.
The command line interface and the batch runner use it to map errors onto exit codes without losing the other runs of
a batch.
"""

# pylint: disable=undefined-variable
# pylint does not understand the generic T of class Guard.
import asyncio
import functools
import logging
from contextlib import contextmanager
from typing import Any, Awaitable, Callable, Generic, Iterator, ParamSpec, TypeGuard, TypeVar, cast

import numpy as np

from .errors import NumericalAbortError
from .hooks import Hook, error_hook, plain_hook, success_hook
from .result import HookOutcome, HookReport, NegativeResult, PositiveResult, ResultType
from .types import UNSET

T = TypeVar("T")
_P = ParamSpec("_P")

_logger = logging.getLogger(__name__)


class Guard(Generic[T]):
    """
    Calls (or awaits) something and records the outcome as ResultType. Afterwards, handle_result calls the hooks.
    Errors are marked as handled; a second guard around the same error does not call its error hook again unless
    `suppress_repeated_errors` is False.
    """

    # pylint: disable=too-many-arguments
    def __init__(
        self,
        on_success: Hook | None = None,
        on_error: Hook | None = None,
        on_finalize: Hook | None = None,
        *,
        suppress_repeated_errors: bool = True,
        raise_hook_errors: bool = True,
    ):
        self.on_success = on_success
        self.on_error = on_error
        self.on_finalize = on_finalize
        self.suppress_repeated_errors = suppress_repeated_errors
        self.raise_hook_errors = raise_hook_errors
        self._result: ResultType[T] | None = None

    @property
    def result(self) -> ResultType[T]:
        """
        The result of the last secured call. Raises a ValueError if the guard was never used.
        """
        if self._result is None:
            raise ValueError("The guard has not been executed yet.")
        return self._result

    def _mark(self, error: BaseException) -> bool:
        """
        Marks the error as handled by this guard. Returns True if another guard handled it before.
        """
        handled_by: list[Guard] | None = getattr(error, "__handled_by_guards__", None)
        if handled_by is None:
            handled_by = []
            error.__handled_by_guards__ = handled_by  # type: ignore[attr-defined]
        seen_before = len(handled_by) > 0
        handled_by.append(self)
        return seen_before

    @staticmethod
    def _call_hook(hook: Hook | None, *args: Any, **kwargs: Any) -> tuple[HookOutcome, Any]:
        if hook is None:
            return HookOutcome.SKIPPED, UNSET
        try:
            return HookOutcome.SUCCESS, hook(*args, **kwargs)
        except BaseException as hook_error:  # pylint: disable=broad-exception-caught
            return HookOutcome.ERROR, hook_error

    def _raise_hook_errors(self, report: HookReport, caught: BaseException | None = None) -> None:
        if not self.raise_hook_errors:
            return
        errors = report.raised()
        if len(errors) == 1 and errors[0] is caught:
            # the error hook re-raised the original error
            raise caught
        if errors:
            group = BaseExceptionGroup("One or more hooks raised.", errors)
            if caught is not None:
                group.__context__ = caught
            raise group

    def handle_result(self, result: ResultType[T], *args: Any, **kwargs: Any) -> HookReport:
        """
        Calls the success or error hook and afterwards the finalize hook. The hooks receive the arguments of the
        secured call after the result (or error).
        """
        if isinstance(result, PositiveResult):
            success, success_value = self._call_hook(self.on_success, result.result, *args, **kwargs)
            finalize, finalize_value = self._call_hook(self.on_finalize, *args, **kwargs)
            report = HookReport(
                success=success, finalize=finalize, success_value=success_value, finalize_value=finalize_value
            )
            self._raise_hook_errors(report)
            return report

        error = result.error
        error_outcome, error_value = HookOutcome.SKIPPED, UNSET
        if not (self._mark(error) and self.suppress_repeated_errors):
            error_outcome, error_value = self._call_hook(self.on_error, error, *args, **kwargs)
            if error_outcome == HookOutcome.ERROR and error_value is error and self.on_error is not None:
                error.add_note(f"This error was re-raised by the error hook {self.on_error.name}")
        finalize, finalize_value = self._call_hook(self.on_finalize, *args, **kwargs)
        report = HookReport(
            error=error_outcome, finalize=finalize, error_value=error_value, finalize_value=finalize_value
        )
        self._raise_hook_errors(report, error)
        return report

    def secure_call(self, function: Callable[_P, T], *args: _P.args, **kwargs: _P.kwargs) -> ResultType[T]:
        """
        Calls the function and records its return value or the error it raised.
        KeyboardInterrupt and SystemExit are never caught.
        """
        try:
            self._result = PositiveResult(function(*args, **kwargs))
        except Exception as error:  # pylint: disable=broad-exception-caught
            self._result = NegativeResult(error)
        return self.result

    async def secure_await(self, awaitable: Awaitable[T]) -> ResultType[T]:
        """
        Awaits the awaitable and records its value or the error it raised.
        """
        try:
            self._result = PositiveResult(await awaitable)
        except Exception as error:  # pylint: disable=broad-exception-caught
            self._result = NegativeResult(error)
        return self.result


def _is_coroutine_function(function: Callable[..., Any]) -> TypeGuard[Callable[..., Awaitable[Any]]]:
    return asyncio.iscoroutinefunction(function)


def guarded(
    *,
    on_success: Callable[..., Any] | None = None,
    on_error: Callable[..., Any] | None = None,
    on_finalize: Callable[..., Any] | None = None,
    suppress_repeated_errors: bool = True,
) -> Callable[[Callable[_P, Any]], Callable[_P, Any]]:
    """
    Decorator securing a sync or async function: the decorated function returns a ResultType instead of raising.
    The hooks are checked against the signature of the decorated function when called:
    on_success(result, *args), on_error(error, *args), on_finalize(*args).
    """

    def decorator(function: Callable[_P, Any]) -> Callable[_P, Any]:
        guard: Guard[Any] = Guard(
            success_hook(on_success, function) if on_success is not None else None,
            error_hook(on_error, function) if on_error is not None else None,
            plain_hook(on_finalize, function) if on_finalize is not None else None,
            suppress_repeated_errors=suppress_repeated_errors,
        )
        if _is_coroutine_function(function):

            @functools.wraps(function)
            async def async_wrapper(*args: _P.args, **kwargs: _P.kwargs) -> ResultType[Any]:
                result = await guard.secure_await(function(*args, **kwargs))
                guard.handle_result(result, *args, **kwargs)
                return result

            wrapper = cast(Callable[_P, Any], async_wrapper)
        else:

            @functools.wraps(function)
            def sync_wrapper(*args: _P.args, **kwargs: _P.kwargs) -> ResultType[Any]:
                result = guard.secure_call(function, *args, **kwargs)
                guard.handle_result(result, *args, **kwargs)
                return result

            wrapper = sync_wrapper
        wrapper.__guard__ = guard  # type: ignore[attr-defined]
        wrapper.__original_callable__ = function  # type: ignore[attr-defined]
        return wrapper

    return decorator


def is_guarded(function: Callable[..., Any]) -> bool:
    """
    True if the function was decorated with `guarded` and therefore returns a ResultType.
    """
    return hasattr(function, "__guard__") and hasattr(function, "__original_callable__")


@contextmanager
def numerical_guard(quantity: str, logger: logging.Logger = _logger) -> Iterator[None]:
    """
    Turns floating point overflow and invalid operations inside the context into a NumericalAbortError.
    Underflow is harmless for Gaussian tails and stays ignored.
    """
    with np.errstate(over="raise", invalid="raise", divide="raise", under="ignore"):
        try:
            yield
        except FloatingPointError as error:
            logger.error("Floating point error while computing %s: %s", quantity, error)
            raise NumericalAbortError(
                f"Floating point error while computing {quantity}: {error}", None, quantity
            ) from error
