"""
This module contains the Hook class which wraps a user supplied callable (snapshot emission, progress reports, run
callbacks) together with the signature the simulator is going to call it with.
The expected signature only serves nicer error messages: a hook with a wrong signature fails with a message naming
the signature it must have instead of an obscure TypeError deep inside the integrator.
"""

import inspect
from typing import Any, Callable, Generic, ParamSpec, Sequence, TypeVar

from .types import UNSET

_P = ParamSpec("_P")
_T = TypeVar("_T")
_HookT = TypeVar("_HookT", bound="Hook")


class Hook(Generic[_P, _T]):
    """
    A callable plus the signature it is expected to match.
    """

    def __init__(self, hook: Callable[_P, _T], expected_signature: inspect.Signature):
        self.hook = hook
        self.expected_signature = expected_signature
        self._actual_signature: inspect.Signature | None = None

    @property
    def name(self) -> str:
        """
        The name of the wrapped callable (falls back to its repr for objects without a __name__)
        """
        return getattr(self.hook, "__name__", repr(self.hook))

    @property
    def actual_signature(self) -> inspect.Signature:
        """
        The signature of the wrapped callable
        """
        if self._actual_signature is None:
            self._actual_signature = inspect.signature(self.hook)
        return self._actual_signature

    @classmethod
    def from_callable(
        cls: type[_HookT],
        hook: Callable,
        parameters: Sequence[inspect.Parameter] | Callable[..., Any] | None = None,
        return_type: Any = UNSET,
    ) -> _HookT:
        """
        Wraps `hook`. The expected signature is either given as a list of parameters or taken from another callable.
        """
        if parameters is None:
            sig = inspect.Signature()
        elif callable(parameters):
            sig = inspect.signature(parameters)
        else:
            sig = inspect.Signature(list(parameters))
        if return_type is not UNSET:
            sig = sig.replace(return_annotation=return_type)
        return cls(hook, sig)

    def __call__(self, *args: _P.args, **kwargs: _P.kwargs) -> _T:
        """
        Calls the hook. If the arguments don't bind to the hook's signature a TypeError naming the expected
        signature is raised instead of the original binding error.
        """
        try:
            bound = self.actual_signature.bind(*args, **kwargs)
        except TypeError:
            # pylint: disable=raise-missing-from
            # The binding error only says "missing a required argument"; the chained traceback adds nothing.
            raise TypeError(
                f"Arguments do not match signature of hook {self.name}{self.actual_signature}. "
                f"Hook function must match signature: {self.name}{self.expected_signature}"
            ) from None
        return self.hook(*bound.args, **bound.kwargs)


def _positional(name: str, annotation: Any) -> inspect.Parameter:
    return inspect.Parameter(name, inspect.Parameter.POSITIONAL_OR_KEYWORD, annotation=annotation)


SNAPSHOT_HOOK_PARAMETERS = (
    _positional("state", "MediumState"),
    _positional("time", float),
    _positional("step", int),
)
"""Snapshot hooks are called as hook(state, time, step)."""


def snapshot_hook(hook: Callable[..., Any]) -> Hook:
    """
    Wraps a snapshot hook.
    """
    if isinstance(hook, Hook):
        return hook
    return Hook.from_callable(hook, SNAPSHOT_HOOK_PARAMETERS, return_type=Any)


def error_hook(hook: Callable[..., Any], signature_from: Callable[..., Any] | None = None) -> Hook:
    """
    Wraps a hook called as hook(error, *arguments of the secured callable).
    """
    params: list[inspect.Parameter] = [_positional("error", BaseException)]
    if signature_from is not None:
        params.extend(inspect.signature(signature_from).parameters.values())
    return Hook.from_callable(hook, params, return_type=Any)


def success_hook(hook: Callable[..., Any], signature_from: Callable[..., Any] | None = None) -> Hook:
    """
    Wraps a hook called as hook(result, *arguments of the secured callable).
    """
    result_annotation: Any = Any
    params: list[inspect.Parameter] = []
    if signature_from is not None:
        signature = inspect.signature(signature_from)
        result_annotation = signature.return_annotation
        params.extend(signature.parameters.values())
    return Hook.from_callable(hook, [_positional("result", result_annotation), *params], return_type=Any)


def plain_hook(hook: Callable[..., Any], signature_from: Callable[..., Any] | None = None) -> Hook:
    """
    Wraps a hook called with the same arguments as the secured callable.
    """
    params = list(inspect.signature(signature_from).parameters.values()) if signature_from is not None else []
    return Hook.from_callable(hook, params, return_type=Any)
