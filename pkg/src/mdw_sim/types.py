"""
This module defines the types shared across the mdw_sim package.
"""

from enum import StrEnum
from typing import Any, TypeAlias

import numpy as np
import numpy.typing as npt

FloatArray: TypeAlias = npt.NDArray[np.float64]
ComplexArray: TypeAlias = npt.NDArray[np.complex128]


class _SingletonMeta(type):
    """
    Metaclass handing out one instance per class. Classes using it must not take constructor arguments.
    """

    def __call__(cls, *args: Any, **kwargs: Any) -> Any:
        if args or kwargs:
            raise AttributeError(f"{cls.__name__} cannot receive arguments. It is a singleton.")
        instance = cls.__dict__.get("_instance")
        if instance is None:
            instance = super().__call__()
            setattr(cls, "_instance", instance)
        return instance


# pylint: disable=too-few-public-methods
class UnsetType(metaclass=_SingletonMeta):
    """
    Marks a scenario key that was not given. None cannot be used since some keys legitimately hold it.
    """

    def __repr__(self) -> str:
        return "UNSET"

    def __bool__(self) -> bool:
        return False


UNSET = UnsetType()


class FieldPath(StrEnum):
    """
    How the optical force is evaluated.
    """

    TIME_AVERAGED = "time-averaged"
    """Cycle-averaged Poynting vector, envelope derivative taken analytically. Default path."""
    INSTANTANEOUS = "instantaneous"
    """Instantaneous E x H including the carrier, time derivative by centered differences. Oracle path."""


class ForceProvenance(StrEnum):
    """
    Which physical contribution a force field holds.
    """

    OPTICAL = "optical"
    ELASTIC = "elastic"
    TOTAL = "total"


class ReportFormat(StrEnum):
    """
    Output formats of emit_report.
    """

    SUMMARY = "machine-summary"
    TABLE = "table"
    FIELD_DUMP = "field-dump"


class RunPhase(StrEnum):
    """
    The three phases of a simulation run.
    """

    APPROACH = "approach"
    """Static window, the pulse enters through the trailing face."""
    COMOVING = "comoving"
    """The window follows the pulse at the group speed c/n."""
    EXIT = "exit"
    """Static window, the pulse leaves through the leading face."""
