"""
This module cross-checks simulation runs: the same scenario on successively refined grids (how fast does the
discretization error shrink?) and on both field paths (do they agree?).
"""

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Any

import numpy as np

from .batch import run_batch_sync
from .constants import C_LIGHT
from .dynamics import Trajectory, run
from .observables import center_field_grid, momentum_report
from .result import NegativeResult
from .scenario import Scenario
from .types import FieldPath

_logger = logging.getLogger(__name__)

BASE_CELLS_PER_SIGMA = 2.0
BASE_SUBSTEPS = 8


@dataclass(frozen=True)
class ConvergenceLevel:
    """
    Errors of one refinement level. The velocity error is max |v - v_exact| / max |v_exact| over the window with the
    pulse in the center, v_exact = (n^2 - 1) S_avg / (c^2 rho0). The quantization error is
    |J_mp / N_ph - (l + sigma)| / |l + sigma| (None for l + sigma = 0).
    Both orders compare against the previous level and are None on the coarsest one. The quantization error levels
    off at the paraxial floor of about 1 / (n k0 w0)^2 once the window sums are resolved; the observed order is the
    one of the velocity error.
    """

    level: int
    dz: float
    dt: float
    velocity_error: float
    quantization_error: float | None
    observed_order: float | None = None
    quantization_order: float | None = None


@dataclass(frozen=True)
class ConvergenceStudy:
    """
    All levels of a study, coarsest first
    """

    scenario_name: str
    levels: list[ConvergenceLevel]

    @property
    def observed_orders(self) -> list[float | None]:
        """
        log2(e_k / e_k+1) of the velocity error between neighboring levels
        """
        return [level.observed_order for level in self.levels[1:]]

    @property
    def quantization_orders(self) -> list[float | None]:
        """
        log2(e_k / e_k+1) of the quantization error between neighboring levels
        """
        return [level.quantization_order for level in self.levels[1:]]

    def to_dict(self) -> dict[str, Any]:
        """
        plain dictionary for manifests and summaries
        """
        return {"scenario": self.scenario_name, "levels": [asdict(level) for level in self.levels]}


def refinement_levels(scenario: Scenario, levels: int) -> list[Scenario]:
    """
    The scenario on `levels` grids, each with half the cell length and half the time step of the previous one.
    The runs end with the pulse in the window center of a static window.
    """
    base = replace(
        scenario.grid_options,
        cells_per_sigma=BASE_CELLS_PER_SIGMA,
        substeps=BASE_SUBSTEPS,
        comoving_cells=0,
        include_exit=False,
    )
    return [
        replace(scenario, grid_options=base.refined(2**level), name=f"{scenario.name}-level{level}")
        for level in range(levels)
    ]


def velocity_error(trajectory: Trajectory, scenario: Scenario) -> float:
    """
    Pointwise error of the atom velocities against the local law v = (n^2 - 1) S_avg / (c^2 rho0), relative to its
    maximum. In a medium with n = 1 the absolute maximum speed is returned.
    """
    medium = scenario.medium
    field_grid = center_field_grid(trajectory, scenario)
    exact = (medium.n**2 - 1) / (C_LIGHT**2 * medium.rho0) * field_grid.S_avg
    numeric = trajectory.center.state.va
    scale = float(np.max(np.abs(exact)))
    if scale == 0:
        return float(np.max(np.abs(numeric)))
    return float(np.max(np.abs(numeric - exact))) / scale


def _evaluate(scenario: Scenario) -> tuple[float, float, float, float | None]:
    trajectory = run(scenario)
    report = momentum_report(trajectory, scenario)
    charge = scenario.pulse.l + scenario.pulse.sigma
    quantization = None
    if charge != 0:
        quantization = abs(float(report.per_photon("J_mp")[2]) - charge) / abs(charge)
    grid = trajectory.grid
    return grid.dz, grid.dt, velocity_error(trajectory, scenario), quantization


def _order(coarse: float | None, fine: float | None) -> float | None:
    """
    log2(coarse / fine), None if either error is missing or zero
    """
    if not coarse or not fine:
        return None
    return math.log2(coarse / fine)


def _format(value: float | None, spec: str) -> str:
    return "-" if value is None else format(value, spec)


def convergence_study(
    scenario: Scenario, levels: int = 3, threads: int = 1, logger: logging.Logger = _logger
) -> ConvergenceStudy:
    """
    Runs `levels` refinements of the scenario (concurrently if threads > 1) and reports the errors per level and the
    observed order of convergence. A failed level aborts the study with its error.
    """
    if levels < 2:
        raise ValueError(f"A convergence study needs at least 2 levels, got {levels}")
    refined = refinement_levels(scenario, levels)
    for level in refined:
        level.validate()
    results = run_batch_sync(refined, _evaluate, threads, logger)
    study_levels: list[ConvergenceLevel] = []
    for index, result in enumerate(results):
        if isinstance(result, NegativeResult):
            result.error.add_note(f"Raised on refinement level {index} of the convergence study")
            raise result.error
        dz, dt, error, quantization = result.result
        previous = study_levels[-1] if study_levels else None
        order = _order(previous.velocity_error if previous else None, error)
        quantization_order = _order(previous.quantization_error if previous else None, quantization)
        study_levels.append(ConvergenceLevel(index, dz, dt, error, quantization, order, quantization_order))
        logger.info(
            "Level %d: dz = %.3e m, velocity error %.3e (order %s), quantization error %s (order %s)",
            index,
            dz,
            error,
            _format(order, ".2f"),
            _format(quantization, ".3e"),
            _format(quantization_order, ".2f"),
        )
    return ConvergenceStudy(scenario.name, study_levels)


ORACLE_TOLERANCE = 0.01


@dataclass(frozen=True)
class OracleComparison:
    """
    J_mdw_z of the same scenario on the time-averaged and the instantaneous field path
    """

    scenario_name: str
    j_time_averaged: float
    j_instantaneous: float

    @property
    def relative_difference(self) -> float:
        """
        |J_inst - J_avg| / |J_avg|, the absolute difference if J_avg vanishes
        """
        difference = abs(self.j_instantaneous - self.j_time_averaged)
        return difference / abs(self.j_time_averaged) if self.j_time_averaged else difference

    @property
    def agree(self) -> bool:
        """
        True if the paths agree within 1 %
        """
        return self.relative_difference <= ORACLE_TOLERANCE

    def to_dict(self) -> dict[str, Any]:
        """
        plain dictionary for the summary
        """
        return {
            "scenario": self.scenario_name,
            "J_mdw_z_time_averaged": self.j_time_averaged,
            "J_mdw_z_instantaneous": self.j_instantaneous,
            "relative_difference": self.relative_difference,
            "agree": self.agree,
        }


def _j_mdw_z(scenario: Scenario) -> float:
    trajectory = run(scenario)
    return float(momentum_report(trajectory, scenario).J_mdw[2])


def oracle_comparison(scenario: Scenario, threads: int = 1, logger: logging.Logger = _logger) -> OracleComparison:
    """
    Runs the scenario on both field paths on the grid the instantaneous path needs and compares J_mdw_z.
    Pass the result of oracle_variant to keep the instantaneous run affordable.
    """
    instantaneous = scenario.with_mode(FieldPath.INSTANTANEOUS).validate()
    averaged = scenario.with_mode(FieldPath.TIME_AVERAGED).on_grid_of(instantaneous).validate()
    results = run_batch_sync([averaged, instantaneous], _j_mdw_z, threads, logger)
    values = []
    for result in results:
        if isinstance(result, NegativeResult):
            raise result.error
        values.append(result.result)
    comparison = OracleComparison(scenario.name, values[0], values[1])
    logger.info("Field paths differ by %.3g in J_mdw_z", comparison.relative_difference)
    return comparison
