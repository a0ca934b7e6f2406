"""
This package simulates the mass density wave that Laguerre-Gaussian light pulses drive in a dielectric and reports how
the angular momentum of the light is shared between the field and the medium. It also plans the fiber rotation
experiment in closed form.
"""

from .dynamics import MediumState, Trajectory, probe_ring, run
from .errors import MdwSimError, NumericalAbortError, ScenarioValidationError, ValidationError
from .fiber import FiberPlan, crossover_time, displacement_abs, displacement_mdw, plan_summary, sweep_grid
from .grid import GridOptions, GridSpec
from .guard import Guard, guarded
from .lgfields import MediumSpec, PulseSpec, fields, lg_mode, normalize_u0
from .observables import MomentumReport, angular_decomposition, momentum_report
from .result import NegativeResult, PositiveResult, ResultType
from .scenario import Scenario, dump_scenario, load_fiber_plan, load_preset, load_scenario
from .types import UNSET, FieldPath, ReportFormat, UnsetType

try:
    from _mdw_sim_version import version as __version__
except ImportError:
    __version__ = "unknown"
