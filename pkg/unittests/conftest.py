import builtins
import importlib
from dataclasses import replace

import pytest

from mdw_sim.dynamics import Trajectory, run
from mdw_sim.grid import GridOptions
from mdw_sim.scenario import Scenario, load_preset

SMALL_GRID = GridOptions(cells_per_waist=1.5, cells_per_sigma=2.0, comoving_cells=4, include_exit=False)
"""coarse but valid grid, a run takes a fraction of a second"""


def small_variant(scenario: Scenario) -> Scenario:
    return replace(scenario, grid_options=SMALL_GRID, name=f"{scenario.name}-small")


@pytest.fixture(scope="function")
def trigger_aiostream_import_error():
    realimport = builtins.__import__

    def myimport(name, global_vars, local_vars, fromlist, level):
        if name.startswith("aiostream"):
            raise ImportError
        return realimport(name, global_vars, local_vars, fromlist, level)

    builtins.__import__ = myimport

    modules_to_reload = [
        "mdw_sim._extra",
        "mdw_sim.batch",
    ]
    for module in modules_to_reload:
        importlib.reload(importlib.import_module(module))

    yield myimport

    builtins.__import__ = realimport

    # reload in place, other modules keep references to the module objects
    for module in modules_to_reload:
        importlib.reload(importlib.import_module(module))


@pytest.fixture(scope="session")
def small_scenario() -> Scenario:
    return small_variant(load_preset("silicon-lg01-circular")).validate()


@pytest.fixture(scope="session")
def small_run(small_scenario) -> Trajectory:
    return run(small_scenario)


@pytest.fixture(scope="session")
def preset_runs():
    """
    Runs every requested preset once per test session.
    """
    cache: dict[str, tuple[Scenario, Trajectory]] = {}

    def get(name: str) -> tuple[Scenario, Trajectory]:
        if name not in cache:
            scenario = load_preset(name)
            cache[name] = scenario, run(scenario)
        return cache[name]

    return get
