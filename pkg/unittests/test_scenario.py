import time
from dataclasses import replace

import pytest

from mdw_sim.errors import ScenarioParseError, ScenarioValidationError, ValidationError
from mdw_sim.grid import GridOptions
from mdw_sim.scenario import (
    FIBER_KEYS,
    ORACLE_GRID,
    ORACLE_REL_BANDWIDTH,
    SCENARIO_KEYS,
    RunManifest,
    dump_fiber_plan,
    dump_scenario,
    fiber_plan_from_values,
    load_fiber_plan,
    load_preset,
    load_scenario,
    oracle_variant,
    parse_text,
    preset_names,
    reference_fiber_plan,
    resolve_fiber_plan,
    resolve_scenario,
    save_scenario,
    scenario_from_values,
    scenario_hash,
)
from mdw_sim.types import FieldPath

SCENARIO_TEXT = """\
# LG01 in silicon
pulse.p = 0
pulse.l = 1
pulse.sigma = 1
pulse.U0 = 5 mJ
pulse.lambda0 = 1550 nm
pulse.rel_bandwidth = 0.01
pulse.w0 = 8.919 um   # 20 wavelengths in the medium

medium.n = 3.4757
medium.rho0 = 2.329 g/cm^3
medium.C11 = 165.7 GPa
medium.C12 = 63.9 GPa
medium.C44 = 79.6 GPa
medium.alpha = 1e-8 1/cm
"""

FIBER_TEXT = """\
fiber.d = 2.5 um
fiber.L = 1 cm
fiber.I = 1.1e9 W/cm^2
fiber.sigma = 1
medium.n = 3.4757
medium.rho0 = 2329 kg/m^3
medium.C11 = 165.7 GPa
medium.C12 = 63.9 GPa
medium.C44 = 79.6 GPa
medium.alpha = 1e-6 1/m
"""


def parse_error(text: str) -> ScenarioParseError:
    with pytest.raises(ScenarioParseError) as error:
        parse_text(text, SCENARIO_KEYS)
    return error.value


class TestParseText:
    def test_units_are_converted_to_si(self):
        values = parse_text(SCENARIO_TEXT, SCENARIO_KEYS)
        assert values["pulse.U0"] == pytest.approx(5e-3)
        assert values["pulse.lambda0"] == pytest.approx(1.55e-6)
        assert values["pulse.w0"] == pytest.approx(8.919e-6)
        assert values["medium.rho0"] == pytest.approx(2329.0)
        assert values["medium.C44"] == pytest.approx(79.6e9)
        assert values["medium.alpha"] == pytest.approx(1e-6)
        assert values["pulse.l"] == 1
        assert isinstance(values["pulse.l"], int)

    def test_booleans_and_strings(self):
        values = parse_text("run.elasticity = yes\nrun.field_dump = Off\nrun.name = my run  # named", SCENARIO_KEYS)
        assert values == {"run.elasticity": True, "run.field_dump": False, "run.name": "my run"}

    @pytest.mark.parametrize(
        "text, line, column, message",
        [
            pytest.param("pulse.U0 = 5", 1, 13, "needs a unit of energy", id="missing unit"),
            pytest.param("pulse.U0 = 5 furlongs", 1, 14, "unknown unit", id="unknown unit"),
            pytest.param("pulse.U0 = 5 nm", 1, 14, "nm is a unit of length", id="wrong dimension"),
            pytest.param("pulse.U0 = 5 mJ extra", 1, 17, "unexpected text", id="trailing text"),
            pytest.param("pulse.p = x", 1, 11, "not a valid int", id="invalid value"),
            pytest.param("pulse.p = 1 m", 1, 13, "dimensionless", id="unit on dimensionless key"),
            pytest.param("run.elasticity = maybe", 1, 18, "not a valid bool", id="invalid bool"),
            pytest.param("pulse.p =", 1, 10, "missing value", id="missing value"),
            pytest.param("pulse.p 1", 1, 1, "expected 'key = value [unit]'", id="missing equals sign"),
            pytest.param("\n# comment\n  pulse.q = 1", 3, 3, "unknown key 'pulse.q'", id="unknown key"),
            pytest.param("pulse.p = 1\npulse.p = 2", 2, 1, "duplicate key", id="duplicate key"),
        ],
    )
    def test_errors_point_at_line_and_column(self, text: str, line: int, column: int, message: str):
        error = parse_error(text)
        assert (error.line, error.column) == (line, column)
        assert message in str(error)
        assert str(error).startswith(f"<string>:{line}:{column}: ")

    def test_fiber_schema_rejects_pulse_keys(self):
        with pytest.raises(ScenarioParseError) as error:
            parse_text("pulse.p = 0", FIBER_KEYS, "plan.txt")
        assert str(error.value).startswith("plan.txt:1:1: unknown key")


class TestScenarioFromValues:
    def test_load(self, tmp_path):
        path = tmp_path / "lg01.scenario"
        path.write_text(SCENARIO_TEXT, encoding="utf-8")
        scenario = load_scenario(path)
        assert scenario.name == "lg01"
        assert scenario.mode == FieldPath.TIME_AVERAGED
        assert scenario.grid_options == GridOptions()
        assert scenario.pulse.l == 1
        assert scenario.medium.alpha == pytest.approx(1e-6)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ScenarioParseError) as error:
            load_scenario(tmp_path / "missing.scenario")
        assert error.value.line == 0
        assert "cannot read file" in str(error.value)
        assert error.value.exit_code == 2

    def test_every_missing_key_is_reported(self):
        with pytest.raises(ScenarioValidationError) as error:
            scenario_from_values({"run.mode": "fast"})
        keys = error.value.keys
        assert {"pulse.p", "pulse.U0", "medium.n", "medium.C44", "run.mode"} <= set(keys)
        assert "medium.alpha" not in keys
        assert "grid.substeps" not in keys

    def test_every_violation_is_reported(self):
        values = parse_text(SCENARIO_TEXT, SCENARIO_KEYS)
        values |= {"medium.rho0": -1.0, "grid.cells_per_sigma": 0.0, "run.snapshot_every": -5}
        with pytest.raises(ScenarioValidationError) as error:
            scenario_from_values(values)
        assert set(error.value.keys) == {"medium.rho0", "grid.cells_per_sigma", "run.snapshot_every"}
        assert error.value.exit_code == 2

    def test_instantaneous_mode(self):
        values = parse_text(SCENARIO_TEXT + "run.mode = instantaneous\n", SCENARIO_KEYS)
        assert scenario_from_values(values).mode == FieldPath.INSTANTANEOUS


class TestSerialization:
    def test_dump_and_parse_give_the_same_scenario(self):
        scenario = load_preset("silicon-lg02-linear").with_outputs(snapshot_every=10, field_dump=True)
        scenario = replace(scenario, elasticity=True, grid_options=GridOptions(substeps=6, comoving_cells=3))
        text = dump_scenario(scenario)
        assert text.startswith("# mdw-sim scenario silicon-lg02-linear\n")
        assert "grid.substeps = 6\n" in text
        assert "pulse.U0 = 0.005 J\n" in text
        assert scenario_from_values(parse_text(text, SCENARIO_KEYS)) == scenario

    def test_save_and_load(self, tmp_path):
        scenario = load_preset("silicon-lg00-circular")
        path = save_scenario(scenario, tmp_path / "saved.scenario")
        assert load_scenario(path) == scenario

    def test_hash(self):
        scenario = load_preset("silicon-lg00-circular")
        assert scenario_hash(scenario) == scenario_hash(load_preset("silicon-lg00-circular"))
        assert scenario_hash(scenario) != scenario_hash(scenario.with_outputs(snapshot_every=1))
        assert len(scenario_hash(scenario)) == 64

    def test_manifest(self):
        scenario = load_preset("silicon-lg00-circular")
        manifest = RunManifest.for_run(scenario, time.time() - 2.0, convergence={"orders": [2.0]})
        assert manifest.wall_clock >= 2.0
        assert manifest.scenario_hash == scenario_hash(scenario)
        data = manifest.to_dict()
        assert data["scenario_name"] == "silicon-lg00-circular"
        assert data["convergence"] == {"orders": [2.0]}
        assert data["deterministic_reductions"] is False
        assert isinstance(data["code_version"], str)


class TestScenario:
    def test_with_mode(self):
        scenario = load_preset("silicon-lg01-linear").with_mode(FieldPath.INSTANTANEOUS)
        assert scenario.name == "silicon-lg01-linear-instantaneous"
        assert scenario.grid.dz < load_preset("silicon-lg01-linear").grid.dz

    def test_on_grid_of(self):
        oracle = oracle_variant(load_preset("silicon-lg00-circular")).with_mode(FieldPath.INSTANTANEOUS)
        partner = oracle_variant(load_preset("silicon-lg00-circular")).on_grid_of(oracle)
        assert partner.mode == FieldPath.TIME_AVERAGED
        assert partner.grid.dz == pytest.approx(oracle.grid.dz)
        assert partner.grid.dt == pytest.approx(oracle.grid.dt)
        assert partner.grid.shape == oracle.grid.shape

    def test_oracle_variant(self):
        scenario = load_preset("silicon-lg00-circular")
        oracle = oracle_variant(scenario)
        assert oracle.name == "silicon-lg00-circular-oracle"
        assert oracle.pulse.rel_bandwidth == ORACLE_REL_BANDWIDTH
        assert oracle.grid_options == ORACLE_GRID
        assert oracle.pulse.l == scenario.pulse.l
        assert oracle.validate() is oracle

    def test_grid_violations_are_reported(self):
        scenario = load_preset("silicon-lg00-circular").with_grid_options(GridOptions(transverse_extent=3.0))
        with pytest.raises(ScenarioValidationError) as error:
            scenario.validate()
        assert error.value.keys == ["grid.transverse_extent"]


class TestPresets:
    def test_names(self):
        assert preset_names() == [
            "silicon-lg02-linear",
            "silicon-lg00-circular",
            "silicon-lg01-linear",
            "silicon-lg01-circular",
            "vacuum-null",
        ]

    @pytest.mark.parametrize("name", preset_names())
    def test_presets_are_valid(self, name: str):
        scenario = load_preset(name)
        assert scenario.name == name
        assert scenario.validate() is scenario

    def test_unknown_preset(self):
        with pytest.raises(ValidationError) as error:
            load_preset("silicon-lg99")
        assert not isinstance(error.value, ScenarioValidationError)
        assert "silicon-lg02-linear" in str(error.value)

    def test_resolve(self, tmp_path):
        assert resolve_scenario("vacuum-null").medium.n == 1.0
        path = save_scenario(load_preset("silicon-lg01-linear"), tmp_path / "mine.scenario")
        assert resolve_scenario(str(path)).name == "silicon-lg01-linear"


class TestFiberPlans:
    def test_parse(self):
        plan = fiber_plan_from_values(parse_text(FIBER_TEXT, FIBER_KEYS))
        reference = reference_fiber_plan()
        assert plan.R == pytest.approx(reference.R)
        assert plan.I == pytest.approx(reference.I)
        assert plan.L == pytest.approx(reference.L)
        assert plan.medium.alpha == pytest.approx(reference.medium.alpha)
        assert plan.u_th == reference.u_th

    @pytest.mark.parametrize(
        "text",
        [
            pytest.param(FIBER_TEXT + "fiber.R = 1 um\n", id="radius and diameter"),
            pytest.param(FIBER_TEXT.replace("fiber.d = 2.5 um\n", ""), id="neither"),
        ],
    )
    def test_radius_or_diameter(self, text: str):
        with pytest.raises(ScenarioValidationError) as error:
            fiber_plan_from_values(parse_text(text, FIBER_KEYS))
        assert error.value.keys == ["fiber.R"]

    def test_dump_and_load(self, tmp_path):
        plan = reference_fiber_plan()
        path = tmp_path / "fiber.plan"
        path.write_text(dump_fiber_plan(plan), encoding="utf-8")
        assert load_fiber_plan(path) == plan

    def test_resolve(self, tmp_path):
        assert resolve_fiber_plan("silicon-reference") == reference_fiber_plan()
        path = tmp_path / "thin.plan"
        path.write_text(FIBER_TEXT.replace("2.5 um", "1 um"), encoding="utf-8")
        assert resolve_fiber_plan(str(path)).d == pytest.approx(1e-6)
