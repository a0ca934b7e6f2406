import json

import pytest

from mdw_sim import cli
from mdw_sim.convergence import OracleComparison
from mdw_sim.errors import EXIT_NUMERICAL, EXIT_VALIDATION, NumericalAbortError
from mdw_sim.scenario import PRESETS, dump_scenario

T_EQ = 0.021268


class TestPresets:
    def test_list(self, capsys):
        assert cli.main(["presets", "list"]) == 0
        assert capsys.readouterr().out.splitlines() == list(PRESETS)

    def test_show(self, capsys):
        assert cli.main(["presets", "show", "silicon-lg02-linear"]) == 0
        out = capsys.readouterr().out
        assert "pulse.l" in out
        assert "silicon-lg02-linear" in out

    def test_unknown_preset(self):
        with pytest.raises(SystemExit) as error:
            cli.main(["presets", "show", "teapot"])
        assert error.value.code == 2


class TestFiber:
    def test_reference(self, capsys):
        assert cli.main(["fiber", "silicon-reference"]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["t"] == pytest.approx(T_EQ, rel=1e-4)

    def test_output(self, tmp_path, capsys):
        output = tmp_path / "plan.json"
        assert cli.main(["fiber", "silicon-reference", "--time", "1e-3", "--output", str(output)]) == 0
        assert json.loads(output.read_text(encoding="utf-8")) == json.loads(capsys.readouterr().out)

    def test_unwritable_output(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("", encoding="utf-8")
        assert cli.main(["fiber", "silicon-reference", "--output", str(blocker / "plan.json")]) == 1
        assert "Could not write" in capsys.readouterr().err

    def test_missing_plan_file(self, tmp_path, capsys):
        assert cli.main(["fiber", str(tmp_path / "missing.plan")]) == EXIT_VALIDATION
        assert "cannot read file" in capsys.readouterr().err


class TestSweep:
    def test_stdout(self, capsys):
        assert cli.main(["sweep", "silicon-reference", "--times", "1e-3", "--diameters", "1e-6", "2e-6"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "t_s,d_m,dr_mdw_m"
        assert len(lines) == 3

    def test_csv(self, tmp_path):
        output = tmp_path / "sweep.csv"
        argv = ["sweep", "silicon-reference", "--times", "1e-3", "2e-3", "--diameters", "1e-6", "--output", str(output)]
        assert cli.main(argv) == 0
        assert len(output.read_text(encoding="utf-8").splitlines()) == 3

    def test_beyond_the_crossover(self, capsys):
        assert cli.main(["sweep", "silicon-reference", "--times", "0.05", "--diameters", "1e-6"]) == EXIT_VALIDATION
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "  - sweep.times:" in err


class TestExitCodes:
    def test_numerical_abort(self, monkeypatch, capsys):
        def abort(*_, **__):
            raise NumericalAbortError("ra is not finite", (0, 0, 3), "ra")

        monkeypatch.setattr(cli, "plan_summary", abort)
        assert cli.main(["fiber", "silicon-reference"]) == EXIT_NUMERICAL
        assert "ra is not finite" in capsys.readouterr().err

    def test_unexpected_errors_propagate(self, monkeypatch):
        def broken(*_, **__):
            raise RuntimeError("bug")

        monkeypatch.setattr(cli, "sweep_grid", broken)
        with pytest.raises(RuntimeError):
            cli.main(["sweep", "silicon-reference", "--times", "1e-3", "--diameters", "1e-6"])

    def test_missing_scenario_file(self, tmp_path, capsys):
        assert cli.main(["simulate", str(tmp_path / "missing.scn")]) == EXIT_VALIDATION
        assert "missing.scn:0:0" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "comparison, exit_code",
        [
            pytest.param(OracleComparison("x", 1.0, 1.001), 0, id="agree"),
            pytest.param(OracleComparison("x", 1.0, 1.5), cli.EXIT_ORACLE_MISMATCH, id="mismatch"),
        ],
    )
    def test_oracle(self, monkeypatch, capsys, comparison, exit_code):
        monkeypatch.setattr(cli, "oracle_comparison", lambda *_, **__: comparison)
        assert cli.main(["oracle", "silicon-lg01-circular"]) == exit_code
        assert json.loads(capsys.readouterr().out)["agree"] is comparison.agree


class TestSimulate:
    @pytest.mark.slow
    def test_small_scenario(self, tmp_path, small_scenario, capsys):
        scenario_file = tmp_path / "small.scn"
        scenario_file.write_text(dump_scenario(small_scenario), encoding="utf-8")
        reports = tmp_path / "reports"
        assert cli.main(["simulate", str(scenario_file), "--output", str(reports), "--decompose"]) == 0

        printed = json.loads(capsys.readouterr().out)
        assert printed["report_dir"] == str(reports)
        assert printed["J_mp_per_photon_z"] == pytest.approx(2.0, rel=5e-2)
        summary = json.loads((reports / "summary.json").read_text(encoding="utf-8"))
        assert "decomposition" in summary
        manifest = json.loads((reports / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["scenario_name"] == small_scenario.name
        assert (reports / "diagnostics.csv").read_text(encoding="utf-8").startswith("t_s,")
