import logging
import math

import pytest

from mdw_sim.convergence import (
    ORACLE_TOLERANCE,
    ConvergenceLevel,
    ConvergenceStudy,
    OracleComparison,
    convergence_study,
    oracle_comparison,
    refinement_levels,
    velocity_error,
)
from mdw_sim.scenario import load_preset, oracle_variant


class TestRefinementLevels:
    def test_levels(self, small_scenario):
        levels = refinement_levels(small_scenario, 3)
        assert [level.name for level in levels] == [f"{small_scenario.name}-level{k}" for k in range(3)]
        assert [level.grid_options.cells_per_sigma for level in levels] == [2.0, 4.0, 8.0]
        assert all(level.grid_options.substeps == 8 for level in levels)
        assert all(level.grid_options.comoving_cells == 0 for level in levels)
        assert not any(level.grid_options.include_exit for level in levels)
        assert levels[0].pulse == small_scenario.pulse

    def test_too_few_levels(self, small_scenario):
        with pytest.raises(ValueError):
            convergence_study(small_scenario, 1)


class TestStudyRecords:
    def test_orders_and_dict(self):
        study = ConvergenceStudy(
            "x",
            [
                ConvergenceLevel(0, 2e-7, 1e-16, 4e-3, 1e-2),
                ConvergenceLevel(1, 1e-7, 5e-17, 1e-3, 5e-3, 2.0, 1.0),
            ],
        )
        assert study.observed_orders == [2.0]
        assert study.quantization_orders == [1.0]
        as_dict = study.to_dict()
        assert as_dict["scenario"] == "x"
        assert as_dict["levels"][1]["observed_order"] == 2.0
        assert as_dict["levels"][0]["dz"] == 2e-7

    def test_velocity_error_of_a_small_run(self, small_run, small_scenario):
        error = velocity_error(small_run, small_scenario)
        assert 0 < error < 0.5


class TestOracleComparison:
    def test_agreement(self):
        comparison = OracleComparison("x", 2.0, 2.0 * (1 + ORACLE_TOLERANCE / 2))
        assert comparison.relative_difference == pytest.approx(ORACLE_TOLERANCE / 2)
        assert comparison.agree
        assert comparison.to_dict()["agree"] is True

    def test_disagreement(self):
        comparison = OracleComparison("x", 1.0, 1.5)
        assert not comparison.agree
        assert comparison.to_dict()["relative_difference"] == pytest.approx(0.5)

    def test_vanishing_reference(self):
        comparison = OracleComparison("vacuum", 0.0, 1e-30)
        assert comparison.relative_difference == 1e-30
        assert comparison.agree


class TestStudies:
    @pytest.mark.slow
    def test_convergence_study(self, small_scenario, caplog):
        with caplog.at_level(logging.INFO):
            study = convergence_study(small_scenario, 2, threads=2)
        first, second = study.levels
        assert second.dz == pytest.approx(first.dz / 2)
        assert second.dt == pytest.approx(first.dt / 2)
        assert second.velocity_error < first.velocity_error
        assert study.observed_orders[0] >= 1.8
        assert first.observed_order is None
        assert first.quantization_order is None
        assert second.quantization_order == pytest.approx(
            math.log2(first.quantization_error / second.quantization_error)  # type: ignore[operator]
        )
        assert all(level.quantization_error < 1e-3 for level in study.levels)  # type: ignore[operator]
        assert "Level 1" in caplog.text

    @pytest.mark.slow
    def test_oracle(self):
        comparison = oracle_comparison(oracle_variant(load_preset("silicon-lg00-circular")), threads=2)
        assert comparison.agree
        assert comparison.j_time_averaged > 0
