"""
This module contains the command line interface `mdw-sim`.

Exit codes: 0 success, 2 invalid input, 3 numerically aborted run, 1 for other failures (e.g. unwritable reports or a
failed oracle cross-check).
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Sequence

from .convergence import ORACLE_TOLERANCE, convergence_study, oracle_comparison
from .dynamics import run
from .errors import EXIT_OK, MdwSimError, exit_code_of
from .fiber import plan_summary, sweep_grid
from .guard import Guard
from .observables import angular_decomposition, center_field_grid, momentum_report
from .report import FieldDump, convergence_table, diagnostics_table, emit_report
from .result import PositiveResult
from .scenario import (
    PRESETS,
    RunManifest,
    Scenario,
    dump_scenario,
    load_preset,
    oracle_variant,
    resolve_fiber_plan,
    resolve_scenario,
)
from .types import ReportFormat

_logger = logging.getLogger(__name__)

EXIT_ORACLE_MISMATCH = 1


def _print_json(data: Any) -> None:
    print(json.dumps(data, sort_keys=True, indent=2))


def _apply_overrides(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    if args.deterministic_reductions:
        scenario = scenario.with_outputs(deterministic_reductions=True)
    return scenario


def _report_dir(scenario: Scenario, output: Path | None) -> Path:
    return output if output is not None else Path(scenario.outputs.report_dir) / scenario.name


def simulate(args: argparse.Namespace) -> int:
    """
    Runs a scenario and writes summary.json, manifest.json, diagnostics.csv and (if enabled) the field dump.
    """
    started_at = time.time()
    scenario = _apply_overrides(resolve_scenario(args.scenario), args).validate()
    trajectory = run(scenario)
    report = momentum_report(trajectory, scenario)
    summary = report.summary()
    field_grid = center_field_grid(trajectory, scenario)
    if args.decompose:
        decomposition = angular_decomposition(field_grid, deterministic=scenario.outputs.deterministic_reductions)
        summary["decomposition"] = decomposition.summary(report.N_ph)
    convergence = None
    directory = _report_dir(scenario, args.output)
    if args.convergence_study:
        study = convergence_study(scenario, args.convergence_study, args.threads)
        convergence = study.to_dict()
        emit_report(convergence_table(convergence["levels"]), ReportFormat.TABLE, directory / "convergence.csv")
    emit_report(summary, ReportFormat.SUMMARY, directory / "summary.json")
    emit_report(diagnostics_table(trajectory), ReportFormat.TABLE, directory / "diagnostics.csv")
    if scenario.outputs.field_dump:
        emit_report(FieldDump.from_center(trajectory, field_grid), ReportFormat.FIELD_DUMP, directory / "fields.f8")
    manifest = RunManifest.for_run(scenario, started_at, convergence)
    emit_report(manifest.to_dict(), ReportFormat.SUMMARY, directory / "manifest.json")
    _print_json(
        {key: summary[key] for key in ("J_field_per_photon_z", "J_mdw_per_photon_z", "J_mp_per_photon_z")}
        | {"report_dir": str(directory)}
    )
    return EXIT_OK


def fiber(args: argparse.Namespace) -> int:
    """
    Evaluates the fiber rotation planner for one plan.
    """
    summary = plan_summary(resolve_fiber_plan(args.plan), args.time)
    if args.output is not None:
        emit_report(summary, ReportFormat.SUMMARY, args.output)
    _print_json(summary)
    return EXIT_OK


def sweep(args: argparse.Namespace) -> int:
    """
    Tabulates the mass density wave displacement over times and fiber diameters.
    """
    table = sweep_grid(resolve_fiber_plan(args.plan), args.times, args.diameters)
    if args.output is not None:
        emit_report(table, ReportFormat.TABLE, args.output)
    else:
        print(",".join(table.header))
        for row in table.rows():
            print(",".join(repr(value) for value in row))
    return EXIT_OK


def oracle(args: argparse.Namespace) -> int:
    """
    Runs the time-averaged and the instantaneous field path on the same grid and compares J_mdw_z.
    """
    scenario = _apply_overrides(oracle_variant(resolve_scenario(args.scenario)), args)
    comparison = oracle_comparison(scenario, args.threads)
    _print_json(comparison.to_dict())
    if not comparison.agree:
        _logger.error(
            "The field paths disagree by %.3g (tolerance %.3g)", comparison.relative_difference, ORACLE_TOLERANCE
        )
        return EXIT_ORACLE_MISMATCH
    return EXIT_OK


def presets(args: argparse.Namespace) -> int:
    """
    Lists the presets or prints one in the scenario file format.
    """
    if args.action == "list":
        for name in PRESETS:
            print(name)
    else:
        print(dump_scenario(load_preset(args.name)), end="")
    return EXIT_OK


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threads", type=int, default=1, help="number of concurrent runs in batches (default: 1)")
    parser.add_argument(
        "--deterministic-reductions",
        action="store_true",
        help="sum cell values independently of their order, reports become bit-identical across reruns",
    )


def build_parser() -> argparse.ArgumentParser:
    """
    The argument parser of mdw-sim
    """
    parser = argparse.ArgumentParser(
        prog="mdw-sim",
        description="Simulate the mass density wave of Laguerre-Gaussian light pulses and plan fiber rotation runs.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more log output (-vv for debug)")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate_parser = commands.add_parser("simulate", help="run a scenario file or preset")
    simulate_parser.add_argument("scenario", help="scenario file or preset name")
    simulate_parser.add_argument("--output", type=Path, default=None, help="report directory")
    simulate_parser.add_argument(
        "--convergence-study", type=int, default=0, metavar="K", help="also run K grid refinements"
    )
    simulate_parser.add_argument(
        "--decompose", action="store_true", help="add the orbital/spin and external/internal split to the summary"
    )
    _add_run_flags(simulate_parser)
    simulate_parser.set_defaults(handler=simulate)

    fiber_parser = commands.add_parser("fiber", help="evaluate a fiber rotation plan")
    fiber_parser.add_argument("plan", help="plan file or 'silicon-reference'")
    fiber_parser.add_argument("--time", type=float, default=None, help="evaluation time in s (default: crossover)")
    fiber_parser.add_argument("--output", type=Path, default=None, help="json file")
    fiber_parser.set_defaults(handler=fiber)

    sweep_parser = commands.add_parser("sweep", help="tabulate the displacement over times and diameters")
    sweep_parser.add_argument("plan", help="plan file or 'silicon-reference'")
    sweep_parser.add_argument("--times", type=float, nargs="+", required=True, help="times in s")
    sweep_parser.add_argument("--diameters", type=float, nargs="+", required=True, help="fiber diameters in m")
    sweep_parser.add_argument("--output", type=Path, default=None, help="csv file (default: stdout)")
    sweep_parser.set_defaults(handler=sweep)

    oracle_parser = commands.add_parser("oracle", help="cross-check the time-averaged against the instantaneous path")
    oracle_parser.add_argument("scenario", help="scenario file or preset name")
    _add_run_flags(oracle_parser)
    oracle_parser.set_defaults(handler=oracle)

    presets_parser = commands.add_parser("presets", help="list or show the shipped presets")
    preset_actions = presets_parser.add_subparsers(dest="action", required=True)
    preset_actions.add_parser("list", help="names of all presets")
    show_parser = preset_actions.add_parser("show", help="print a preset in the scenario format")
    show_parser.add_argument("name", choices=list(PRESETS))
    presets_parser.set_defaults(handler=presets)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _is_expected(error: BaseException) -> bool:
    if isinstance(error, BaseExceptionGroup):
        return all(_is_expected(sub_error) for sub_error in error.exceptions)
    return isinstance(error, MdwSimError)


def _report_error(error: BaseException) -> None:
    print(f"error: {error}", file=sys.stderr)
    if isinstance(error, BaseExceptionGroup):
        for sub_error in error.exceptions:
            print(f"  - {sub_error}", file=sys.stderr)
    for note in getattr(error, "__notes__", []):
        print(f"  {note}", file=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    """
    Entry point of the console script. Returns the exit code.
    """
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    handler: Callable[[argparse.Namespace], int] = args.handler
    guard: Guard[int] = Guard()
    result = guard.secure_call(handler, args)
    if isinstance(result, PositiveResult):
        return result.result
    if not _is_expected(result.error):
        raise result.error
    _report_error(result.error)
    return exit_code_of(result.error)


if __name__ == "__main__":
    sys.exit(main())
