# !/usr/bin/python3
# -*-coding utf-8 -*-
# @Time     : 2026/09/07 09:12
# @Project  : expanding_curvature_flow
# @File     : cli.py
# @Software : PyCharm
"""
Command line entry point 'cm-flow': run and check configurations, list the registered scenarios.
"""
import argparse
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from christoffel_minkowski_pde.io.config import RunConfig, emit_config, load_config
from christoffel_minkowski_pde.io.output import CHECK_FILE, ECHO_FILE, FINAL_STATE_FILE, MONITORS_FILE, \
    write_final_state, write_json, write_monitors
from christoffel_minkowski_pde.model.flow import FlowParams, TerminalStatus, run_flow
from christoffel_minkowski_pde.model.functionals import closure_integral, convexity_eigenvalues, firey_defect
from christoffel_minkowski_pde.model.radial_profile import value_at_equator
from christoffel_minkowski_pde.model.scenarios import Outcome, list_scenarios, make_scenario, scenario_recipe, \
    validate_recipe
from christoffel_minkowski_pde.utils.exceptions import FlowError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL_ERROR = 1
EXIT_MISMATCH = 2

# Relative size of int x / phi accepted as closed
CLOSURE_RTOL = 1e-10
REPORTS_EVERY = 1000


def _configure_logging(level: int):
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)
    logging.captureWarnings(True)


def _outcome(status: TerminalStatus) -> Optional[Outcome]:
    if status.kind == TerminalStatus.CONVERGED:
        return Outcome.CONVERGE
    if status.kind == TerminalStatus.BREAKDOWN:
        return Outcome.BREAKDOWN
    return None


def cmd_run(config: RunConfig, output_dir: Path = None) -> int:
    """
    Runs the scenario of a configuration and writes monitors.csv, final_state.json and echo.cfg.

    Parameters
    ----------
    config : RunConfig
        Validated configuration.
    output_dir : Path
        Directory of the artifacts. Value by default is the directory of the configuration.

    Returns
    -------
    int
        0 when the terminal status matches the expected outcome, 2 otherwise.
    """
    output_dir = Path(output_dir if output_dir is not None else config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    config = replace(config, output_dir=str(output_dir))
    (output_dir / ECHO_FILE).write_text(emit_config(config), encoding="utf-8")
    scenario = make_scenario(config.recipe, config.num_points, name=config.scenario, **config.engine_kwargs())
    scenario.check()
    record = run_flow(scenario.initial, scenario.params, verbose=True, reports_every=REPORTS_EVERY)
    if "csv" in config.formats:
        write_monitors(record, output_dir / MONITORS_FILE)
    if "json" in config.formats:
        write_final_state(record, scenario.params, config.scenario, output_dir / FINAL_STATE_FILE)
    outcome = _outcome(record.terminal_status)
    logger.info("Scenario '%s' finished with %s (expected %s)", config.scenario, record.terminal_status,
                scenario.expected_outcome.value)
    return EXIT_OK if outcome is scenario.expected_outcome else EXIT_MISMATCH


def _safe_run(config: RunConfig, output_dir: Path) -> int:
    try:
        return cmd_run(config, output_dir)
    except Exception:
        logger.exception("Scenario '%s' failed", config.scenario)
        return EXIT_INTERNAL_ERROR


def static_checks(params: FlowParams) -> dict:
    """
    Checks on the anisotropy that need no flow: (p+k-1)-convexity, closure of int x / phi and, for k < n, the
    Firey conditions of 1/phi.
    """
    n, k, p, phi = params.n, params.k, params.p, params.phi
    grid = phi.grid
    report = {"n": n, "k": k, "p": p, "num_points": grid.num_points}
    m = p + k - 1
    if m > 0:
        meridional, azimuthal = convexity_eigenvalues(phi, m)
        eigenvalues = meridional.with_values(np.minimum(meridional.values, azimuthal.values))
        j = int(np.argmin(eigenvalues.values))
        min_eig, theta = float(eigenvalues[j]), float(grid.theta[j])
        # Cell-centered grids have no node at the equator
        if abs(theta) < grid.dtheta:
            min_eig, theta = value_at_equator(eigenvalues), 0.
        report["convexity"] = {"m": m, "min_eig": min_eig, "theta": theta, "ok": min_eig > 0, "required": k < n}
    else:
        report["convexity"] = {"m": m, "min_eig": None, "theta": None, "ok": False, "required": k < n}
    closure = closure_integral(phi, n)
    report["closure"] = {"value": closure, "ok": bool(abs(closure) <= CLOSURE_RTOL * params.inv_phi_integral)}
    if k < n:
        firey = firey_defect(phi, n, k)
        report["firey"] = {"min_defect": firey.defect.min, "tail_positive": bool(np.all(firey.tail_positive)),
                           "closes": firey.closes, "ok": firey.holds}
    else:
        report["firey"] = None
    report["passed"] = bool(report["convexity"]["ok"] or not report["convexity"]["required"])
    return report


def format_check_report(name: str, report: dict) -> str:
    """
    Human readable lines of a static check report.
    """
    verdict = lambda ok: "PASS" if ok else "FAIL"
    convexity = report["convexity"]
    lines = [f"Scenario '{name}' (n={report['n']}, k={report['k']}, p={report['p']}, N={report['num_points']})"]
    if convexity["min_eig"] is None:
        lines.append(f"  (p+k-1)-convexity: FAIL, p+k-1 = {convexity['m']} is not positive")
    else:
        lines.append(f"  (p+k-1)-convexity: {verdict(convexity['ok'])}, min_eig = {convexity['min_eig']:.6g} "
                     f"at theta = {convexity['theta']:.4g}" + ("" if convexity["required"] else " (not required)"))
    lines.append(f"  closure: {verdict(report['closure']['ok'])}, int x / phi = {report['closure']['value']:.3e}")
    if report["firey"] is not None:
        firey = report["firey"]
        lines.append(f"  firey: {verdict(firey['ok'])}, min defect = {firey['min_defect']:.6g}, "
                     f"tail positive = {firey['tail_positive']}, closes = {firey['closes']}")
    lines.append(f"  overall: {verdict(report['passed'])}")
    return "\n".join(lines)


def cmd_check(config: RunConfig, output_dir: Path = None) -> int:
    """
    Prints the static checks of the anisotropy of a configuration, and writes them to check.json when the json
    format is enabled.
    """
    params = validate_recipe(config.recipe, config.num_points, **config.engine_kwargs())
    report = static_checks(params)
    report["scenario"] = config.scenario
    print(format_check_report(config.scenario, report))
    if "json" in config.formats:
        output_dir = Path(output_dir if output_dir is not None else config.output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        write_json(report, output_dir / CHECK_FILE)
    return EXIT_OK


def cmd_list_scenarios() -> int:
    for name in list_scenarios():
        recipe = scenario_recipe(name)
        print(f"{name}: n={recipe.n}, k={recipe.k}, p={recipe.p}, phi={recipe.phi_kind}, "
              f"initial={recipe.initial_kind}, expected={recipe.expected_outcome}. {recipe.notes}")
    return EXIT_OK


def _output_dirs(configs: Sequence[RunConfig]) -> List[Path]:
    # Several configurations get private sub-directories
    if len(configs) == 1:
        return [Path(configs[0].output_dir)]
    repeated = Counter(config.scenario for config in configs)
    return [Path(config.output_dir) / (config.scenario if repeated[config.scenario] == 1
                                       else f"{config.scenario}_{i}")
            for i, config in enumerate(configs)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cm-flow",
                                     description="Rotationally symmetric expanding curvature flows on S^n")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Only log warnings and errors")
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log debug messages")

    overrides = argparse.ArgumentParser(add_help=False)
    overrides.add_argument("configs", nargs="+", type=Path, help="Configuration files")
    overrides.add_argument("--grid-points", type=int, help="Override [grid] num_points")
    overrides.add_argument("--t-max", type=float, help="Override [engine] t_max")
    overrides.add_argument("--output-dir", type=Path, help="Override [output] directory")

    commands = parser.add_subparsers(dest="command", required=True)
    run = commands.add_parser("run", parents=[overrides], help="Run the flow of each configuration")
    run.add_argument("-j", "--jobs", type=int, default=1, help="Configurations run in parallel")
    commands.add_parser("check", parents=[overrides], help="Static checks of the anisotropy, no flow")
    commands.add_parser("list-scenarios", help="Registered scenario names")
    return parser


def _load(args) -> List[RunConfig]:
    configs = []
    for path in args.configs:
        config = load_config(path)
        output_dir = str(args.output_dir) if args.output_dir is not None else None
        configs.append(config.with_overrides(num_points=args.grid_points, t_max=args.t_max, output_dir=output_dir))
    return configs


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of cm-flow. Returns the exit status: 0 when every outcome matches its expectation, 2 on a
    mismatch, 1 on errors.
    """
    args = build_parser().parse_args(argv)
    _configure_logging(logging.WARNING if args.quiet else logging.DEBUG if args.verbose else logging.INFO)
    if args.command == "list-scenarios":
        return cmd_list_scenarios()
    try:
        configs = _load(args)
    except (FlowError, OSError) as error:
        logger.error("Invalid configuration: %s", error)
        return EXIT_INTERNAL_ERROR
    directories = _output_dirs(configs)
    if args.command == "check":
        try:
            return max(cmd_check(config, directory) for config, directory in zip(configs, directories))
        except (FlowError, OSError) as error:
            logger.error("Check failed: %s", error)
            return EXIT_INTERNAL_ERROR
    if args.jobs < 1:
        logger.error("--jobs must be positive. Currently is %d.", args.jobs)
        return EXIT_INTERNAL_ERROR
    if args.jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_safe_run, configs, directories))
    else:
        codes = [_safe_run(config, directory) for config, directory in zip(configs, directories)]
    return max(codes)
