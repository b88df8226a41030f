"""decilab command-line interface.

Subcommands generate instances, query the exact oracle and BP, run the
structural detectors, evaluate the phase inequalities and run experiments.
Data goes to stdout or files; logs go to stderr.
"""

from __future__ import annotations

import argparse
from collections.abc import Callable
from dataclasses import replace
import json
import logging
import os
from pathlib import Path
import sys
from typing import Any

import numpy as np

from decilab.digest import formula_digest
from decilab.harness import load_experiment_spec, run_experiment
from decilab.lib.bp import bp_decimation, bp_marginals, default_omega
from decilab.lib.dimacs import emit_dimacs, format_sigma, parse_dimacs, parse_sigma
from decilab.lib.formula import Assignment, Formula
from decilab.lib.generators import PlantedPair, generate
from decilab.lib.geometry import distance_profile, geometry
from decilab.lib.oracle import (
    count_solutions,
    enumerate_solutions,
    marginal_histogram,
    true_marginals,
    uniform_solution_sample,
)
from decilab.lib.phase import PHASE_FIELDS, phase_grid
from decilab.lib.rng import spawn_generator
from decilab.lib.structure import expansion_check, q0_check, structure_report, thresholds
from decilab.protocol import emit, encode_record, write_csv
from decilab.types import (
    AssignmentError,
    DecilabError,
    GenConfig,
    Model,
    OracleLimitError,
    OracleLimits,
    OutputFormat,
    RecordKind,
)
from decilab.utils.formatting import format_fraction, truncate_for_log
from decilab.utils.validation import ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SPEC_ERROR = 2
EXIT_LIMIT_ABORT = 3


class TruncatingFormatter(logging.Formatter):
    """Formatter that shortens over-long messages such as formula dumps."""

    def format(self, record: logging.LogRecord) -> str:
        record.msg = truncate_for_log(str(record.getMessage()))
        record.args = None
        return super().format(record)


# ============================================================================
# Helpers
# ============================================================================


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read_formula(path: str) -> tuple[Formula, Assignment | None]:
    text = Path(path).read_text(encoding="utf-8")
    return parse_dimacs(text), parse_sigma(text)


def _read_sigma(path: str) -> Assignment:
    sigma = parse_sigma(Path(path).read_text(encoding="utf-8"))
    if sigma is None:
        raise AssignmentError(f"{path} holds no sigma")
    return sigma


def _dump(payload: dict[str, Any], path: str) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _limits() -> OracleLimits:
    return OracleLimits.from_env()


# ============================================================================
# Commands
# ============================================================================


def cmd_gen(args: argparse.Namespace) -> int:
    """Draw one instance and write it as DIMACS."""
    m = args.m if args.m is not None else round(args.r * args.n)
    config = GenConfig(args.n, args.k, m, args.seed, Model(args.model))
    drawn = generate(config)
    if isinstance(drawn, PlantedPair):
        formula, sigma = drawn
    else:
        formula, sigma = drawn, None
        if args.sigma_out:
            rng = spawn_generator(args.seed, 0, 1)
            sigma = uniform_solution_sample(formula, rng, limits=_limits())
    logger.info("generated %s instance %s", config.model.value, formula_digest(formula))
    _write(emit_dimacs(formula, sigma=sigma), args.out)
    if args.sigma_out and sigma is not None:
        Path(args.sigma_out).write_text(format_sigma(sigma) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    """Exact counts, marginals, geometry and distance profiles."""
    formula, _ = _read_formula(args.input)
    limits = _limits()
    result: dict[str, Any] = {"count": count_solutions(formula, limits=limits)}
    if args.marginals:
        marginals = true_marginals(formula, limits=limits)
        result["marginals"] = {
            f"x{v}": format_fraction(value) for v, value in marginals.values.items()
        }
        result["histogram"] = list(marginal_histogram(marginals.as_floats()))
    if args.geometry or args.profile_from:
        solutions = enumerate_solutions(formula, limits=limits)
        if args.geometry:
            report = geometry(solutions, args.alpha, rng=args.seed, limits=limits)
            result["geometry"] = {
                "average_distance": report.average_distance,
                "standard_error": report.standard_error,
                "sampled": report.sampled,
                "diameter": report.diameter,
                "diameter_exact": report.diameter_exact,
                "frozen_fraction": report.frozen_fraction,
                "condensed": report.condensed,
            }
        if args.profile_from:
            sigma = _read_sigma(args.profile_from).restrict(solutions.variables)
            result["profile"] = list(distance_profile(solutions, sigma))
    if args.json:
        _dump(result, args.json)
    print(f"count {result['count']}")
    for name, value in result.get("marginals", {}).items():
        print(f"M {name} = {value}")
    if "histogram" in result:
        print("histogram " + " ".join(str(c) for c in result["histogram"]))
    for name, value in result.get("geometry", {}).items():
        print(f"{name} {value}")
    if "profile" in result:
        print("profile " + " ".join(str(c) for c in result["profile"]))
    return EXIT_OK


def cmd_bp(args: argparse.Namespace) -> int:
    """BP marginals, optionally followed by BP-guided decimation."""
    formula, _ = _read_formula(args.input)
    omega = default_omega(formula.n) if args.omega is None else args.omega
    bp = bp_marginals(formula, omega)
    result: dict[str, Any] = {
        "omega": omega,
        "zero_denominators": bp.zero_denominators,
        "marginals": {f"x{v}": mu for v, mu in bp.marginals.items()},
    }
    if args.decimate:
        run = bp_decimation(formula, omega, args.seed)
        result["decimation"] = {
            "succeeded": run.succeeded,
            "failed_at": run.failed_at,
            "assignment": None if run.assignment is None else run.assignment.to_bitstring(),
        }
    if args.json:
        _dump(result, args.json)
    print(f"omega {omega}")
    for name, mu in result["marginals"].items():
        print(f"mu {name} = {mu!r}")
    if args.decimate:
        decimation = result["decimation"]
        if decimation["succeeded"]:
            print(f"decimation succeeded {decimation['assignment']}")
        else:
            print(f"decimation failed at x{decimation['failed_at']}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    """Structural detectors for a formula and its sigma."""
    formula, embedded = _read_formula(args.input)
    sigma = _read_sigma(args.sigma) if args.sigma else embedded
    if sigma is None:
        raise AssignmentError("analyze needs a sigma (--sigma or a 'c sigma' line)")
    bounds = thresholds(formula.n)
    logger.info("thresholds for n=%d: ln n -> %d, ln ln n -> %d", formula.n, *bounds)
    solutions = enumerate_solutions(formula, limits=_limits()) if args.oracle else None
    report = structure_report(formula, sigma, solutions, args.omega)
    expansion = expansion_check(formula, args.chi)
    q0 = q0_check(formula)
    result: dict[str, Any] = {
        "thresholds": {"ln_n": bounds.ln_n, "ln_ln_n": bounds.ln_ln_n},
        "free_variables": len(report.variables),
        "loose_fraction": report.loose_fraction,
        "two_loose_fraction": report.two_loose_fraction,
        "rigid_fraction": report.rigid_fraction,
        "forced_fraction": report.forced_fraction,
        "self_contained_fraction": report.self_contained_fraction,
        "expansion": {
            "holds": expansion.holds,
            "mode": expansion.mode.value,
            "radius": expansion.radius,
            "witness": None if expansion.witness is None else sorted(expansion.witness),
        },
        "q0": {
            "passes": q0.passes,
            "max_degree": q0.max_degree,
            "redundant": q0.redundant,
        },
    }
    if args.json:
        _dump(result, args.json)
    print(f"thresholds ln_n={bounds.ln_n} ln_ln_n={bounds.ln_ln_n}")
    for name, value in result.items():
        if name != "thresholds":
            print(f"{name} {value}")
    return EXIT_OK


def cmd_phase(args: argparse.Namespace) -> int:
    """Regime verdicts over a (rho, theta) grid."""
    grid = args.grid or {}
    rhos, thetas = grid.get("rho", args.rho), grid.get("theta", args.theta)
    if rhos is None or thetas is None:
        raise ValidationError("phase needs rho and theta values (--rho/--theta or --grid)")
    rows = phase_grid(args.k, rhos, thetas)
    if args.csv:
        write_csv(rows, args.csv, fields=PHASE_FIELDS)
    for row in rows:
        print(
            f"k={row['k']} rho={row['rho']!r} theta={row['theta']!r} "
            f"labels={row['labels']} in_theorem_range={row['in_theorem_range']}"
        )
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    """Run an experiment spec and write its records."""
    spec = load_experiment_spec(args.spec, seed=args.seed)
    overrides: dict[str, Any] = {}
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.json:
        overrides["json_path"] = args.json
    if args.csv:
        overrides["csv_path"] = args.csv
    spec = replace(spec, **overrides) if overrides else spec
    kind = RecordKind.BP_COMPARISON if args.bp_comparison else RecordKind.DECIMATION
    records = run_experiment(spec, kind, limits=_limits())
    if spec.json_path:
        emit(records, OutputFormat.JSON_LINES, spec.json_path)
    if spec.csv_path:
        emit(records, OutputFormat.CSV, spec.csv_path)
    if not spec.json_path and not spec.csv_path:
        for record in records:
            sys.stdout.write(encode_record(record) + "\n")
    return EXIT_OK


# ============================================================================
# Argument parsing
# ============================================================================


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def _grid(text: str) -> dict[str, list[float]]:
    """Parse ``rho=a:b:s,theta=a:b:s`` into inclusive ranges."""
    axes: dict[str, list[float]] = {}
    for part in text.split(","):
        name, _, bounds = part.partition("=")
        try:
            start, stop, step = (float(value) for value in bounds.split(":"))
        except ValueError as exc:
            message = f"expected name=start:stop:step, got {part!r}"
            raise argparse.ArgumentTypeError(message) from exc
        if name not in {"rho", "theta"} or step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"invalid grid axis {part!r}")
        axes[name] = np.round(np.arange(start, stop + step / 2, step), 12).tolist()
    return axes


def build_parser() -> argparse.ArgumentParser:
    """The top-level parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="decilab", description="Random k-SAT decimation laboratory."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="Draw a random or planted k-CNF.")
    gen.add_argument("--n", type=int, required=True, help="Number of variables")
    gen.add_argument("--k", type=int, required=True, help="Clause length")
    size = gen.add_mutually_exclusive_group(required=True)
    size.add_argument("--m", type=int, help="Number of clauses")
    size.add_argument("--r", type=float, help="Clause density m/n")
    gen.add_argument("--seed", type=int, default=0, help="PRNG seed (default: 0)")
    gen.add_argument(
        "--model",
        choices=[model.value for model in Model],
        default=Model.UNIFORM.value,
        help="Formula ensemble (default: uniform)",
    )
    gen.add_argument("--out", help="DIMACS output file (default: stdout)")
    gen.add_argument("--sigma-out", help="Write sigma here (uniform: an exact uniform sample)")
    gen.set_defaults(handler=cmd_gen)

    oracle = commands.add_parser("oracle", help="Exact solution counting and marginals.")
    oracle.add_argument("--in", dest="input", required=True, help="DIMACS input file")
    oracle.add_argument("--marginals", action="store_true", help="Exact marginals")
    oracle.add_argument("--geometry", action="store_true", help="Distances between solutions")
    oracle.add_argument("--alpha", type=float, help="Condensation check: diameter <= alpha*n")
    oracle.add_argument("--profile-from", help="Sigma file for the distance profile")
    oracle.add_argument("--seed", type=int, default=0, help="Seed for sampled geometry")
    oracle.add_argument("--json", help="Also write the result as JSON here")
    oracle.set_defaults(handler=cmd_oracle)

    bp = commands.add_parser("bp", help="Belief Propagation marginals and decimation.")
    bp.add_argument("--in", dest="input", required=True, help="DIMACS input file")
    bp.add_argument("--omega", type=int, help="BP sweeps (default: ceil(ln n))")
    bp.add_argument("--seed", type=int, default=0, help="Seed for BP decimation")
    bp.add_argument("--decimate", action="store_true", help="Run BP-guided decimation")
    bp.add_argument("--json", help="Also write the result as JSON here")
    bp.set_defaults(handler=cmd_bp)

    analyze = commands.add_parser("analyze", help="Structural detectors under a sigma.")
    analyze.add_argument("--in", dest="input", required=True, help="DIMACS input file")
    analyze.add_argument("--sigma", help="Sigma file (default: the 'c sigma' line)")
    analyze.add_argument("--oracle", action="store_true", help="Add loose/rigid via the oracle")
    analyze.add_argument("--omega", type=int, help="Rigidity radius (default: ceil(ln n)+1)")
    analyze.add_argument("--chi", type=float, default=0.1, help="Expansion radius fraction")
    analyze.add_argument("--json", help="Also write the result as JSON here")
    analyze.set_defaults(handler=cmd_analyze)

    phase = commands.add_parser("phase", help="Regime inequalities at (k, rho, theta).")
    phase.add_argument("--k", type=int, required=True, help="Clause length")
    phase.add_argument("--rho", type=_float_list, help="rho value(s), a,b,...")
    phase.add_argument("--theta", type=_float_list, help="theta value(s)")
    phase.add_argument("--grid", type=_grid, help="Ranges rho=a:b:s,theta=a:b:s (inclusive)")
    phase.add_argument("--csv", help="Write the grid as CSV")
    phase.set_defaults(handler=cmd_phase)

    experiment = commands.add_parser("experiment", help="Run an experiment spec.")
    experiment.add_argument("--spec", required=True, help="JSON experiment spec")
    experiment.add_argument("--seed", type=int, help="Override the spec seed")
    experiment.add_argument(
        "--bp-comparison", action="store_true", help="BP against exact marginals per t"
    )
    experiment.add_argument("--json", help="JSON-lines output file")
    experiment.add_argument("--csv", help="CSV output file")
    experiment.add_argument("--workers", type=int, help="Worker processes")
    experiment.set_defaults(handler=cmd_experiment)
    return parser


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    """Parse command line arguments.

    Args:
        argv: Command line arguments (None uses sys.argv)

    Returns:
        Parsed namespace with a ``handler`` callable
    """
    return build_parser().parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    """Entry point for the decilab CLI.

    Args:
        argv: Command line arguments (None uses sys.argv)

    Returns:
        0 on success, 2 on a spec or input error, 3 on an oracle limit abort
    """
    log_level = os.getenv("DECILAB_LOG_LEVEL", "WARNING").upper()

    handler = logging.StreamHandler()
    handler.setFormatter(TruncatingFormatter("%(asctime)s [%(levelname)s] %(name)s: %(message)s"))
    logging.basicConfig(level=log_level, handlers=[handler], force=True)
    logger.info("Starting decilab (log_level=%s)", log_level)

    args = parse_args(argv)
    command: Callable[[argparse.Namespace], int] = args.handler
    try:
        return command(args)
    except OracleLimitError as exc:
        logger.error("%s aborted: %s", args.command, exc)
        return EXIT_LIMIT_ABORT
    except (ValidationError, DecilabError, OSError) as exc:
        logger.error("%s failed: %s", args.command, exc)
        return EXIT_SPEC_ERROR


if __name__ == "__main__":
    sys.exit(main())
