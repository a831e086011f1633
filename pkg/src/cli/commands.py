"""
Command-line surface: check, solve, report, example

Every command prints one machine-readable document on stdout and returns an
exit code: 0 success, 1 infeasible or not converged, 2 bad input.
"""

import sys
import argparse
import logging
from typing import Callable, Dict, List, Optional, TextIO

import numpy as np
from pydantic import ValidationError

from src.core.curvature_field import curvatures, residual
from src.core.errors import CircleFlowError, PatternFileError
from src.core.feasibility import EXHAUSTIVE_LIMIT, FeasibilityReport, check_exhaustive, check_flow
from src.core.pattern_graph import PatternGraph, k_from_r, r_from_k, validate
from src.core.solver import (
    FlowConfig,
    SolveResult,
    integrate_flow,
    integrate_flow_radius,
    newton_solve,
    random_initial_k,
)
from src.utils.config import get_settings
from .examples import EXAMPLE_NAMES, get_example
from .pattern_file import emit_pattern, load_pattern, write_pattern
from .reports import (
    CheckReport,
    ErrorReport,
    FeasibilityPayload,
    SolverStats,
    build_run_report,
    write_trajectory,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_INPUT = 2


def _emit(document, out: TextIO) -> None:
    print(document.model_dump_json(indent=2), file=out)


def _feasibility(graph: PatternGraph, method: str = "auto", epsilon: float = 1e-12) -> FeasibilityReport:
    if method == "auto":
        method = "exhaustive" if graph.n <= EXHAUSTIVE_LIMIT else "flow"
    if method == "exhaustive":
        return check_exhaustive(graph)
    return check_flow(graph, epsilon)


def cmd_check(args: argparse.Namespace, out: TextIO) -> int:
    document = load_pattern(args.pattern)
    graph = document.graph
    verdict = _feasibility(graph, args.method, args.epsilon)
    epsilon = args.epsilon if verdict.method == "flow" else None
    _emit(CheckReport(
        pattern=args.pattern,
        vertices=graph.n,
        edges=graph.m,
        feasibility=FeasibilityPayload.from_report(verdict, epsilon),
        warnings=validate(graph).warnings,
    ), out)
    if not verdict.feasible:
        logger.info(f"Infeasible: subset {{{', '.join(verdict.witness)}}} has slack {verdict.worst_slack:.6g}")
    return EXIT_OK if verdict.feasible else EXIT_FAILURE


def _flow_config(args: argparse.Namespace) -> FlowConfig:
    overrides = {
        "step": args.step,
        "tol": args.tol,
        "max_time": args.max_time,
        "capture_every": args.capture_every,
        "integrator": args.integrator,
        "quadrature_nodes": args.quadrature_nodes,
    }
    return FlowConfig(**{key: value for key, value in overrides.items() if value is not None})


def _initial_k(args: argparse.Namespace, graph: PatternGraph, radii: Optional[np.ndarray]):
    if args.seed is not None:
        return random_initial_k(graph.n, np.random.default_rng(args.seed)), f"uniform[-3,3] seed {args.seed}"
    if radii is not None:
        return k_from_r(radii), "radii section"
    return np.zeros(graph.n), "K = 0"


def _best(results: List[SolveResult]) -> SolveResult:
    converged = [result for result in results if result.converged]
    if converged:
        return converged[0]
    return min(results, key=lambda result: result.final_residual)


def cmd_solve(args: argparse.Namespace, out: TextIO) -> int:
    document = load_pattern(args.pattern)
    graph = document.graph
    config = _flow_config(args)
    k0, origin = _initial_k(args, graph, document.radii)

    verdict = _feasibility(graph)
    if not verdict.feasible:
        logger.warning(f"Targets are not feasible (witness {', '.join(verdict.witness)}, "
                       f"slack {verdict.worst_slack:.6g}); the solvers will not converge")

    results: List[SolveResult] = []
    trajectory = None
    if args.method in ("flow", "both"):
        if args.form == "radius":
            trajectory, result = integrate_flow_radius(graph, r_from_k(k0), config)
        else:
            trajectory, result = integrate_flow(graph, k0, config)
        results.append(result)
    if args.method in ("newton", "both"):
        results.append(newton_solve(graph, k0, tol=config.tol, max_iter=args.max_iter))

    best = _best(results)
    agreement = None
    if len(results) == 2 and all(result.converged for result in results):
        agreement = float(np.max(np.abs(results[0].k_star - results[1].k_star)))

    settings = get_settings()
    run_config = config.model_dump()
    run_config.update({
        "method": args.method,
        "form": args.form,
        "initial": origin,
        "newton_max_iter": args.max_iter,
        "quadrature_nodes": config.quadrature_nodes or settings.quadrature_nodes,
        "dense_limit": settings.dense_limit,
    })
    report = build_run_report(
        "solve", graph, best.k_star, curvatures(graph, best.k_star), pattern=args.pattern,
        feasibility=FeasibilityPayload.from_report(verdict),
        solvers=[SolverStats.from_result(result) for result in results],
        solver_agreement=agreement,
        initial_residual=residual(graph, k0),
        run_config=run_config,
    )
    _emit(report, out)

    if args.trajectory:
        if trajectory is None:
            logger.warning("--trajectory needs a flow run; nothing written")
        else:
            write_trajectory(args.trajectory, graph, trajectory)
    if args.write_solved:
        write_pattern(args.write_solved, graph, best.r_star,
                      comment=f"radii from {best.method}, residual {best.final_residual:.3e}")

    return EXIT_OK if all(result.converged for result in results) else EXIT_FAILURE


def cmd_report(args: argparse.Namespace, out: TextIO) -> int:
    document = load_pattern(args.pattern)
    if document.radii is None:
        raise PatternFileError("missing required section 'radii' for report", path=args.pattern)
    graph = document.graph
    k = k_from_r(document.radii)
    _emit(build_run_report("report", graph, k, curvatures(graph, k), pattern=args.pattern), out)
    return EXIT_OK


def cmd_example(args: argparse.Namespace, out: TextIO) -> int:
    graph = get_example(args.name, seed=args.seed, vertices=args.vertices, infeasible=args.infeasible)
    if args.name.lower() == "random":
        side = "infeasible" if args.infeasible else "feasible"
        comment = f"random {side} pattern, seed {args.seed}, {graph.n} vertices"
    else:
        comment = f"{args.name.lower()}: theta = pi/3, targets (2/3) * theta * deg(v)"
    text = emit_pattern(graph, comment=comment)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
        logger.info(f"Wrote example {args.name} to {args.output}")
    else:
        out.write(text)
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, TextIO], int]] = {
    "check": cmd_check,
    "solve": cmd_solve,
    "report": cmd_report,
    "example": cmd_example,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circleflow",
        description="Spherical circle patterns with prescribed total geodesic curvature")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="decide whether the targets are feasible")
    check.add_argument("pattern")
    check.add_argument("--method", choices=["auto", "exhaustive", "flow"], default="auto")
    check.add_argument("--epsilon", type=float, default=1e-12, help="margin for the flow method")

    solve = sub.add_parser("solve", help="find radii realizing the targets")
    solve.add_argument("pattern")
    solve.add_argument("--method", choices=["flow", "newton", "both"], default="flow")
    solve.add_argument("--form", choices=["k", "radius"], default="k", help="flow variable")
    solve.add_argument("--integrator", choices=["rk4", "euler"])
    solve.add_argument("--tol", type=float)
    solve.add_argument("--max-time", type=float)
    solve.add_argument("--step", type=float)
    solve.add_argument("--capture-every", type=float)
    solve.add_argument("--quadrature-nodes", type=int)
    solve.add_argument("--max-iter", type=int, default=50, help="Newton iteration cap")
    solve.add_argument("--seed", type=int, help="draw the initial K uniformly from [-3, 3]^N")
    solve.add_argument("--trajectory", metavar="CSV", help="write the flow trajectory")
    solve.add_argument("--write-solved", metavar="PATH", help="write the pattern with solved radii")

    report = sub.add_parser("report", help="evaluate curvatures at the file's radii")
    report.add_argument("pattern")

    example = sub.add_parser("example", help=f"print a built-in pattern ({', '.join(EXAMPLE_NAMES)})")
    example.add_argument("name")
    example.add_argument("--seed", type=int, default=0)
    example.add_argument("--vertices", type=int, default=6)
    example.add_argument("--infeasible", action="store_true")
    example.add_argument("--output", metavar="PATH")
    return parser


def dispatch(args: argparse.Namespace, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    """Run one parsed command, mapping errors to exit code 2 with a diagnostic on err"""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        return COMMANDS[args.command](args, out)
    except PatternFileError as e:
        print(e.diagnostic(), file=err)
        _emit(ErrorReport(command=args.command, pattern=e.path, error=e.message, line=e.line), out)
        return EXIT_BAD_INPUT
    except (CircleFlowError, ValidationError, OSError) as e:
        print(f"{args.command}: {e}", file=err)
        _emit(ErrorReport(command=args.command, pattern=getattr(args, "pattern", None), error=str(e)), out)
        return EXIT_BAD_INPUT


def run(argv: Optional[List[str]] = None, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    return dispatch(build_parser().parse_args(argv), out, err)
