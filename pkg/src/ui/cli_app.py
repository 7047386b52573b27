"""
Command-line front end: solve, certify and bench
"""

import argparse
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from ..core.benchmark import run_figure1, run_table1
from ..core.certificates import certify
from ..core.model import Trajectory
from ..core.newton import solve_newton_classical, solve_newton_modified
from ..core.oracle import linear_periodic_initial_state, shooting_solve
from ..core.registry import (
    build_boundary, build_grid, build_model, build_schedule, reactor_params, solver_options,
)
from ..core.simple_iteration import solve_simple
from ..utils.artifacts import write_json, write_trajectory_csv
from ..utils.config import APP_CONFIG, BENCHMARK
from ..utils.error_handler import ErrorHandler
from ..utils.exceptions import (
    EXIT_ASSUMPTION_FAILURE, EXIT_NUMERICAL_FAILURE, EXIT_OK, EXIT_USER_ERROR,
)
from ..utils.logger import get_logger, setup_global_exception_handler
from ..utils.settings import RunConfig, RunConfigLoader, SolverMethod, SystemKind


def parse_count(text: str, minimum: int = 0) -> int:
    """Integer >= minimum, also written as 1e5 or 10^5"""
    text = text.strip()
    try:
        if "^" in text:
            base, exp = text.split("^", 1)
            value = int(base) ** int(exp)
        else:
            value = float(text)
            if value != int(value):
                raise ValueError(text)
            value = int(value)
    except (ValueError, OverflowError):
        raise argparse.ArgumentTypeError(f"not an integer: {text}")
    if not isinstance(value, int) or value < minimum:
        raise argparse.ArgumentTypeError(f"must be at least {minimum}: {text}")
    return value


def parse_grid_count(text: str) -> int:
    return parse_count(text, minimum=1)


class CliApp:
    """Builds the problem from a run configuration and drives one verb"""

    def __init__(self, out=None, err=None):
        self.out = out or sys.stdout
        self.err = err or sys.stderr
        self.logger = get_logger()
        self.loader = RunConfigLoader()
        self.error_handler = ErrorHandler(notification_callback=self.print_notification)

    def print_notification(self, title: str, message: str):
        print(f"{title}: {message}", file=self.err)

    def say(self, message: str):
        print(message, file=self.out)

    def _build(self, config: RunConfig):
        model = build_model(config.system)
        params = reactor_params(config.system) if config.system.name == SystemKind.REACTOR.value else None
        schedule = build_schedule(config.schedule, model, params)
        bc = build_boundary(config.boundary, model.n)
        grid = build_grid(schedule, config.solver)
        return model, schedule, bc, grid

    def cmd_solve(self, config: RunConfig) -> int:
        timings: Dict[str, float] = {}
        start = time.perf_counter()
        model, schedule, bc, grid = self._build(config)
        timings["build_s"] = time.perf_counter() - start

        options = solver_options(config.solver)
        method = config.solver.method
        start = time.perf_counter()
        if method == SolverMethod.SIMPLE.value:
            result = solve_simple(model, bc, schedule, grid, **options)
        elif method == SolverMethod.NEWTON_MODIFIED.value:
            result = solve_newton_modified(model, schedule, grid, bc=bc, **options)
        else:
            result = solve_newton_classical(model, schedule, grid, bc=bc, **options)
        timings["solve_s"] = time.perf_counter() - start

        report: Dict[str, Any] = {
            "method": result.method,
            "n_G": grid.n_steps,
            "n_I": config.solver.n_I,
            "converged": result.converged,
            "iterations_run": result.iterations_run,
            "residual_history": [r.to_dict() for r in result.history],
            "periodicity_gap": result.final.periodicity_gap(),
            "boundary_residual": bc.residual(result.final),
            "config": self.loader.to_dict(config),
            "system": self.logger.log_system_info(),
        }

        if config.oracle:
            start = time.perf_counter()
            report["oracle"] = self._oracle(model, schedule, bc, result.final)
            timings["oracle_s"] = time.perf_counter() - start

        exit_code = EXIT_OK
        if config.certificate.enabled:
            start = time.perf_counter()
            cert = self._certify(config, model, schedule, bc, grid)
            report["certificate"] = cert.to_dict()
            if not cert.passed:
                exit_code = EXIT_ASSUMPTION_FAILURE
            timings["certificate_s"] = time.perf_counter() - start

        start = time.perf_counter()
        out_dir = config.output.directory
        write_trajectory_csv(result.final, out_dir / config.output.trajectory_csv)
        timings["write_s"] = time.perf_counter() - start
        report["timings"] = timings
        write_json(report, out_dir / config.output.report_json)

        last = result.history[-1]
        self.say(f"{result.method}: {result.iterations_run} iterations, d = {last.d:.6e}, "
                 f"gap = {last.periodicity_gap:.3e}, converged = {result.converged}")
        return exit_code

    def _oracle(self, model, schedule, bc, final: Trajectory) -> Dict[str, Any]:
        if not bc.is_periodic:
            return {"skipped": "oracle covers periodic boundary conditions only"}
        shot = shooting_solve(model, schedule)
        data = shot.to_dict()
        data["initial_state_distance"] = float(np.linalg.norm(final.initial - shot.x0_star))
        if model.field.is_zero:
            closed = linear_periodic_initial_state(model.A, schedule)
            data["linear_closed_form"] = closed.tolist()
            data["closed_form_distance"] = float(np.linalg.norm(final.initial - closed))
        self.logger.info("Oracle comparison", distance=f"{data['initial_state_distance']:.3e}")
        return data

    def _certify(self, config: RunConfig, model, schedule, bc, grid):
        spec = config.certificate
        return certify(model, bc, schedule, grid, box_lower=spec.box_lower, box_upper=spec.box_upper,
                       growth_override=spec.growth_override, L=spec.L, H_bar=spec.H_bar, r=spec.r,
                       density=spec.density, seed=spec.seed, random_points=spec.random_points)

    def cmd_certify(self, config: RunConfig) -> int:
        model, schedule, bc, grid = self._build(config)
        cert = self._certify(config, model, schedule, bc, grid)
        data = cert.to_dict()
        data["config"] = self.loader.to_dict(config)
        write_json(data, config.output.directory / config.output.certificate_json)

        tag = " (heuristic)" if cert.heuristic else ""
        self.say(f"q = {cert.q}, S = {cert.S}, h = {cert.h}{tag}")
        self.say(f"A1 {cert.a1_ok}  A4 {cert.a4_ok}  A5 {cert.a5_ok}  h<=1/2 {cert.h_ok}")
        return EXIT_OK if cert.passed else EXIT_ASSUMPTION_FAILURE

    def cmd_bench(self, which: str, out_dir: Path, n_G: Optional[int] = None,
                  n_I: Optional[int] = None) -> int:
        if which == "table1":
            report = run_table1(n_grid=BENCHMARK.n_grid if n_G is None else n_G,
                                n_iterations=BENCHMARK.n_iterations if n_I is None else n_I,
                                out_dir=out_dir)
        else:
            report = run_figure1(n_grid=BENCHMARK.n_grid if n_G is None else n_G,
                                 n_iterations=BENCHMARK.figure_iterations if n_I is None else n_I,
                                 out_dir=out_dir)

        for run in report.runs:
            self.say(f"{run.method} ({run.elapsed:.2f}s)")
            self.say(f"{'k':>3} {'residual':>14} {'reference':>14} {'gap':>11} verdict")
            for row in run.rows:
                ref = f"{row.reference:14.6e}" if row.reference is not None else f"{'-':>14}"
                verdict = "-" if row.verdict is None else ("ok" if row.verdict else "FAIL")
                self.say(f"{row.k:>3} {row.residual:14.6e} {ref} {row.gap:11.3e} {verdict}")
        for name, ok in report.checks.items():
            self.say(f"{name}: {ok}")

        if report.informational:
            self.say("informational run: verdicts disabled")
            return EXIT_OK
        return EXIT_OK if report.passed else EXIT_NUMERICAL_FAILURE

    def load_config(self, args) -> RunConfig:
        config = self.loader.load(args.config)
        return self.loader.apply_overrides(
            config, n_G=args.n_g, n_I=args.n_i, method=getattr(args, "method", None),
            oracle=True if getattr(args, "oracle", False) else None,
            seed=args.seed, out_dir=args.out,
        )

    def run(self, args) -> int:
        try:
            if args.command == "bench":
                return self.cmd_bench(args.which, Path(args.out or "results"), args.n_g, args.n_i)
            config = self.load_config(args)
            if args.command == "solve":
                return self.cmd_solve(config)
            return self.cmd_certify(config)
        except Exception as e:
            return self.error_handler.handle_error(e, context=args.command)


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the configuration-error code"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(
        prog="periodic-bvp",
        description="Periodic and two-point boundary value problems for x' = Ax + g(x) + u(t)",
    )
    parser.add_argument("--version", action="version",
                        version=f"{APP_CONFIG.app_name} {APP_CONFIG.app_version}")
    parser.add_argument("--debug", action="store_true", help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_config: bool = True):
        if with_config:
            p.add_argument("--config", required=True, type=Path, help="TOML or JSON run configuration")
        p.add_argument("--out", help="output directory")
        p.add_argument("--n-g", type=parse_grid_count, dest="n_g", help="grid intervals n_G")
        p.add_argument("--n-i", type=parse_count, dest="n_i", help="iteration count n_I")
        p.add_argument("--seed", type=int, help="seed for sampled bounds")

    solve = sub.add_parser("solve", help="solve the boundary value problem")
    common(solve)
    solve.add_argument("--method", choices=[m.value for m in SolverMethod])
    solve.add_argument("--oracle", action="store_true", help="cross-check with the shooting method")

    cert = sub.add_parser("certify", help="evaluate the convergence certificate")
    common(cert)

    bench = sub.add_parser("bench", help="run a reactor benchmark")
    bench.add_argument("which", choices=["table1", "figure1"])
    common(bench, with_config=False)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench" and args.seed is not None:
        parser.error("--seed applies to solve and certify")
    get_logger(debug_mode=args.debug)
    setup_global_exception_handler()
    return CliApp().run(args)


if __name__ == "__main__":
    sys.exit(main())
