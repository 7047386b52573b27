"""
Simple (fixed-point) iteration x^(k) = F(x^(k-1)) for the periodic or
affine-boundary problem, plus the result types shared with the Newton
solvers.
"""

import time
from dataclasses import dataclass, field
from enum import Enum
from numbers import Integral
from typing import Any, Dict, List, Optional

from .matops import MatExpCache
from .model import BoundaryCondition, ControlSchedule, Grid, SystemModel, Trajectory
from .operators import BVPProblem, Quadrature, ResidualReport
from ..utils.config import BENCHMARK
from ..utils.error_handler import log_performance
from ..utils.exceptions import ConfigurationError, GridMismatchError
from ..utils.logger import get_logger


class DomainPolicy(Enum):
    """When iterates are required to stay in D"""
    EVERY_ITERATE = "every_iterate"
    FINAL_ONLY = "final_only"


@dataclass
class IterationResult:
    """Outcome of an iterative solve; history[k] describes iterate k"""
    final: Trajectory
    history: List[ResidualReport]
    converged: bool
    iterations_run: int
    method: str
    elapsed: float = 0.0
    iterates: Optional[List[Trajectory]] = field(default=None, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "iterations_run": self.iterations_run,
            "converged": self.converged,
            "elapsed_s": self.elapsed,
            "periodicity_gap": self.final.periodicity_gap(),
            "history": [r.to_dict() for r in self.history],
        }


def initial_trajectory(model: SystemModel, grid: Grid, initial: Optional[Trajectory] = None) -> Trajectory:
    """x^(0), zero by default; must lie in D"""
    if initial is None:
        x = Trajectory.zeros(grid, model.n)
    else:
        if not initial.grid.same_as(grid):
            raise GridMismatchError("Initial trajectory is on another grid")
        x = Trajectory(initial.samples, grid, iteration=0)
    model.check_domain(x.samples, iteration=0, what="Initial trajectory")
    return x


def check_iteration_count(n_I: int) -> int:
    if isinstance(n_I, bool) or not isinstance(n_I, Integral) or n_I < 0:
        raise ConfigurationError("Iteration count n_I must be a nonnegative integer", context={"n_I": n_I})
    return n_I


def is_converged(report: ResidualReport, tol: Optional[float]) -> bool:
    if tol is None:
        return False
    if report.operator_residual is not None and report.operator_residual <= tol:
        return True
    return report.k > 0 and report.iterate_gap <= tol


@log_performance("simple iteration")
def solve_simple(model: SystemModel, bc: BoundaryCondition, schedule: ControlSchedule, grid: Grid,
                 n_I: int = BENCHMARK.n_iterations, tol: Optional[float] = None,
                 initial: Optional[Trajectory] = None, cache: Optional[MatExpCache] = None,
                 quadrature: Quadrature = Quadrature.RECTANGLE,
                 domain_policy: DomainPolicy = DomainPolicy.EVERY_ITERATE,
                 keep_iterates: bool = False) -> IterationResult:
    logger = get_logger()
    start = time.perf_counter()
    check_iteration_count(n_I)
    problem = BVPProblem.build(model, bc, schedule, grid, cache, quadrature)
    check = domain_policy is DomainPolicy.EVERY_ITERATE

    x = initial_trajectory(model, grid, initial)
    iterates = [x] if keep_iterates else None
    history: List[ResidualReport] = []
    previous: Optional[Trajectory] = None
    converged = False

    fx = problem.F(x, check_domain=check)
    for k in range(n_I + 1):
        p = Trajectory(fx.samples - x.samples, grid, iteration=k)
        report = problem.residual(x, previous, p, check_domain=check)
        history.append(report)
        logger.log_iteration("Simple iteration", report)

        if is_converged(report, tol):
            converged = True
            break
        if k == n_I:
            break
        previous, x = x, fx
        if keep_iterates:
            iterates.append(x)
        fx = problem.F(x, check_domain=check)

    if not check:
        model.check_domain(x.samples, iteration=x.iteration, what="Final iterate")

    return IterationResult(final=x, history=history, converged=converged,
                           iterations_run=len(history) - 1, method="simple",
                           elapsed=time.perf_counter() - start, iterates=iterates)
