"""
Newton schemes for P(x) = F(x) - x = 0 with periodic boundary conditions.

The inverse of P'(x) is applied in closed form: with Phi the fundamental
matrix of y' = (A + g'(x(t))) y and R = (e^{-tau A} - I)^{-1},

    S(t)  = int_0^t Phi^{-1} g'(x) dy ds
    C_s   = int_0^tau e^{-sA} g'(x) (dy + Phi S) ds
    C     = M_x^{-1} R C_s,   M_x = R int_0^tau e^{-sA} g'(x) Phi ds - I
    dx    = Phi (C - S) - dy

All integrals use the left-endpoint rule on the trajectory grid.
"""

import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .matops import FundamentalMatrix, LinearSolver, MatExpCache, fundamental_matrix
from .model import BoundaryCondition, ControlSchedule, Grid, SystemModel, Trajectory
from .operators import (
    BVPProblem, BoundaryMatrixBundle, Quadrature, ResidualReport,
    boundary_matrices, variation_of_constants,
)
from .simple_iteration import (
    DomainPolicy, IterationResult, check_iteration_count, initial_trajectory, is_converged,
)
from ..utils.config import BENCHMARK
from ..utils.error_handler import log_performance
from ..utils.exceptions import ConfigurationError, GridMismatchError, MxSingularError
from ..utils.logger import get_logger


@dataclass(frozen=True, eq=False)
class PPrimeInverse:
    """[P'(x)]^{-1} frozen at a base trajectory"""

    base_point: Trajectory
    Phi: FundamentalMatrix
    M_x: np.ndarray
    M_solve: LinearSolver
    gprime_nodes: np.ndarray
    constant_map: np.ndarray                       # M_x^{-1} (e^{-tau A} - I)^{-1}
    phi_inv_g: np.ndarray = field(repr=False)      # Phi^{-1}(t_j) g'(x_j)
    exp_g: np.ndarray = field(repr=False)          # e^{-t_j A} g'(x_j)

    @property
    def grid(self) -> Grid:
        return self.base_point.grid


def _require_periodic(bc: Optional[BoundaryCondition], n: int) -> BoundaryCondition:
    bc = bc or BoundaryCondition.periodic(n)
    if not bc.is_periodic:
        raise ConfigurationError("Newton solvers support periodic boundary conditions only")
    return bc


def assemble_pprime_inverse(model: SystemModel, schedule: ControlSchedule, x: Trajectory, grid: Grid,
                            cache: Optional[MatExpCache] = None,
                            bc: Optional[BoundaryCondition] = None,
                            bundle: Optional[BoundaryMatrixBundle] = None) -> PPrimeInverse:
    bc = _require_periodic(bc, model.n)
    if not x.grid.same_as(grid):
        raise GridMismatchError(context={"expected": grid.n_steps, "got": x.grid.n_steps})
    cache = cache or MatExpCache.build(model.A, grid)
    bundle = bundle or boundary_matrices(bc, model.A, grid.tau)

    model.check_domain(x.samples, iteration=x.iteration, what="Newton base point")
    G = model.g_jac(x.samples, check_domain=False)
    Phi = fundamental_matrix(model, x, grid)

    exp_g = np.einsum("jab,jbc->jac", cache.E_minus, G)
    W = grid.dt * np.einsum("jab,jbc->ac", exp_g[:-1], Phi.Phi[:-1])
    R = bundle.M0_inv_factor
    M_x = R @ W - np.eye(model.n)

    solver = LinearSolver(M_x, what="M_x", error_cls=MxSingularError)
    get_logger().debug("Assembled [P'(x)]^-1", iteration=x.iteration, rcond=f"{solver.rcond:.3e}")

    return PPrimeInverse(
        base_point=x, Phi=Phi, M_x=M_x, M_solve=solver, gprime_nodes=G,
        constant_map=solver.solve(R),
        phi_inv_g=np.einsum("jab,jbc->jac", Phi.Phi_inv, G),
        exp_g=exp_g,
    )


def apply_pprime_inverse(pinv: PPrimeInverse, dy: Trajectory) -> Trajectory:
    """dx with P'(x) dx = dy"""
    if not dy.grid.same_as(pinv.grid):
        raise GridMismatchError(context={"expected": pinv.grid.n_steps, "got": dy.grid.n_steps})
    dt = pinv.grid.dt
    Phi = pinv.Phi.Phi
    d = dy.samples

    S = np.zeros_like(d)
    np.cumsum(dt * np.einsum("jab,jb->ja", pinv.phi_inv_g[:-1], d[:-1]), axis=0, out=S[1:])
    q = d + np.einsum("jab,jb->ja", Phi, S)
    Cs = dt * np.einsum("jab,jb->a", pinv.exp_g[:-1], q[:-1])
    C = pinv.constant_map @ Cs
    dx = np.einsum("jab,jb->ja", Phi, C - S) - d
    return Trajectory(dx, pinv.grid, iteration=dy.iteration)


def _run_newton(model: SystemModel, schedule: ControlSchedule, grid: Grid, n_I: int,
                tol: Optional[float], initial: Optional[Trajectory], bc: Optional[BoundaryCondition],
                cache: Optional[MatExpCache], quadrature: Quadrature,
                domain_policy: DomainPolicy, keep_iterates: bool, reassemble: bool) -> IterationResult:
    logger = get_logger()
    start = time.perf_counter()
    check_iteration_count(n_I)
    bc = _require_periodic(bc, model.n)
    problem = BVPProblem.build(model, bc, schedule, grid, cache, quadrature)
    check = domain_policy is DomainPolicy.EVERY_ITERATE
    method = "newton-classical" if reassemble else "newton-modified"

    x = initial_trajectory(model, grid, initial)
    pinv = assemble_pprime_inverse(model, schedule, x, grid, problem.cache, bc, problem.bundle)
    iterates = [x] if keep_iterates else None
    history: List[ResidualReport] = []
    previous: Optional[Trajectory] = None
    converged = False

    for k in range(n_I + 1):
        p = problem.P(x, check_domain=check)
        report = problem.residual(x, previous, p, check_domain=check)
        history.append(report)
        logger.log_iteration("Newton iteration", report, method=method)

        if is_converged(report, tol):
            converged = True
            break
        if k == n_I:
            break
        if reassemble and k > 0:
            pinv = assemble_pprime_inverse(model, schedule, x, grid, problem.cache, bc, problem.bundle)
        dx = apply_pprime_inverse(pinv, p)
        previous, x = x, Trajectory(x.samples - dx.samples, grid, iteration=k + 1)
        if keep_iterates:
            iterates.append(x)

    if not check:
        model.check_domain(x.samples, iteration=x.iteration, what="Final iterate")

    return IterationResult(final=x, history=history, converged=converged,
                           iterations_run=len(history) - 1, method=method,
                           elapsed=time.perf_counter() - start, iterates=iterates)


@log_performance("modified Newton")
def solve_newton_modified(model: SystemModel, schedule: ControlSchedule, grid: Grid,
                          n_I: int = BENCHMARK.n_iterations, tol: Optional[float] = None,
                          initial: Optional[Trajectory] = None,
                          bc: Optional[BoundaryCondition] = None,
                          cache: Optional[MatExpCache] = None,
                          quadrature: Quadrature = Quadrature.RECTANGLE,
                          domain_policy: DomainPolicy = DomainPolicy.EVERY_ITERATE,
                          keep_iterates: bool = False) -> IterationResult:
    """x^(k+1) = x^(k) - [P'(x^(0))]^{-1} P(x^(k))"""
    return _run_newton(model, schedule, grid, n_I, tol, initial, bc, cache, quadrature,
                       domain_policy, keep_iterates, reassemble=False)


@log_performance("classical Newton")
def solve_newton_classical(model: SystemModel, schedule: ControlSchedule, grid: Grid,
                           n_I: int = BENCHMARK.n_iterations, tol: Optional[float] = None,
                           initial: Optional[Trajectory] = None,
                           bc: Optional[BoundaryCondition] = None,
                           cache: Optional[MatExpCache] = None,
                           quadrature: Quadrature = Quadrature.RECTANGLE,
                           domain_policy: DomainPolicy = DomainPolicy.EVERY_ITERATE,
                           keep_iterates: bool = False) -> IterationResult:
    """x^(k+1) = x^(k) - [P'(x^(k))]^{-1} P(x^(k)); experimental"""
    return _run_newton(model, schedule, grid, n_I, tol, initial, bc, cache, quadrature,
                       domain_policy, keep_iterates, reassemble=True)


def eval_second_derivative(model: SystemModel, x: Trajectory, v1: Trajectory, v2: Trajectory,
                           grid: Grid, cache: Optional[MatExpCache] = None,
                           bc: Optional[BoundaryCondition] = None) -> Trajectory:
    """P''(x)(v1, v2) on the grid; the input drops out of second derivatives"""
    for traj in (x, v1, v2):
        if not traj.grid.same_as(grid):
            raise GridMismatchError(context={"expected": grid.n_steps, "got": traj.grid.n_steps})
    bc = bc or BoundaryCondition.periodic(model.n)
    cache = cache or MatExpCache.build(model.A, grid)
    bundle = boundary_matrices(bc, model.A, grid.tau)

    model.check_domain(x.samples, iteration=x.iteration)
    H = model.field.hessian(x.samples)
    a, b = v1.samples, v2.samples
    w = 0.5 * (np.einsum("jkab,ja,jb->jk", H, a, b) + np.einsum("jkab,ja,jb->jk", H, b, a))

    increments = grid.dt * np.einsum("jab,jb->ja", cache.E_minus[:-1], w[:-1])
    out = variation_of_constants(increments, cache, bundle, bc, homogeneous=True)
    return Trajectory(out, grid, iteration=x.iteration)
