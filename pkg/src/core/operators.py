"""
Discrete operators for the boundary value problem

    x' = A x + g(x) + u(t),   M0 x(0) + M1 x(tau) = beta

in integral form x = F(x), with F(x)(t) = e^{tA}(c(x) + S(t)) and
S(t) = int_0^t e^{-sA}(g(x(s)) + u(s)) ds. Integrals use the left-endpoint
rectangle rule on the trajectory grid unless the exact-input quadrature is
requested, which integrates the piecewise-constant input term exactly.
"""

from dataclasses import dataclass, asdict
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np
from scipy import linalg

from .matops import LinearSolver, MatExpCache, mat_exp, spectral_norm
from .model import BoundaryCondition, ControlSchedule, Grid, SystemModel, Trajectory
from ..utils.exceptions import (
    ConditioningError, ConfigurationError, DivergenceError,
    DominantLinearizationError, GridMismatchError,
)
from ..utils.logger import get_logger


class Quadrature(Enum):
    RECTANGLE = "rectangle"
    EXACT_INPUT = "exact_input"


@dataclass(frozen=True, eq=False)
class BoundaryMatrixBundle:
    """B_tau = M0 + M1 e^{tau A} and the norms derived from it"""

    B_tau: np.ndarray
    B_tau_inv: np.ndarray
    B_tau_inv_norm: float
    B_tau_rcond: float
    E_tau: np.ndarray
    restricted_norm: float
    is_periodic: bool
    R_tau: Optional[float] = None
    M0_inv_factor: Optional[np.ndarray] = None   # (e^{-tau A} - I)^{-1}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "B_tau": self.B_tau.tolist(),
            "B_tau_inv_norm": self.B_tau_inv_norm,
            "B_tau_rcond": self.B_tau_rcond,
            "restricted_norm": self.restricted_norm,
            "is_periodic": self.is_periodic,
            "R_tau": self.R_tau,
        }


def boundary_matrices(bc: BoundaryCondition, A: np.ndarray, tau: float) -> BoundaryMatrixBundle:
    """
    Assemble B_tau and, when invertible, (e^{-tau A} - I)^{-1}.

    Raises DominantLinearizationError when B_tau fails the conditioning
    threshold.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if bc.dimension != n:
        raise ConfigurationError("Boundary condition and A disagree on dimension",
                                 context={"bc": bc.dimension, "A": n})
    E_tau = mat_exp(A, tau)
    B_tau = bc.M0 + bc.M1 @ E_tau
    try:
        solver = LinearSolver(B_tau, what="B_tau", error_cls=DominantLinearizationError)
    except DominantLinearizationError as e:
        e.context.update({"tau": tau})
        raise
    B_tau_inv = solver.inverse()

    R_tau, factor = None, None
    try:
        factor = LinearSolver(mat_exp(A, -tau) - np.eye(n), what="e^{-tau A} - I").inverse()
        R_tau = spectral_norm(factor)
    except ConditioningError:
        if bc.is_periodic:
            raise DominantLinearizationError("e^{-tau A} - I is singular (A1)", context={"tau": tau})

    return BoundaryMatrixBundle(
        B_tau=B_tau, B_tau_inv=B_tau_inv, B_tau_inv_norm=spectral_norm(B_tau_inv),
        B_tau_rcond=solver.rcond, E_tau=E_tau, restricted_norm=bc.restricted_norm,
        is_periodic=bc.is_periodic, R_tau=R_tau, M0_inv_factor=factor,
    )


def _integral_of_exp(A: np.ndarray, h: float) -> np.ndarray:
    """int_0^h e^{-sA} ds from one block exponential"""
    n = A.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -A
    block[:n, n:] = np.eye(n)
    return linalg.expm(h * block)[:n, n:]


def input_increments(schedule: ControlSchedule, grid: Grid, cache: MatExpCache,
                     quadrature: Quadrature = Quadrature.RECTANGLE) -> np.ndarray:
    """Per-cell input contributions to S, shape (n_G, n)"""
    nodes = grid.nodes
    if quadrature is Quadrature.RECTANGLE:
        u = schedule.sample(nodes[:-1])
        return grid.dt * np.einsum("jab,jb->ja", cache.E_minus[:-1], u)

    A = cache.A
    mid = 0.5 * (nodes[:-1] + nodes[1:])
    u = schedule.sample(mid)
    gamma = _integral_of_exp(A, grid.dt)
    out = np.einsum("jab,bc,jc->ja", cache.E_minus[:-1], gamma, u)

    tol = 1e-12 * grid.tau
    for s in schedule.switch_times[1:-1]:
        i = int(np.searchsorted(nodes, s, side="right")) - 1
        if i >= grid.n_steps or s - nodes[i] <= tol or nodes[i + 1] - s <= tol:
            continue
        inner = schedule.switch_times[(schedule.switch_times > nodes[i]) & (schedule.switch_times < nodes[i + 1])]
        marks = np.concatenate(([nodes[i]], inner, [nodes[i + 1]]))
        total = np.zeros(A.shape[0])
        for a, b in zip(marks[:-1], marks[1:]):
            total += mat_exp(A, -a) @ _integral_of_exp(A, b - a) @ schedule.value_at(0.5 * (a + b))
        out[i] = total
    return out


@dataclass(frozen=True)
class ResidualReport:
    """Residual metrics of one iterate"""
    k: int
    d: float
    periodicity_gap: float
    iterate_gap: float
    operator_residual: Optional[float] = None
    boundary_residual: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def integral_residual(model: SystemModel, schedule: ControlSchedule, cache: MatExpCache,
                      x: Trajectory, check_domain: bool = True) -> float:
    """
    max_j ||x_j - x~_j|| with x~_j = e^{dt A}(x~_{j-1} + dt (g(x_{j-1}) + u(t_{j-1}))),
    x~_0 = x_0. Always the rectangle rule.
    """
    grid = cache.grid
    samples = x.samples
    if check_domain:
        model.check_domain(samples, iteration=x.iteration)
    with np.errstate(all="ignore"):
        f = model.field.value(samples[:-1]) + schedule.sample(grid.nodes[:-1])
    w = grid.dt * f

    E = cache.E_step
    tilde = np.empty_like(samples)
    acc = samples[0].copy()
    tilde[0] = acc
    for j in range(grid.n_steps):
        acc = E @ (acc + w[j])
        tilde[j + 1] = acc
    d = float(np.max(np.linalg.norm(samples[1:] - tilde[1:], axis=1)))
    if not np.isfinite(d):
        raise DivergenceError("Residual is not finite", context={"iteration": x.iteration})
    return d


def variation_of_constants(increments: np.ndarray, cache: MatExpCache,
                            bundle: BoundaryMatrixBundle, bc: BoundaryCondition,
                            homogeneous: bool = False) -> np.ndarray:
    """e^{t_j A}(c + S_j) with S_j the prefix sums of the increments"""
    n = increments.shape[1]
    S = np.empty((increments.shape[0] + 1, n))
    S[0] = 0.0
    np.cumsum(increments, axis=0, out=S[1:])

    if bundle.is_periodic:
        c = bundle.M0_inv_factor @ S[-1]
    else:
        beta = np.zeros(n) if homogeneous else bc.beta
        c = bundle.B_tau_inv @ (beta - bc.M1 @ (bundle.E_tau @ S[-1]))
    return np.einsum("jab,jb->ja", cache.E_plus, c + S)


@dataclass(frozen=True, eq=False)
class BVPProblem:
    """Model, input, boundary condition and grid with the precomputed kernels"""

    model: SystemModel
    bc: BoundaryCondition
    schedule: ControlSchedule
    grid: Grid
    cache: MatExpCache
    bundle: BoundaryMatrixBundle
    quadrature: Quadrature
    increments: np.ndarray

    @classmethod
    def build(cls, model: SystemModel, bc: BoundaryCondition, schedule: ControlSchedule,
              grid: Grid, cache: Optional[MatExpCache] = None,
              quadrature: Quadrature = Quadrature.RECTANGLE) -> "BVPProblem":
        if schedule.dimension != model.n or bc.dimension != model.n:
            raise ConfigurationError("Model, schedule and boundary condition disagree on dimension",
                                     context={"n": model.n, "u": schedule.dimension, "bc": bc.dimension})
        if not np.isclose(schedule.tau, grid.tau, rtol=1e-14, atol=0.0):
            raise GridMismatchError("Grid period differs from schedule period",
                                    context={"grid_tau": grid.tau, "schedule_tau": schedule.tau})
        if cache is None:
            cache = MatExpCache.build(model.A, grid)
        elif not cache.grid.same_as(grid) or not np.array_equal(cache.A, model.A):
            raise GridMismatchError("Exponential cache was built for another grid or matrix")

        bundle = boundary_matrices(bc, model.A, grid.tau)
        increments = input_increments(schedule, grid, cache, quadrature)
        get_logger().debug("BVP problem assembled", model=model.name, n_G=grid.n_steps,
                           quadrature=quadrature.value, rcond=f"{bundle.B_tau_rcond:.3e}")
        return cls(model=model, bc=bc, schedule=schedule, grid=grid, cache=cache,
                   bundle=bundle, quadrature=quadrature, increments=increments)

    def _check_grid(self, x: Trajectory):
        if not self.grid.same_as(x.grid):
            raise GridMismatchError(context={"expected": self.grid.n_steps, "got": x.grid.n_steps})

    def F(self, x: Trajectory, check_domain: bool = True) -> Trajectory:
        self._check_grid(x)
        if check_domain:
            self.model.check_domain(x.samples, iteration=x.iteration, what="Iterate")

        if self.model.field.is_zero:
            incr = self.increments
        else:
            with np.errstate(all="ignore"):
                f = self.model.field.value(x.samples[:-1])
            incr = self.grid.dt * np.einsum("jab,jb->ja", self.cache.E_minus[:-1], f) + self.increments

        out = variation_of_constants(incr, self.cache, self.bundle, self.bc)
        if not np.all(np.isfinite(out)):
            raise DivergenceError("F(x) produced non-finite values", context={"iteration": x.iteration + 1})
        if check_domain:
            self.model.check_domain(out, iteration=x.iteration + 1, what="F(x)")
        return Trajectory(out, self.grid, iteration=x.iteration + 1, domain_checked=check_domain)

    def P(self, x: Trajectory, check_domain: bool = True) -> Trajectory:
        fx = self.F(x, check_domain=check_domain)
        return Trajectory(fx.samples - x.samples, self.grid, iteration=x.iteration)

    def integral_residual(self, x: Trajectory, check_domain: bool = True) -> float:
        self._check_grid(x)
        return integral_residual(self.model, self.schedule, self.cache, x, check_domain)

    def residual(self, x: Trajectory, previous: Optional[Trajectory] = None,
                 p_values: Optional[Trajectory] = None, check_domain: bool = True) -> ResidualReport:
        return ResidualReport(
            k=x.iteration,
            d=self.integral_residual(x, check_domain=check_domain),
            periodicity_gap=x.periodicity_gap(),
            iterate_gap=x.distance(previous) if previous is not None else 0.0,
            operator_residual=p_values.sup_norm() if p_values is not None else None,
            boundary_residual=self.bc.residual(x),
        )


def apply_F(model: SystemModel, bc: BoundaryCondition, schedule: ControlSchedule,
            x: Trajectory, grid: Grid, cache: Optional[MatExpCache] = None,
            quadrature: Quadrature = Quadrature.RECTANGLE) -> Trajectory:
    return BVPProblem.build(model, bc, schedule, grid, cache, quadrature).F(x)


def apply_P(model: SystemModel, bc: BoundaryCondition, schedule: ControlSchedule,
            x: Trajectory, grid: Grid, cache: Optional[MatExpCache] = None,
            quadrature: Quadrature = Quadrature.RECTANGLE) -> Trajectory:
    return BVPProblem.build(model, bc, schedule, grid, cache, quadrature).P(x)


def residual_d(traj: Trajectory, model: SystemModel, schedule: ControlSchedule,
               grid: Grid, cache: Optional[MatExpCache] = None,
               bc: Optional[BoundaryCondition] = None) -> ResidualReport:
    """Residual report of a trajectory; the operator residual is left empty"""
    if not traj.grid.same_as(grid):
        raise GridMismatchError(context={"expected": grid.n_steps, "got": traj.grid.n_steps})
    cache = cache or MatExpCache.build(model.A, grid)
    return ResidualReport(
        k=traj.iteration,
        d=integral_residual(model, schedule, cache, traj),
        periodicity_gap=traj.periodicity_gap(),
        iterate_gap=0.0,
        boundary_residual=bc.residual(traj) if bc is not None else None,
    )
