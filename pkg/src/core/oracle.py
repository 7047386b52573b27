"""
Reference solutions computed independently of the integral operators:
fixed-step RK4 integration restarted at every switch time, a shooting
method on the initial state, and the closed-form periodic initial state
of a linear system evaluated with trapezoid quadrature.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.integrate import trapezoid

from .matops import LinearSolver
from .model import ControlSchedule, Grid, SystemModel, Trajectory
from ..utils.config import NUMERICS
from ..utils.exceptions import (
    ConditioningError, ConfigurationError, ConvergenceError, DivergenceError,
    DomainViolationError, DominantLinearizationError, GridMismatchError,
)
from ..utils.logger import get_logger


@dataclass(frozen=True, eq=False)
class ShootingResult:
    x0_star: np.ndarray
    newton_steps: int
    final_defect: float
    trajectory: Trajectory

    def to_dict(self):
        return {
            "x0_star": self.x0_star.tolist(),
            "newton_steps": self.newton_steps,
            "final_defect": self.final_defect,
        }


def _step_intervals(schedule: ControlSchedule, steps: int) -> np.ndarray:
    """Interval index of every step; fails unless each switch time is a step boundary"""
    positions = schedule.switch_times / schedule.tau * steps
    boundaries = np.rint(positions)
    if not np.allclose(positions, boundaries, rtol=0.0, atol=1e-9 * steps):
        raise ConfigurationError("Step count does not align with the switch times",
                                 context={"steps": steps, "switch_times": schedule.switch_times.tolist()})
    counts = np.diff(boundaries).astype(int)
    if np.any(counts < 1):
        raise ConfigurationError("Every input interval needs at least one step", context={"steps": steps})
    return np.repeat(np.arange(schedule.n_intervals), counts)


def _flow(model: SystemModel, schedule: ControlSchedule, X0: np.ndarray, steps: int) -> np.ndarray:
    """RK4 states of a batch of initial states, shape (steps + 1, batch, n)"""
    h = schedule.tau / steps
    intervals = _step_intervals(schedule, steps)
    A = model.A

    def rhs(x, u):
        return x @ A.T + model.field.value(x) + u

    out = np.empty((steps + 1,) + X0.shape)
    out[0] = x = X0
    with np.errstate(all="ignore"):
        for j in range(steps):
            u = schedule.values[intervals[j]]
            k1 = rhs(x, u)
            k2 = rhs(x + 0.5 * h * k1, u)
            k3 = rhs(x + 0.5 * h * k2, u)
            k4 = rhs(x + h * k3, u)
            x = x + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
            if not np.all(np.isfinite(x)):
                raise DivergenceError("Dense integration produced non-finite values",
                                      context={"t": (j + 1) * h})
            if not np.all(model.domain.inside(x)):
                bad = x[~model.domain.inside(x)][0]
                raise DomainViolationError("Dense integration left the domain",
                                           context={"t": (j + 1) * h, "state": bad.tolist()})
            out[j + 1] = x
    return out


def integrate_dense(model: SystemModel, schedule: ControlSchedule, x0,
                    steps: int = NUMERICS.shooting_steps_per_period) -> Trajectory:
    """x(t; x0) on a uniform grid of `steps` RK4 steps over [0, tau]"""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.n,) or schedule.dimension != model.n:
        raise ConfigurationError("Initial state and input must match the model dimension",
                                 context={"n": model.n, "x0": x0.shape})
    model.check_domain(x0[None, :], what="Initial state")
    states = _flow(model, schedule, x0[None, :], int(steps))[:, 0, :]
    return Trajectory(states, Grid(schedule.tau, int(steps)))


def shooting_solve(model: SystemModel, schedule: ControlSchedule, tau: Optional[float] = None,
                   tol: float = NUMERICS.shooting_tol,
                   steps: int = NUMERICS.shooting_steps_per_period,
                   max_steps: int = NUMERICS.shooting_max_steps,
                   fd_step: float = NUMERICS.shooting_fd_step) -> ShootingResult:
    """
    Newton on x(tau; x0) - x0 = 0 from x0 = 0. Jacobian columns come from
    forward differences, integrated together as one batch.
    """
    if tau is not None and not np.isclose(tau, schedule.tau, rtol=1e-14, atol=0.0):
        raise GridMismatchError("Period differs from schedule period",
                                context={"tau": tau, "schedule_tau": schedule.tau})
    logger = get_logger()
    n = model.n
    x0 = np.zeros(n)
    model.check_domain(x0[None, :], what="Shooting start")
    eye = np.eye(n)

    for step in range(max_steps + 1):
        h = fd_step * np.maximum(1.0, np.abs(x0))
        batch = np.vstack([x0, x0 + np.diag(h)])
        ends = _flow(model, schedule, batch, steps)[-1]
        defect = ends[0] - x0
        norm = float(np.linalg.norm(defect))
        logger.debug("Shooting step", step=step, defect=f"{norm:.3e}")

        if norm <= tol:
            trajectory = integrate_dense(model, schedule, x0, steps)
            logger.info("Shooting converged", steps=step, defect=f"{norm:.3e}")
            return ShootingResult(x0_star=x0, newton_steps=step, final_defect=norm,
                                  trajectory=trajectory)
        if step == max_steps:
            break

        J = (ends[1:] - ends[0]).T / h - eye
        solver = LinearSolver(J, what="shooting Jacobian", error_cls=ConditioningError)
        x0 = x0 - solver.solve(defect)

    raise ConvergenceError("Shooting did not converge", context={"steps": max_steps, "defect": norm})


def linear_periodic_initial_state(A: np.ndarray, schedule: ControlSchedule,
                                  points_per_interval: int = 2001) -> np.ndarray:
    """x(0) = (e^{-tau A} - I)^{-1} int_0^tau e^{-sA} u(s) ds for x' = Ax + u"""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    total = np.zeros(n)
    for i in range(schedule.n_intervals):
        s = np.linspace(schedule.switch_times[i], schedule.switch_times[i + 1], points_per_interval)
        E = linalg.expm(-s[:, None, None] * A)
        total += trapezoid(E @ schedule.values[i], s, axis=0)

    K = linalg.expm(-schedule.tau * A) - np.eye(n)
    return LinearSolver(K, what="e^{-tau A} - I", error_cls=DominantLinearizationError).solve(total)
