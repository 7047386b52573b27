"""
Dense small-matrix kernels: matrix exponentials, spectral norms, guarded
linear solves and the fundamental matrix of the variational equation.

State dimensions are small (2 to 10), grids are long (up to ~1e5 nodes), so
everything here is vectorized over the node axis and loops only where a
recursion is inherently sequential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Type

import numpy as np
from scipy import linalg

from ..utils.config import NUMERICS
from ..utils.exceptions import (
    ConditioningError, DivergenceError, DomainViolationError, GridMismatchError,
)
from ..utils.logger import get_logger

if TYPE_CHECKING:
    from .model import Grid, SystemModel, Trajectory


def _require_finite(A: np.ndarray, what: str = "matrix") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise DivergenceError(f"Non-finite entries in {what}")
    return A


def mat_exp(A: np.ndarray, t: float = 1.0) -> np.ndarray:
    """e^{tA} by scaling and squaring with a Pade approximant (scipy)."""
    A = _require_finite(A)
    if not math.isfinite(t):
        raise DivergenceError("Non-finite time passed to mat_exp", context={"t": t})
    return linalg.expm(t * A)


def mat_exp_grid(A: np.ndarray, dt: float, n_steps: int) -> np.ndarray:
    """
    Stack of e^{j*dt*A} for j = 0..n_steps.

    Each entry is a product of two directly computed exponentials
    (block and remainder), so the error does not accumulate along the grid.
    """
    A = _require_finite(A)
    n = A.shape[0]
    block = max(1, int(math.isqrt(n_steps)) + 1)
    n_blocks = n_steps // block + 1

    small = np.empty((block, n, n))
    for r in range(block):
        small[r] = linalg.expm((r * dt) * A)
    large = np.empty((n_blocks, n, n))
    for q in range(n_blocks):
        large[q] = linalg.expm((q * block * dt) * A)

    j = np.arange(n_steps + 1)
    return np.matmul(large[j // block], small[j % block])


def spectral_norm(A: np.ndarray) -> float:
    """Largest singular value."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        return float(np.linalg.norm(A))
    return float(np.linalg.norm(A, 2))


def spectral_norms(stack: np.ndarray) -> np.ndarray:
    """Spectral norm of every matrix in a (..., n, n) stack."""
    return np.linalg.norm(np.asarray(stack, dtype=float), ord=2, axis=(-2, -1))


def reciprocal_condition(A: np.ndarray) -> float:
    """1-norm reciprocal condition number, 0 for singular input."""
    A = np.asarray(A, dtype=float)
    try:
        with np.errstate(all="ignore"):
            cond = np.linalg.cond(A, 1)
    except np.linalg.LinAlgError:
        return 0.0
    if not np.isfinite(cond) or cond == 0.0:
        return 0.0
    return float(1.0 / cond)


class LinearSolver:
    """LU factorization that refuses ill-conditioned matrices."""

    def __init__(self, A: np.ndarray, what: str = "matrix",
                 error_cls: Type[ConditioningError] = ConditioningError,
                 threshold: float = NUMERICS.rcond_threshold):
        A = _require_finite(A, what)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ConditioningError(f"{what} must be square", context={"shape": A.shape})
        self.rcond = reciprocal_condition(A)
        if self.rcond < threshold:
            raise error_cls(f"{what} is singular or ill-conditioned",
                            context={"rcond": self.rcond, "threshold": threshold})
        self.matrix = A
        self._lu = linalg.lu_factor(A, check_finite=False)

    def solve(self, B: np.ndarray) -> np.ndarray:
        return linalg.lu_solve(self._lu, np.asarray(B, dtype=float), check_finite=False)

    def inverse(self) -> np.ndarray:
        return self.solve(np.eye(self.matrix.shape[0]))


def solve_linear(A: np.ndarray, B: np.ndarray, what: str = "matrix",
                 error_cls: Type[ConditioningError] = ConditioningError) -> np.ndarray:
    """X with A X = B, guarded by the reciprocal-condition threshold."""
    return LinearSolver(A, what=what, error_cls=error_cls).solve(B)


@dataclass(frozen=True, eq=False)
class MatExpCache:
    """e^{t_j A} and e^{-t_j A} on every grid node, plus the step and period maps."""

    grid: "Grid"
    A: np.ndarray
    E_plus: np.ndarray
    E_minus: np.ndarray
    E_step: np.ndarray
    E_tau: np.ndarray

    @classmethod
    def build(cls, A: np.ndarray, grid: "Grid") -> "MatExpCache":
        A = _require_finite(A, "A")
        E_plus = mat_exp_grid(A, grid.dt, grid.n_steps)
        E_minus = mat_exp_grid(-A, grid.dt, grid.n_steps)
        for arr in (E_plus, E_minus):
            arr.setflags(write=False)
        get_logger().debug("Matrix exponential cache built", n_G=grid.n_steps, n=A.shape[0])
        return cls(grid=grid, A=A, E_plus=E_plus, E_minus=E_minus,
                   E_step=mat_exp(A, grid.dt), E_tau=mat_exp(A, grid.tau))


@dataclass(frozen=True, eq=False)
class FundamentalMatrix:
    """Phi_x(t_j) and its inverse on the grid."""

    grid: "Grid"
    Phi: np.ndarray
    Phi_inv: np.ndarray


def _rk4_propagators(J0: np.ndarray, J1: np.ndarray, h: float):
    """
    One-step RK4 transfer matrices for Phi' = J(t) Phi and the adjoint
    Psi' = -Psi J(t), with J linear between the step endpoints.
    """
    n = J0.shape[-1]
    eye = np.eye(n)
    Jm = 0.5 * (J0 + J1)

    K1 = J0
    K2 = Jm + 0.5 * h * (Jm @ K1)
    K3 = Jm + 0.5 * h * (Jm @ K2)
    K4 = J1 + h * (J1 @ K3)
    forward = eye + (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)

    Q1 = -J0
    Q2 = -Jm - 0.5 * h * (Q1 @ Jm)
    Q3 = -Jm - 0.5 * h * (Q2 @ Jm)
    Q4 = -J1 - h * (Q3 @ J1)
    adjoint = eye + (h / 6.0) * (Q1 + 2.0 * Q2 + 2.0 * Q3 + Q4)
    return forward, adjoint


def fundamental_matrix(model: "SystemModel", x: "Trajectory", grid: "Grid") -> FundamentalMatrix:
    """
    Phi_x for Phi' = (A + g'(x(t))) Phi, Phi(0) = I.

    A constant trajectory gives an autonomous system, solved by exact
    exponentials. Otherwise classical RK4 runs one step per grid interval
    with g' interpolated linearly between nodes, and Phi^{-1} comes from
    the adjoint equation rather than per-node inversion.
    """
    if not grid.same_as(x.grid):
        raise GridMismatchError(context={"expected": grid.n_steps, "got": x.grid.n_steps})

    samples = x.samples
    bad = model.domain.first_violation(samples)
    if bad is not None:
        node, coord = bad
        raise DomainViolationError("Trajectory leaves D while building Phi",
                                   context={"node": node, "coordinate": coord})

    n = model.n
    if np.all(samples == samples[0]):
        J = model.A + model.field.jacobian(samples[0])
        Phi = mat_exp_grid(J, grid.dt, grid.n_steps)
        Phi_inv = mat_exp_grid(-J, grid.dt, grid.n_steps)
        return FundamentalMatrix(grid=grid, Phi=Phi, Phi_inv=Phi_inv)

    with np.errstate(all="ignore"):
        J = model.A + model.field.jacobian(samples)
        forward, adjoint = _rk4_propagators(J[:-1], J[1:], grid.dt)

    Phi = np.empty((grid.size, n, n))
    Phi_inv = np.empty((grid.size, n, n))
    Phi[0] = np.eye(n)
    Phi_inv[0] = np.eye(n)
    for j in range(grid.n_steps):
        Phi[j + 1] = forward[j] @ Phi[j]
        Phi_inv[j + 1] = Phi_inv[j] @ adjoint[j]

    if not (np.all(np.isfinite(Phi)) and np.all(np.isfinite(Phi_inv))):
        raise DivergenceError("Fundamental matrix integration produced non-finite values")
    return FundamentalMatrix(grid=grid, Phi=Phi, Phi_inv=Phi_inv)
