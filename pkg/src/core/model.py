"""
Domain types for the controlled system x' = Ax + g(x) + u(t): the model,
piecewise-constant inputs, affine boundary conditions, grids and sampled
trajectories. All types are immutable after construction.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .matops import spectral_norm
from .nonlinearities import NonlinearField
from ..utils.exceptions import ConfigurationError, DivergenceError, DomainViolationError


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class BoxDomain:
    """Open axis-aligned box; infinite bounds allowed"""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower, upper = _frozen(self.lower), _frozen(self.upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ConfigurationError("Domain bounds must be vectors of equal length")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower >= upper):
            raise ConfigurationError("Domain needs lower < upper in every coordinate",
                                     context={"lower": lower.tolist(), "upper": upper.tolist()})
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def unbounded(cls, n: int) -> "BoxDomain":
        return cls(np.full(n, -np.inf), np.full(n, np.inf))

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    def inside(self, x: np.ndarray) -> np.ndarray:
        """Elementwise strict membership, shape (...,)"""
        x = np.asarray(x, dtype=float)
        return np.all((x > self.lower) & (x < self.upper), axis=-1)

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(self.inside(x)))

    def contains_box(self, lower: np.ndarray, upper: np.ndarray) -> bool:
        """True if the closed box [lower, upper] lies inside this open box"""
        return bool(np.all(np.asarray(lower) > self.lower) and np.all(np.asarray(upper) < self.upper))

    def first_violation(self, x: np.ndarray) -> Optional[Tuple[int, int]]:
        """(node, coordinate) of the first sample outside D, or None"""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        bad = ~((x > self.lower) & (x < self.upper))
        if not bad.any():
            return None
        node, coord = np.argwhere(bad)[0]
        return int(node), int(coord)


@dataclass(frozen=True, eq=False)
class SystemModel:
    """x' = A x + g(x) + u(t) on the open box D"""

    A: np.ndarray
    field: NonlinearField
    domain: BoxDomain
    lipschitz_bound: Optional[float] = None
    hessian_bound: Optional[float] = None
    name: str = "custom"

    def __post_init__(self):
        A = _frozen(self.A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ConfigurationError("A must be a square matrix", context={"shape": A.shape})
        if not np.all(np.isfinite(A)):
            raise ConfigurationError("A must be finite-valued")
        if self.field.dimension != A.shape[0] or self.domain.dimension != A.shape[0]:
            raise ConfigurationError("A, g and D disagree on the state dimension",
                                     context={"A": A.shape[0], "g": self.field.dimension,
                                              "D": self.domain.dimension})
        for label, bound in (("L", self.lipschitz_bound), ("H_bar", self.hessian_bound)):
            if bound is not None and not (bound >= 0):
                raise ConfigurationError(f"{label} must be nonnegative", context={label: bound})
        object.__setattr__(self, "A", A)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def A_norm(self) -> float:
        return spectral_norm(self.A)

    def in_domain(self, x: np.ndarray) -> bool:
        return self.domain.contains(x)

    def check_domain(self, x: np.ndarray, iteration: Optional[int] = None, what: str = "state"):
        bad = self.domain.first_violation(x)
        if bad is None:
            return
        node, coord = bad
        value = float(np.atleast_2d(x)[node, coord])
        context = {"coordinate": coord, "value": value}
        if np.ndim(x) > 1:
            context["node"] = node
        if iteration is not None:
            context["iteration"] = iteration
        raise DomainViolationError(f"{what} leaves D in coordinate x{coord + 1}", context=context)

    def g(self, x: np.ndarray, check_domain: bool = True) -> np.ndarray:
        if check_domain:
            self.check_domain(x)
        with np.errstate(all="ignore"):
            return self.field.value(x)

    def g_jac(self, x: np.ndarray, check_domain: bool = True) -> np.ndarray:
        if check_domain:
            self.check_domain(x)
        with np.errstate(all="ignore"):
            return self.field.jacobian(x)


@dataclass(frozen=True, eq=False)
class ControlSchedule:
    """Piecewise-constant input: values[i] on [switch_times[i], switch_times[i+1])"""

    switch_times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times, values = _frozen(self.switch_times), _frozen(self.values)
        if times.ndim != 1 or times.shape[0] < 2:
            raise ConfigurationError("Schedule needs at least one interval")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0) or not np.all(np.isfinite(times)):
            raise ConfigurationError("Switch times must start at 0 and increase strictly",
                                     context={"times": times.tolist()})
        if values.ndim != 2 or values.shape[0] != times.shape[0] - 1 or not np.all(np.isfinite(values)):
            raise ConfigurationError("Need one finite input vector per interval",
                                     context={"intervals": times.shape[0] - 1, "values": values.shape})
        object.__setattr__(self, "switch_times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_fractions(cls, tau: float, fractions: Sequence[float], values) -> "ControlSchedule":
        if not (tau > 0) or not np.isfinite(tau):
            raise ConfigurationError("Period must be positive", context={"tau": tau})
        fractions = np.asarray(fractions, dtype=float)
        if fractions.ndim != 1 or fractions.size < 2 or fractions[0] != 0.0 or fractions[-1] != 1.0:
            raise ConfigurationError("Switch fractions must run from 0 to 1",
                                     context={"fractions": fractions.tolist()})
        times = fractions * tau
        times[-1] = tau
        return cls(times, values)

    @classmethod
    def constant(cls, tau: float, value) -> "ControlSchedule":
        return cls.from_fractions(tau, [0.0, 1.0], [np.atleast_1d(np.asarray(value, dtype=float))])

    @property
    def tau(self) -> float:
        return float(self.switch_times[-1])

    @property
    def n_intervals(self) -> int:
        return self.values.shape[0]

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    def interval_index(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0) or np.any(t > self.tau) or not np.all(np.isfinite(t)):
            raise DomainViolationError("Time outside [0, tau]", context={"tau": self.tau})
        idx = np.searchsorted(self.switch_times, t, side="right") - 1
        return np.clip(idx, 0, self.n_intervals - 1)

    def value_at(self, t: float) -> np.ndarray:
        return self.values[int(self.interval_index(t))].copy()

    def sample(self, t: np.ndarray) -> np.ndarray:
        """u at each time in t, shape (len(t), n)"""
        return self.values[self.interval_index(t)]

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.values, axis=1)))

    def integral(self) -> np.ndarray:
        return np.diff(self.switch_times) @ self.values


@dataclass(frozen=True, eq=False)
class BoundaryCondition:
    """M0 x(0) + M1 x(tau) = beta"""

    M0: np.ndarray
    M1: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        M0, M1, beta = _frozen(self.M0), _frozen(self.M1), _frozen(self.beta)
        n = beta.shape[0] if beta.ndim == 1 else -1
        if n < 1 or M0.shape != (n, n) or M1.shape != (n, n):
            raise ConfigurationError("Boundary matrices must be n x n with beta in R^n",
                                     context={"M0": M0.shape, "M1": M1.shape, "beta": beta.shape})
        if not (np.all(np.isfinite(M0)) and np.all(np.isfinite(M1)) and np.all(np.isfinite(beta))):
            raise ConfigurationError("Boundary data must be finite")
        object.__setattr__(self, "M0", M0)
        object.__setattr__(self, "M1", M1)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def periodic(cls, n: int) -> "BoundaryCondition":
        return cls(-np.eye(n), np.eye(n), np.zeros(n))

    @classmethod
    def initial_value(cls, x0) -> "BoundaryCondition":
        x0 = np.asarray(x0, dtype=float)
        n = x0.shape[0]
        return cls(np.eye(n), np.zeros((n, n)), x0)

    @property
    def dimension(self) -> int:
        return self.beta.shape[0]

    @property
    def is_periodic(self) -> bool:
        n = self.dimension
        return (np.array_equal(self.M0, -np.eye(n)) and np.array_equal(self.M1, np.eye(n))
                and not np.any(self.beta))

    @property
    def restricted_norm(self) -> float:
        """Norm of the functional on trajectories vanishing at t = 0"""
        return spectral_norm(self.M1)

    def apply(self, x0: np.ndarray, x_tau: np.ndarray) -> np.ndarray:
        return self.M0 @ x0 + self.M1 @ x_tau

    def residual(self, traj: "Trajectory") -> float:
        return float(np.linalg.norm(self.apply(traj.initial, traj.final_state) - self.beta))


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform partition of [0, tau] into n_steps intervals"""

    tau: float
    n_steps: int
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.tau > 0) or not np.isfinite(self.tau):
            raise ConfigurationError("Grid period must be positive", context={"tau": self.tau})
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ConfigurationError("Grid needs a positive integer step count",
                                     context={"n_G": self.n_steps})
        object.__setattr__(self, "n_steps", int(self.n_steps))
        nodes = np.arange(self.n_steps + 1) * self.dt
        nodes[-1] = self.tau
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def dt(self) -> float:
        return self.tau / self.n_steps

    @property
    def size(self) -> int:
        return self.n_steps + 1

    def same_as(self, other: "Grid") -> bool:
        return self is other or (self.tau == other.tau and self.n_steps == other.n_steps)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples x_j on grid nodes, tagged with the iteration that produced them"""

    samples: np.ndarray
    grid: Grid
    iteration: int = 0
    domain_checked: bool = False

    def __post_init__(self):
        samples = _frozen(self.samples)
        if samples.ndim != 2 or samples.shape[0] != self.grid.size:
            raise ConfigurationError("Trajectory needs one sample per grid node",
                                     context={"nodes": self.grid.size, "shape": samples.shape})
        if not np.all(np.isfinite(samples)):
            node = int(np.argwhere(~np.isfinite(samples))[0][0])
            raise DivergenceError("Trajectory has non-finite samples",
                                  context={"node": node, "iteration": self.iteration})
        if self.iteration < 0:
            raise ConfigurationError("Iteration index must be nonnegative")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def zeros(cls, grid: Grid, n: int) -> "Trajectory":
        return cls(np.zeros((grid.size, n)), grid)

    @classmethod
    def constant(cls, grid: Grid, value) -> "Trajectory":
        value = np.asarray(value, dtype=float)
        return cls(np.broadcast_to(value, (grid.size, value.shape[0])), grid)

    @property
    def dimension(self) -> int:
        return self.samples.shape[1]

    @property
    def initial(self) -> np.ndarray:
        return self.samples[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.samples[-1]

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.samples, axis=1)))

    def distance(self, other: "Trajectory") -> float:
        return float(np.max(np.linalg.norm(self.samples - other.samples, axis=1)))

    def periodicity_gap(self) -> float:
        return float(np.linalg.norm(self.samples[0] - self.samples[-1]))


def eval_control(schedule: ControlSchedule, t: float) -> np.ndarray:
    """u(t), right-continuous, with u(tau) = u^(N)"""
    return schedule.value_at(t)


def eval_g(model: SystemModel, x: np.ndarray) -> np.ndarray:
    return model.g(x)


def eval_g_jac(model: SystemModel, x: np.ndarray) -> np.ndarray:
    return model.g_jac(x)


def in_domain(model: SystemModel, x: np.ndarray) -> bool:
    return model.in_domain(x)
