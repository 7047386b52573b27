"""
Turns validated run configuration sections into models, schedules,
boundary conditions and grids.
"""

from typing import Callable, Dict, Optional

import numpy as np

from .model import BoundaryCondition, BoxDomain, ControlSchedule, Grid, SystemModel
from .nonlinearities import NonlinearField, PolynomialField, ZeroField
from .operators import Quadrature
from .reactor import ReactorParams, build_reactor_model, build_schedule_N5
from .simple_iteration import DomainPolicy
from ..utils.exceptions import ConfigurationError
from ..utils.settings import (
    BoundaryKind, BoundarySpec, NonlinearityKind, ScheduleKind, ScheduleSpec,
    SolverSpec, SystemKind, SystemSpec,
)


def reactor_params(spec: SystemSpec) -> ReactorParams:
    try:
        return ReactorParams(**spec.params)
    except TypeError as e:
        raise ConfigurationError(f"Invalid reactor parameters: {e}")


def _build_field(spec: SystemSpec, n: int) -> NonlinearField:
    if spec.nonlinearity == NonlinearityKind.ZERO.value:
        return ZeroField(n)
    try:
        terms = [[(float(coef), list(powers)) for coef, powers in component] for component in spec.terms]
    except (TypeError, ValueError):
        raise ConfigurationError("Polynomial terms must be [coef, [powers]] pairs per component")
    return PolynomialField(n, terms)


def _build_reactor(spec: SystemSpec) -> SystemModel:
    model = build_reactor_model(reactor_params(spec))
    if spec.lipschitz_bound is None and spec.hessian_bound is None:
        return model
    return SystemModel(model.A, model.field, model.domain, spec.lipschitz_bound,
                       spec.hessian_bound, name=model.name)


def _build_inline(spec: SystemSpec) -> SystemModel:
    A = np.array(spec.A, dtype=float)
    n = A.shape[0]
    lower = np.array(spec.domain_lower if spec.domain_lower is not None else [-np.inf] * n)
    upper = np.array(spec.domain_upper if spec.domain_upper is not None else [np.inf] * n)
    return SystemModel(A, _build_field(spec, n), BoxDomain(lower, upper),
                       spec.lipschitz_bound, spec.hessian_bound, name="inline")


SYSTEMS: Dict[str, Callable[[SystemSpec], SystemModel]] = {
    SystemKind.REACTOR.value: _build_reactor,
    SystemKind.INLINE.value: _build_inline,
}


def build_model(spec: SystemSpec) -> SystemModel:
    return SYSTEMS[spec.name](spec)


def build_schedule(spec: ScheduleSpec, model: SystemModel,
                   params: Optional[ReactorParams] = None) -> ControlSchedule:
    if spec.kind == ScheduleKind.BANG_BANG_5.value:
        if model.n != 2:
            raise ConfigurationError("The five-interval bang-bang schedule needs n = 2",
                                     context={"n": model.n})
        return build_schedule_N5(spec.tau, params or ReactorParams())
    schedule = ControlSchedule.from_fractions(spec.tau, spec.fractions, spec.values)
    if schedule.dimension != model.n:
        raise ConfigurationError("Input vectors must match the state dimension",
                                 context={"n": model.n, "u": schedule.dimension})
    return schedule


def build_boundary(spec: BoundarySpec, n: int) -> BoundaryCondition:
    if spec.kind == BoundaryKind.PERIODIC.value:
        return BoundaryCondition.periodic(n)
    bc = BoundaryCondition(spec.M0, spec.M1, spec.beta)
    if bc.dimension != n:
        raise ConfigurationError("Boundary condition must match the state dimension",
                                 context={"n": n, "bc": bc.dimension})
    return bc


def build_grid(schedule: ControlSchedule, solver: SolverSpec) -> Grid:
    return Grid(schedule.tau, solver.n_G)


def solver_options(solver: SolverSpec) -> dict:
    return {
        "n_I": solver.n_I,
        "tol": solver.tol,
        "quadrature": Quadrature(solver.quadrature),
        "domain_policy": DomainPolicy(solver.domain_policy),
    }
