"""
Non-isothermal reactor case study: parameters, rate nonlinearity and the
five-interval bang-bang input schedule.
"""

from dataclasses import dataclass, asdict
from enum import Enum
from typing import Any, Dict

import numpy as np

from .model import BoxDomain, ControlSchedule, SystemModel
from .nonlinearities import NonlinearField
from ..utils.exceptions import ConfigurationError


class RateForm(Enum):
    """How the reaction-rate term enters each component"""
    SHARED = "shared"   # g_i = k_i e^{-kappa} - r(x)
    SCALED = "scaled"   # g_i = k_i (e^{-kappa} - r(x)), so g(0) = 0


SWITCH_FRACTIONS = (0.0, 0.1, 0.3, 0.5, 0.8, 1.0)


@dataclass(frozen=True)
class ReactorParams:
    """Reactor constants; defaults are the published parameter set"""
    gamma: float = 1.0
    kappa: float = 17.77
    phi1: float = 1.0
    phi2: float = 1.0
    k1: float = 5.819e7
    k2: float = -8.99e5
    u1_max: float = 1.798
    u1_min: float = -1.798
    u2_max: float = 0.06663
    u2_min: float = -0.06663
    rate_form: str = RateForm.SHARED.value

    def __post_init__(self):
        valid_forms = [f.value for f in RateForm]
        if self.rate_form not in valid_forms:
            raise ConfigurationError(f"Unknown rate_form: {self.rate_form}",
                                     context={"valid": valid_forms})
        for name in ("gamma", "kappa", "phi1", "phi2", "k1", "k2",
                     "u1_max", "u1_min", "u2_max", "u2_min"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigurationError(f"Reactor parameter {name} must be finite")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class ReactorField(NonlinearField):
    """
    Rate nonlinearity with r(x) = (x1+1)^gamma exp(-kappa/(x2+1)):
    g_i = k_i e^{-kappa} - w_i r(x), where w_i = 1 for the shared form and
    w_i = k_i for the scaled form.
    """

    kind = "reactor"
    has_hessian = True

    def __init__(self, params: ReactorParams):
        super().__init__(2)
        self.params = params
        e = np.exp(-params.kappa)
        self._offset = np.array([params.k1 * e, params.k2 * e])
        if params.rate_form == RateForm.SCALED.value:
            self._weight = np.array([params.k1, params.k2])
        else:
            self._weight = np.ones(2)

    def _parts(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        a = x[..., 0] + 1.0
        b = x[..., 1] + 1.0
        arr = np.exp(-p.kappa / b)
        return a, b, arr

    def _rate_gradient(self, x):
        p = self.params
        a, b, arr = self._parts(x)
        with np.errstate(all="ignore"):
            r = a ** p.gamma * arr
            r1 = p.gamma * a ** (p.gamma - 1.0) * arr
            r2 = r * p.kappa / b ** 2
        return r, r1, r2

    def value(self, x):
        r, _, _ = self._rate_gradient(x)
        return self._offset - self._weight * r[..., None]

    def jacobian(self, x):
        _, r1, r2 = self._rate_gradient(x)
        grad = np.stack([r1, r2], axis=-1)
        return -self._weight[:, None] * grad[..., None, :]

    def hessian(self, x):
        p = self.params
        a, b, arr = self._parts(x)
        with np.errstate(all="ignore"):
            r = a ** p.gamma * arr
            if p.gamma == 1.0:
                r11 = np.zeros_like(a)
            else:
                r11 = p.gamma * (p.gamma - 1.0) * a ** (p.gamma - 2.0) * arr
            r12 = p.gamma * a ** (p.gamma - 1.0) * arr * p.kappa / b ** 2
            r22 = r * (p.kappa ** 2 / b ** 4 - 2.0 * p.kappa / b ** 3)
        h = np.stack([np.stack([r11, r12], axis=-1), np.stack([r12, r22], axis=-1)], axis=-2)
        return -self._weight[:, None, None] * h[..., None, :, :]

    def describe(self):
        return {"kind": self.kind, "n": 2, "params": self.params.to_dict()}


def build_reactor_model(params: ReactorParams = ReactorParams()) -> SystemModel:
    """A = diag(-phi1, -phi2) with the rate nonlinearity on x1, x2 > -1"""
    return SystemModel(
        A=np.diag([-params.phi1, -params.phi2]),
        field=ReactorField(params),
        domain=BoxDomain(np.array([-1.0, -1.0]), np.array([np.inf, np.inf])),
        name="reactor",
    )


def build_schedule_N5(tau: float, params: ReactorParams = ReactorParams()) -> ControlSchedule:
    """Five-interval bang-bang input switching at (0, .1, .3, .5, .8, 1) * tau"""
    low = np.array([params.u1_max, params.u2_min])
    high = np.array([params.u1_max, params.u2_max])
    values = np.array([low, high, low, -low, -high])
    return ControlSchedule.from_fractions(tau, SWITCH_FRACTIONS, values)
