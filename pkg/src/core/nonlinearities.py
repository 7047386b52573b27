"""
Nonlinear vector fields g: D -> R^n with analytic derivatives.

Every field evaluates on stacked input of shape (..., n) so whole
trajectories go through one call. Jacobians come back as (..., n, n) with
[k, i] = dg_k/dx_i and Hessians as (..., n, n, n) with [k, i, j].
"""

from abc import ABC, abstractmethod
from typing import Callable, Dict, Any, Optional, Sequence, Tuple

import numpy as np

from ..utils.exceptions import ConfigurationError, HessianUnavailableError


class NonlinearField(ABC):
    """Base class for the nonlinear part of x' = Ax + g(x) + u(t)"""

    kind: str = "abstract"
    has_hessian: bool = False
    is_zero: bool = False

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ConfigurationError("Field dimension must be positive", context={"n": dimension})
        self.dimension = int(dimension)

    @abstractmethod
    def value(self, x: np.ndarray) -> np.ndarray:
        """g(x) for x of shape (..., n)"""

    @abstractmethod
    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """g'(x) for x of shape (..., n)"""

    def hessian(self, x: np.ndarray) -> np.ndarray:
        raise HessianUnavailableError(context={"field": self.kind})

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "n": self.dimension}


class ZeroField(NonlinearField):
    """g = 0, the linear case"""

    kind = "zero"
    has_hessian = True
    is_zero = True

    def value(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (self.dimension,))

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (self.dimension, self.dimension))


class PolynomialField(NonlinearField):
    """
    Polynomial field given as monomial terms per component.

    ``terms[k]`` is a sequence of ``(coef, powers)`` pairs for component k,
    ``powers`` holding one nonnegative integer exponent per state coordinate.
    """

    kind = "polynomial"
    has_hessian = True

    def __init__(self, dimension: int, terms: Sequence[Sequence[Tuple[float, Sequence[int]]]]):
        super().__init__(dimension)
        if len(terms) != dimension:
            raise ConfigurationError("Polynomial needs one term list per component",
                                     context={"n": dimension, "components": len(terms)})

        comps, coefs, powers = [], [], []
        for k, component in enumerate(terms):
            for coef, pw in component:
                pw = np.asarray(pw, dtype=int)
                if pw.shape != (dimension,) or np.any(pw < 0):
                    raise ConfigurationError("Monomial powers must be n nonnegative integers",
                                             context={"component": k, "powers": pw.tolist()})
                if not np.isfinite(coef):
                    raise ConfigurationError("Non-finite polynomial coefficient", context={"component": k})
                comps.append(k)
                coefs.append(float(coef))
                powers.append(pw)

        self.terms = [[(float(c), [int(p) for p in pw]) for c, pw in component] for component in terms]
        self._powers = np.array(powers, dtype=int).reshape(-1, dimension)
        # coefficient matrix C[k, t]
        self._C = np.zeros((dimension, len(coefs)))
        if coefs:
            self._C[np.array(comps), np.arange(len(coefs))] = coefs
        self.is_zero = not np.any(self._C)

    def _monomials(self, x: np.ndarray, powers: np.ndarray) -> np.ndarray:
        return np.prod(x[..., None, :] ** powers, axis=-1)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self._monomials(x, self._powers) @ self._C.T

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        n = self.dimension
        out = np.empty(x.shape + (n,))
        for i in range(n):
            factor = self._powers[:, i]
            lowered = self._powers.copy()
            lowered[:, i] = np.maximum(lowered[:, i] - 1, 0)
            out[..., i] = (self._monomials(x, lowered) * factor) @ self._C.T
        return out

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        n = self.dimension
        out = np.empty(x.shape + (n, n))
        for i in range(n):
            for j in range(i, n):
                pi = self._powers[:, i]
                pj = self._powers[:, j] - (1 if i == j else 0)
                factor = pi * np.maximum(pj, 0)
                lowered = self._powers.copy()
                lowered[:, i] -= 1
                lowered[:, j] -= 1
                lowered = np.maximum(lowered, 0)
                block = (self._monomials(x, lowered) * factor) @ self._C.T
                out[..., i, j] = block
                out[..., j, i] = block
        return out

    def describe(self):
        return {"kind": self.kind, "n": self.dimension, "terms": self.terms}


class CallbackField(NonlinearField):
    """
    Field backed by user callables.

    With ``vectorized=False`` the callables receive single (n,) states and
    stacked input is evaluated row by row.
    """

    kind = "callback"

    def __init__(self, dimension: int,
                 value_fn: Callable[[np.ndarray], np.ndarray],
                 jacobian_fn: Callable[[np.ndarray], np.ndarray],
                 hessian_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 vectorized: bool = False,
                 name: str = "callback"):
        super().__init__(dimension)
        self._value_fn = value_fn
        self._jacobian_fn = jacobian_fn
        self._hessian_fn = hessian_fn
        self.vectorized = vectorized
        self.has_hessian = hessian_fn is not None
        self.name = name

    def _apply(self, fn, x, tail):
        x = np.asarray(x, dtype=float)
        if self.vectorized or x.ndim == 1:
            return np.asarray(fn(x), dtype=float)
        flat = x.reshape(-1, self.dimension)
        rows = np.array([np.asarray(fn(row), dtype=float) for row in flat])
        return rows.reshape(x.shape[:-1] + tail)

    def value(self, x):
        return self._apply(self._value_fn, x, (self.dimension,))

    def jacobian(self, x):
        return self._apply(self._jacobian_fn, x, (self.dimension, self.dimension))

    def hessian(self, x):
        if self._hessian_fn is None:
            raise HessianUnavailableError(context={"field": self.name})
        n = self.dimension
        return self._apply(self._hessian_fn, x, (n, n, n))

    def describe(self):
        return {"kind": self.kind, "n": self.dimension, "name": self.name}
