"""
Convergence certificates: growth bounds of e^{tA}, Lipschitz and Hessian
bounds of g, the contraction factor of the simple iteration and the
Newton-Kantorovich constants with their rate bounds.

Bounds given by the user make a certificate rigorous; sampled bounds are
advisory and flagged as heuristic.
"""

import math
from dataclasses import dataclass, asdict, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .matops import mat_exp, spectral_norm, spectral_norms
from .model import BoundaryCondition, ControlSchedule, Grid, SystemModel, Trajectory
from .operators import boundary_matrices
from ..utils.config import NUMERICS
from ..utils.exceptions import (
    BoundsRejectedError, ConfigurationError, DomainViolationError, DominantLinearizationError,
)
from ..utils.logger import get_logger


class BoundSource(Enum):
    DEFAULT = "default"
    USER = "user"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class GrowthBounds:
    """||e^{tA}|| <= M e^{omega |t|}"""
    M: float
    omega: float
    source: str
    worst_t: float = 0.0
    worst_ratio: float = 0.0


@dataclass(frozen=True)
class BoundEstimate:
    """A Lipschitz or Hessian bound with its provenance and working box"""
    value: float
    provenance: str
    box_lower: Tuple[float, ...] = ()
    box_upper: Tuple[float, ...] = ()
    points: int = 0

    @property
    def heuristic(self) -> bool:
        return self.provenance == BoundSource.SAMPLED.value


def growth_bounds(A: np.ndarray, tau: float, override: Optional[Tuple[float, float]] = None,
                  samples: int = NUMERICS.growth_spot_samples) -> GrowthBounds:
    """Default (1, ||A||); an override is accepted only if it survives the spot check"""
    if override is None:
        M, omega, source = 1.0, max(spectral_norm(A), np.finfo(float).eps), BoundSource.DEFAULT.value
    else:
        M, omega = float(override[0]), float(override[1])
        source = BoundSource.USER.value
        if not (M >= 1.0 and omega > 0.0):
            raise ConfigurationError("Growth bounds need M >= 1 and omega > 0",
                                     context={"M": M, "omega": omega})

    ts = np.linspace(-tau, tau, samples)
    norms = np.array([spectral_norm(mat_exp(A, t)) for t in ts])
    ratios = norms / (M * np.exp(omega * np.abs(ts)))
    worst = int(np.argmax(ratios))
    if ratios[worst] > 1.0 + NUMERICS.growth_slack:
        raise BoundsRejectedError("||e^{tA}|| exceeds M e^{omega|t|}",
                                  context={"M": M, "omega": omega, "t": float(ts[worst]),
                                           "ratio": float(ratios[worst])})
    return GrowthBounds(M=M, omega=omega, source=source,
                        worst_t=float(ts[worst]), worst_ratio=float(ratios[worst]))


def _lattice(model: SystemModel, lower, upper, density: int, seed: Optional[int],
             random_points: int) -> np.ndarray:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != (model.n,) or upper.shape != (model.n,) or np.any(lower > upper):
        raise ConfigurationError("Working box needs n lower <= upper bounds")
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise ConfigurationError("Working box must be bounded")
    if not model.domain.contains_box(lower, upper):
        raise DomainViolationError("Sampling box touches the boundary of D",
                                   context={"lower": lower.tolist(), "upper": upper.tolist()})

    axes = [np.linspace(lo, hi, density) for lo, hi in zip(lower, upper)]
    points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, model.n)
    if random_points > 0:
        rng = np.random.default_rng(seed)
        points = np.vstack([points, rng.uniform(lower, upper, size=(random_points, model.n))])
    return points


def lipschitz_bound(model: SystemModel, lower=None, upper=None, mode: str = "sampled",
                    user_value: Optional[float] = None, density: int = NUMERICS.lattice_density,
                    seed: Optional[int] = None, random_points: int = 0) -> BoundEstimate:
    """L >= sup ||g'|| over the working box"""
    if mode == BoundSource.USER.value:
        if user_value is None or user_value < 0:
            raise ConfigurationError("User Lipschitz bound must be a nonnegative number")
        return BoundEstimate(float(user_value), BoundSource.USER.value,
                             tuple(lower) if lower is not None else (),
                             tuple(upper) if upper is not None else ())
    if model.field.is_zero:
        return BoundEstimate(0.0, BoundSource.USER.value)

    points = _lattice(model, lower, upper, density, seed, random_points)
    value = float(np.max(spectral_norms(model.g_jac(points, check_domain=False))))
    get_logger().debug("Sampled Lipschitz bound", L=value, points=len(points))
    return BoundEstimate(value, BoundSource.SAMPLED.value, tuple(map(float, lower)),
                         tuple(map(float, upper)), len(points))


def hessian_bound(model: SystemModel, lower=None, upper=None, mode: str = "sampled",
                  user_value: Optional[float] = None, density: int = NUMERICS.lattice_density,
                  seed: Optional[int] = None, random_points: int = 0) -> BoundEstimate:
    """H_bar >= max_k ||d^2 g_k|| over the working box"""
    if mode == BoundSource.USER.value:
        if user_value is None or user_value < 0:
            raise ConfigurationError("User Hessian bound must be a nonnegative number")
        return BoundEstimate(float(user_value), BoundSource.USER.value)
    if model.field.is_zero:
        return BoundEstimate(0.0, BoundSource.USER.value)

    points = _lattice(model, lower, upper, density, seed, random_points)
    value = float(np.max(spectral_norms(model.field.hessian(points))))
    return BoundEstimate(value, BoundSource.SAMPLED.value, tuple(map(float, lower)),
                         tuple(map(float, upper)), len(points))


def _growth_factor(omega: float, tau: float) -> float:
    """(e^{omega tau} - 1) / omega"""
    return math.expm1(omega * tau) / omega


@dataclass(frozen=True)
class Theorem1Check:
    a1_ok: bool
    a4_ok: bool
    q: Optional[float]
    B_tau_inv_norm: Optional[float]
    restricted_norm: float
    R_tau: Optional[float]


def check_theorem1(A: np.ndarray, tau: float, bc: BoundaryCondition,
                   M: float, omega: float, L: float) -> Theorem1Check:
    """Contraction factor q of F; a4_ok iff q < 1"""
    try:
        bundle = boundary_matrices(bc, A, tau)
    except DominantLinearizationError:
        return Theorem1Check(False, False, None, None, bc.restricted_norm, None)

    ewt = math.exp(omega * tau)
    q = L * M * _growth_factor(omega, tau) * (1.0 + M * bundle.B_tau_inv_norm * ewt * bundle.restricted_norm)
    return Theorem1Check(True, q < 1.0, q, bundle.B_tau_inv_norm, bundle.restricted_norm, bundle.R_tau)


def phi_L(t: float, n: int, A_norm: float, L: float) -> float:
    """Gronwall bound sqrt(n) e^{(||A|| + L) t} on the fundamental matrix"""
    return math.sqrt(n) * math.exp((A_norm + L) * t)


def check_lemma2(n: int, M: float, L: float, omega: float, A_norm: float,
                 R_tau: float, tau: float) -> Tuple[float, bool]:
    """S of (A5) and whether S < 1"""
    rate = A_norm + L + omega
    S = math.sqrt(n) * M * L * R_tau * math.expm1(rate * tau) / rate
    return S, S < 1.0


@dataclass(frozen=True)
class Rhos:
    rho0: float
    rho1: Optional[float]
    rho2: Optional[float]
    u_sup: float
    g_sup: float


def compute_rhos(model: SystemModel, schedule: ControlSchedule, x0_traj: Trajectory,
                 bounds: GrowthBounds, grid: Grid, L: float, R_tau: float,
                 S: Optional[float] = None, H_bar: Optional[float] = None) -> Rhos:
    """rho0 at x0_traj, rho1 when S < 1, rho2 when H_bar is known"""
    if not x0_traj.grid.same_as(grid):
        raise ConfigurationError("Trajectory is not on the certificate grid")
    M, omega, tau, n = bounds.M, bounds.omega, grid.tau, model.n
    ewt = math.exp(omega * tau)
    common = M * _growth_factor(omega, tau) * (1.0 + M * R_tau * ewt)

    u_sup = schedule.sup_norm()
    g_sup = float(np.max(np.linalg.norm(model.g(x0_traj.samples), axis=1)))
    rho0 = x0_traj.sup_norm() + common * (u_sup + g_sup)

    rho1 = None
    if S is not None and S < 1.0:
        phi = phi_L(tau, n, model.A_norm, L)
        a = L * M * R_tau * _growth_factor(omega, tau) * phi / (1.0 - S)
        denom = model.A_norm + L
        b = L * phi * (phi - math.sqrt(n)) / denom if denom > 0 else 0.0
        rho1 = 1.0 + a + b * (1.0 + a)

    rho2 = math.sqrt(n) * H_bar * common if H_bar is not None else None
    return Rhos(rho0=rho0, rho1=rho1, rho2=rho2, u_sup=u_sup, g_sup=g_sup)


@dataclass(frozen=True)
class KantorovichCheck:
    h: float
    eta: float
    r0: float
    r1: float
    h_ok: bool
    rate_bound_modified: List[float]
    rate_bound_classical: List[float]


def check_theorem2(rho0: float, rho1: float, rho2: float, r: float = math.inf,
                   k_max: int = NUMERICS.rate_bound_terms) -> KantorovichCheck:
    """h, eta, the existence/uniqueness radii and the rate bounds for k = 0..k_max"""
    if min(rho0, rho1, rho2) < 0:
        raise ConfigurationError("Newton-Kantorovich inputs must be nonnegative")
    h = rho0 * rho1 ** 2 * rho2
    eta = rho0 * rho1
    ks = range(k_max + 1)

    if h > 0.5:
        return KantorovichCheck(h, eta, math.inf, math.inf, False, [], [])

    s = math.sqrt(1.0 - 2.0 * h)
    ratio = 2.0 / (1.0 + s)       # (1 - s) / h, finite at h = 0
    base = 1.0 - s
    r0 = ratio * eta
    r1 = (1.0 + s) / h * eta if h > 0 else math.inf
    modified = [eta * ratio * base ** k for k in ks]
    classical = [2.0 ** (1 - k) * (2.0 * h) ** (2 ** k - 1) * eta for k in ks]
    return KantorovichCheck(h, eta, r0, r1, r0 <= r, modified, classical)


@dataclass
class Certificate:
    """Every evaluated constant with its verdicts and provenance"""
    a1_ok: bool
    a4_ok: bool
    a5_ok: bool
    h_ok: bool
    heuristic: bool
    M: float
    omega: float
    growth_source: str
    L: float
    L_provenance: str
    H_bar: Optional[float]
    H_provenance: Optional[str]
    box_lower: Tuple[float, ...]
    box_upper: Tuple[float, ...]
    q: Optional[float] = None
    S: Optional[float] = None
    R_tau: Optional[float] = None
    B_tau_inv_norm: Optional[float] = None
    restricted_norm: Optional[float] = None
    rho0: Optional[float] = None
    rho1: Optional[float] = None
    rho2: Optional[float] = None
    h: Optional[float] = None
    eta: Optional[float] = None
    r0: Optional[float] = None
    r1: Optional[float] = None
    rate_bound_modified: List[float] = field(default_factory=list)
    rate_bound_classical: List[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.a1_ok and self.a4_ok and self.a5_ok and self.h_ok

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


def certify(model: SystemModel, bc: BoundaryCondition, schedule: ControlSchedule, grid: Grid,
            box_lower=None, box_upper=None, growth_override: Optional[Tuple[float, float]] = None,
            L: Optional[float] = None, H_bar: Optional[float] = None, r: float = math.inf,
            x0: Optional[Trajectory] = None, density: int = NUMERICS.lattice_density,
            seed: Optional[int] = None, random_points: int = 0) -> Certificate:
    """Contraction and Newton-Kantorovich conditions for one configuration"""
    logger = get_logger()
    bounds = growth_bounds(model.A, grid.tau, growth_override)

    if L is None and model.lipschitz_bound is not None:
        L = model.lipschitz_bound
    if H_bar is None and model.hessian_bound is not None:
        H_bar = model.hessian_bound
    L_est = lipschitz_bound(model, box_lower, box_upper, mode="user" if L is not None else "sampled",
                            user_value=L, density=density, seed=seed, random_points=random_points)
    if H_bar is not None:
        H_est = hessian_bound(model, mode="user", user_value=H_bar)
    elif model.field.has_hessian:
        H_est = hessian_bound(model, box_lower, box_upper, density=density, seed=seed,
                              random_points=random_points)
    else:
        H_est = None

    t1 = check_theorem1(model.A, grid.tau, bc, bounds.M, bounds.omega, L_est.value)
    cert = Certificate(
        a1_ok=t1.a1_ok, a4_ok=t1.a4_ok, a5_ok=False, h_ok=False,
        heuristic=L_est.heuristic or (H_est is not None and H_est.heuristic),
        M=bounds.M, omega=bounds.omega, growth_source=bounds.source,
        L=L_est.value, L_provenance=L_est.provenance,
        H_bar=H_est.value if H_est else None, H_provenance=H_est.provenance if H_est else None,
        box_lower=tuple(box_lower) if box_lower is not None else (),
        box_upper=tuple(box_upper) if box_upper is not None else (),
        q=t1.q, R_tau=t1.R_tau, B_tau_inv_norm=t1.B_tau_inv_norm, restricted_norm=t1.restricted_norm,
    )
    if not t1.a1_ok or t1.R_tau is None:
        logger.warning("Certificate stops at (A1)", tau=grid.tau)
        return cert

    cert.S, cert.a5_ok = check_lemma2(model.n, bounds.M, L_est.value, bounds.omega,
                                      model.A_norm, t1.R_tau, grid.tau)
    x0 = x0 or Trajectory.zeros(grid, model.n)
    rhos = compute_rhos(model, schedule, x0, bounds, grid, L_est.value, t1.R_tau,
                        cert.S, cert.H_bar)
    cert.rho0, cert.rho1, cert.rho2 = rhos.rho0, rhos.rho1, rhos.rho2

    if rhos.rho1 is not None and rhos.rho2 is not None:
        nk = check_theorem2(rhos.rho0, rhos.rho1, rhos.rho2, r)
        cert.h, cert.eta, cert.r0, cert.r1, cert.h_ok = nk.h, nk.eta, nk.r0, nk.r1, nk.h_ok
        cert.rate_bound_modified = nk.rate_bound_modified
        cert.rate_bound_classical = nk.rate_bound_classical

    logger.info("Certificate evaluated", q=cert.q, S=cert.S, h=cert.h,
                a4_ok=cert.a4_ok, a5_ok=cert.a5_ok, h_ok=cert.h_ok, heuristic=cert.heuristic)
    return cert
