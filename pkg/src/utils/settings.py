"""
Run configuration: declarative TOML/JSON files validated into dataclasses
"""

import json
import math
import tomllib
from dataclasses import dataclass, asdict, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .config import APP_CONFIG, BENCHMARK, NUMERICS
from .exceptions import ConfigurationError
from .logger import get_logger


class SystemKind(Enum):
    REACTOR = "reactor"
    INLINE = "inline"


class NonlinearityKind(Enum):
    ZERO = "zero"
    POLYNOMIAL = "polynomial"


class ScheduleKind(Enum):
    BANG_BANG_5 = "bang_bang_5"
    PIECEWISE = "piecewise"


class BoundaryKind(Enum):
    PERIODIC = "periodic"
    TWO_POINT = "two_point"


class SolverMethod(Enum):
    SIMPLE = "simple"
    NEWTON_MODIFIED = "newton-modified"
    NEWTON_CLASSICAL = "newton-classical"


def _choice(value: str, enum_cls, what: str):
    valid = [e.value for e in enum_cls]
    if value not in valid:
        raise ConfigurationError(f"Invalid {what}: {value}", context={"valid": valid})


def parse_number(value: Any, what: str, default: Optional[float] = None) -> float:
    """Float from a number, an "inf"/"-inf" string or null (which takes the default)"""
    if value is None:
        if default is None:
            raise ConfigurationError(f"{what} is required")
        return default
    if isinstance(value, bool):
        raise ConfigurationError(f"{what} must be a number", context={"value": value})
    if isinstance(value, str):
        if value.strip().lower() not in ("inf", "+inf", "-inf", "infinity", "-infinity"):
            raise ConfigurationError(f"{what} must be a number", context={"value": value})
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{what} must be a number", context={"value": value})


def _vector(values: Optional[List[Any]], what: str, default: float) -> Optional[List[float]]:
    if values is None:
        return None
    return [parse_number(v, f"{what}[{i}]", default) for i, v in enumerate(values)]


def _matrix(rows: Optional[List[List[Any]]], what: str) -> Optional[List[List[float]]]:
    if rows is None:
        return None
    out = [[parse_number(v, what) for v in row] for row in rows]
    if not out or any(len(row) != len(out) for row in out):
        raise ConfigurationError(f"{what} must be a nonempty square matrix")
    return out


@dataclass
class SystemSpec:
    """Built-in system with parameter overrides, or an inline matrix and nonlinearity"""
    name: str = SystemKind.REACTOR.value
    params: Dict[str, Any] = field(default_factory=dict)
    A: Optional[List[List[float]]] = None
    nonlinearity: str = NonlinearityKind.ZERO.value
    terms: List[List[List[Any]]] = field(default_factory=list)
    domain_lower: Optional[List[Any]] = None
    domain_upper: Optional[List[Any]] = None
    lipschitz_bound: Optional[float] = None
    hessian_bound: Optional[float] = None

    def __post_init__(self):
        _choice(self.name, SystemKind, "system name")
        _choice(self.nonlinearity, NonlinearityKind, "nonlinearity")
        if self.name == SystemKind.INLINE.value and self.A is None:
            raise ConfigurationError("Inline systems need a matrix A")
        if self.name == SystemKind.REACTOR.value and self.A is not None:
            raise ConfigurationError("The reactor system defines its own A")
        self.A = _matrix(self.A, "A")
        self.domain_lower = _vector(self.domain_lower, "domain_lower", -math.inf)
        self.domain_upper = _vector(self.domain_upper, "domain_upper", math.inf)


@dataclass
class ScheduleSpec:
    """Switch times as fractions of tau with one input vector per interval"""
    kind: str = ScheduleKind.BANG_BANG_5.value
    tau: float = BENCHMARK.table_tau
    fractions: Optional[List[float]] = None
    values: Optional[List[List[float]]] = None

    def __post_init__(self):
        _choice(self.kind, ScheduleKind, "schedule kind")
        self.tau = parse_number(self.tau, "tau")
        if not (self.tau > 0) or not math.isfinite(self.tau):
            raise ConfigurationError("tau must be positive and finite", context={"tau": self.tau})
        if self.kind == ScheduleKind.PIECEWISE.value:
            if self.fractions is None or self.values is None:
                raise ConfigurationError("Piecewise schedules need fractions and values")
            if len(self.values) != len(self.fractions) - 1:
                raise ConfigurationError("Need one input vector per interval",
                                         context={"fractions": len(self.fractions), "values": len(self.values)})


@dataclass
class BoundarySpec:
    """Periodic, or M0 x(0) + M1 x(tau) = beta"""
    kind: str = BoundaryKind.PERIODIC.value
    M0: Optional[List[List[float]]] = None
    M1: Optional[List[List[float]]] = None
    beta: Optional[List[float]] = None

    def __post_init__(self):
        _choice(self.kind, BoundaryKind, "boundary kind")
        if self.kind == BoundaryKind.TWO_POINT.value:
            if self.M0 is None or self.M1 is None or self.beta is None:
                raise ConfigurationError("Two-point boundary conditions need M0, M1 and beta")
            self.M0, self.M1 = _matrix(self.M0, "M0"), _matrix(self.M1, "M1")
            self.beta = [parse_number(v, "beta") for v in self.beta]


@dataclass
class SolverSpec:
    method: str = SolverMethod.NEWTON_MODIFIED.value
    n_G: int = BENCHMARK.n_grid
    n_I: int = BENCHMARK.n_iterations
    tol: Optional[float] = None
    quadrature: str = "rectangle"
    domain_policy: str = "every_iterate"

    def __post_init__(self):
        _choice(self.method, SolverMethod, "solver method")
        if self.quadrature not in ("rectangle", "exact_input"):
            raise ConfigurationError(f"Invalid quadrature: {self.quadrature}")
        if self.domain_policy not in ("every_iterate", "final_only"):
            raise ConfigurationError(f"Invalid domain policy: {self.domain_policy}")
        if isinstance(self.n_G, bool) or not isinstance(self.n_G, int) or self.n_G < 1:
            raise ConfigurationError("n_G must be a positive integer", context={"n_G": self.n_G})
        if isinstance(self.n_I, bool) or not isinstance(self.n_I, int) or self.n_I < 0:
            raise ConfigurationError("n_I must be a nonnegative integer", context={"n_I": self.n_I})
        if self.tol is not None and not (self.tol > 0):
            raise ConfigurationError("tol must be positive", context={"tol": self.tol})


@dataclass
class OutputSpec:
    out_dir: str = "results"
    trajectory_csv: str = APP_CONFIG.trajectory_csv
    report_json: str = APP_CONFIG.run_report_json
    certificate_json: str = APP_CONFIG.certificate_json

    @property
    def directory(self) -> Path:
        return Path(self.out_dir)


@dataclass
class CertificateSpec:
    """Working box D' and optional user bounds; sampled bounds are heuristic"""
    enabled: bool = False
    box_lower: Optional[List[float]] = None
    box_upper: Optional[List[float]] = None
    M: Optional[float] = None
    omega: Optional[float] = None
    L: Optional[float] = None
    H_bar: Optional[float] = None
    r: Any = math.inf
    density: int = NUMERICS.lattice_density
    random_points: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        self.r = parse_number(self.r, "r", math.inf)
        if (self.M is None) != (self.omega is None):
            raise ConfigurationError("Growth bounds need both M and omega")
        self.box_lower = _vector(self.box_lower, "box_lower", None)
        self.box_upper = _vector(self.box_upper, "box_upper", None)
        if (self.box_lower is None) != (self.box_upper is None):
            raise ConfigurationError("Working box needs both box_lower and box_upper")
        if self.density < 2 or self.random_points < 0:
            raise ConfigurationError("Lattice density must be >= 2 and random_points >= 0")

    @property
    def growth_override(self):
        return None if self.M is None else (self.M, self.omega)


@dataclass
class RunConfig:
    """Main configuration container"""
    system: SystemSpec = field(default_factory=SystemSpec)
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    boundary: BoundarySpec = field(default_factory=BoundarySpec)
    solver: SolverSpec = field(default_factory=SolverSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    certificate: CertificateSpec = field(default_factory=CertificateSpec)
    oracle: bool = False


_SECTIONS = {
    "system": SystemSpec,
    "schedule": ScheduleSpec,
    "boundary": BoundarySpec,
    "solver": SolverSpec,
    "output": OutputSpec,
    "certificate": CertificateSpec,
}


def _plain_floats(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else None)
    if isinstance(value, dict):
        return {k: _plain_floats(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_plain_floats(v) for v in value]
    return value


class RunConfigLoader:
    """Reads, validates and echoes run configurations"""

    def __init__(self):
        self.logger = get_logger()

    def load(self, path: Union[str, Path]) -> RunConfig:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"Config file not found: {path}")
        try:
            if path.suffix == ".toml":
                with open(path, 'rb') as f:
                    data = tomllib.load(f)
            elif path.suffix == ".json":
                with open(path, 'r', encoding='utf-8') as f:
                    data = json.load(f)
            else:
                raise ConfigurationError("Config must be a .toml or .json file", context={"path": str(path)})
        except (tomllib.TOMLDecodeError, json.JSONDecodeError, OSError) as e:
            raise ConfigurationError(f"Cannot read config: {e}", context={"path": str(path)})

        config = self.from_dict(data)
        self.logger.info("Configuration loaded", file_path=str(path))
        return config

    def from_dict(self, data: Dict[str, Any]) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigurationError("Config root must be a table")
        unknown = set(data) - set(_SECTIONS) - {"oracle"}
        if unknown:
            raise ConfigurationError(f"Unknown config keys: {sorted(unknown)}")

        sections = {name: self._section(cls, data.get(name, {}), name) for name, cls in _SECTIONS.items()}
        oracle = data.get("oracle", False)
        if not isinstance(oracle, bool):
            raise ConfigurationError("oracle must be true or false")
        return RunConfig(oracle=oracle, **sections)

    def _section(self, cls, data: Any, name: str):
        if not isinstance(data, dict):
            raise ConfigurationError(f"Section [{name}] must be a table")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"Unknown keys in [{name}]: {sorted(unknown)}",
                                     context={"valid": sorted(known)})
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigurationError(f"Invalid [{name}] section: {e}")

    def apply_overrides(self, config: RunConfig, n_G: Optional[int] = None, n_I: Optional[int] = None,
                        method: Optional[str] = None, oracle: Optional[bool] = None,
                        seed: Optional[int] = None, out_dir: Optional[str] = None) -> RunConfig:
        """Command-line flags win over file values; the result is revalidated"""
        solver_changes = {k: v for k, v in (("n_G", n_G), ("n_I", n_I), ("method", method)) if v is not None}
        solver = replace(config.solver, **solver_changes) if solver_changes else config.solver
        certificate = replace(config.certificate, seed=seed) if seed is not None else config.certificate
        output = replace(config.output, out_dir=str(out_dir)) if out_dir is not None else config.output
        return replace(config, solver=solver, certificate=certificate, output=output,
                       oracle=config.oracle if oracle is None else oracle)

    def to_dict(self, config: RunConfig) -> Dict[str, Any]:
        """JSON-safe echo that loads back into an equal config"""
        return _plain_floats(asdict(config))
