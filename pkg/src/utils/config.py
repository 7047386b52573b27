"""
Application configuration and numerical constants
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class AppConfig:
    """Application configuration"""
    app_name: str = "PeriodicBVP"
    app_version: str = "1.0.0"
    trajectory_csv: str = "trajectory.csv"
    run_report_json: str = "run_report.json"
    certificate_json: str = "certificate.json"


@dataclass(frozen=True)
class NumericsConfig:
    """Thresholds shared by the kernels and certificates"""
    rcond_threshold: float = 1e-12
    growth_spot_samples: int = 20
    growth_slack: float = 1e-9
    rate_bound_terms: int = 20
    lattice_density: int = 10
    shooting_tol: float = 1e-10
    shooting_max_steps: int = 50
    shooting_fd_step: float = 1e-7
    shooting_steps_per_period: int = 4000


@dataclass(frozen=True)
class BenchmarkConfig:
    """Reactor benchmark defaults"""
    n_grid: int = 100_000
    n_iterations: int = 9
    table_tau: float = 1.0
    figure_tau: float = 10.0
    figure_iterations: int = 30
    figure_tol: float = 1e-10
    alg1_rel_tol: float = 0.005
    alg2_band_factor: float = 2.0
    alg2_band_last_k: int = 6
    machine_floor: float = 1e-12
    alg1_gap_tol: float = 1e-9
    alg2_gap_tol: float = 1e-12
    figure_residual_tol: float = 1e-8
    figure_gap_tol: float = 1e-9


# Global configuration instances
APP_CONFIG = AppConfig()
NUMERICS = NumericsConfig()
BENCHMARK = BenchmarkConfig()
