"""
Custom exception classes for the periodic BVP solver
"""

from typing import Optional, Dict, Any

# Exit-code categories shared with the command-line front end
EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_ASSUMPTION_FAILURE = 2
EXIT_NUMERICAL_FAILURE = 3


class PeriodicSolverError(Exception):
    """Base exception class for the solver library"""

    exit_code: int = EXIT_NUMERICAL_FAILURE

    def __init__(self, message: str, error_code: Optional[str] = None, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.__class__.__name__
        self.context = context or {}

    def __str__(self):
        base_msg = f"[{self.error_code}] {self.message}"
        if self.context:
            context_str = ", ".join([f"{k}={v}" for k, v in self.context.items()])
            return f"{base_msg} (Context: {context_str})"
        return base_msg

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for logging/serialization"""
        return {
            "error_type": self.__class__.__name__,
            "error_code": self.error_code,
            "message": self.message,
            "context": {k: _plain(v) for k, v in self.context.items()},
            "exit_code": self.exit_code,
        }


def _plain(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if hasattr(value, "tolist"):
        return value.tolist()
    return str(value)


class ConfigurationError(PeriodicSolverError):
    """Raised when a run configuration or model definition is invalid"""

    exit_code = EXIT_USER_ERROR

    def __init__(self, message: str = "Configuration error", **kwargs):
        super().__init__(message, error_code="CONFIG_ERROR", **kwargs)


class DomainViolationError(PeriodicSolverError):
    """Raised when a state (or time) leaves the admissible domain"""

    exit_code = EXIT_ASSUMPTION_FAILURE

    def __init__(self, message: str = "State outside the admissible domain", **kwargs):
        super().__init__(message, error_code="DOMAIN_ERROR", **kwargs)


class ConditioningError(PeriodicSolverError):
    """Raised when a linear system is singular or too ill-conditioned to solve"""

    def __init__(self, message: str = "Matrix is singular or ill-conditioned",
                 error_code: str = "CONDITIONING_ERROR", **kwargs):
        super().__init__(message, error_code=error_code, **kwargs)


class DominantLinearizationError(ConditioningError):
    """Raised when the boundary matrix of the linear part is singular (A1)"""

    exit_code = EXIT_ASSUMPTION_FAILURE

    def __init__(self, message: str = "Dominant linearization violated (A1)", **kwargs):
        super().__init__(message, error_code="A1_VIOLATION", **kwargs)


class MxSingularError(ConditioningError):
    """Raised when the Newton constant matrix M_x cannot be inverted"""

    exit_code = EXIT_ASSUMPTION_FAILURE

    def __init__(self, message: str = "M_x is singular", **kwargs):
        super().__init__(message, error_code="MX_SINGULAR", **kwargs)


class DivergenceError(PeriodicSolverError):
    """Raised when iterates or integrators produce non-finite values"""

    def __init__(self, message: str = "Non-finite values encountered", **kwargs):
        super().__init__(message, error_code="DIVERGENCE_ERROR", **kwargs)


class GridMismatchError(PeriodicSolverError):
    """Raised when two trajectories live on different grids"""

    def __init__(self, message: str = "Trajectory grids do not match", **kwargs):
        super().__init__(message, error_code="GRID_MISMATCH", **kwargs)


class HessianUnavailableError(PeriodicSolverError):
    """Raised when second derivatives are requested from a field without them"""

    exit_code = EXIT_USER_ERROR

    def __init__(self, message: str = "Nonlinearity has no analytic Hessian", **kwargs):
        super().__init__(message, error_code="HESSIAN_UNAVAILABLE", **kwargs)


class ConvergenceError(PeriodicSolverError):
    """Raised when an iterative method fails to reach its tolerance"""

    def __init__(self, message: str = "Iteration did not converge", **kwargs):
        super().__init__(message, error_code="CONVERGENCE_ERROR", **kwargs)


class BoundsRejectedError(PeriodicSolverError):
    """Raised when user-supplied growth bounds fail spot verification"""

    exit_code = EXIT_ASSUMPTION_FAILURE

    def __init__(self, message: str = "Growth bounds rejected", **kwargs):
        super().__init__(message, error_code="BOUNDS_REJECTED", **kwargs)


# Error code mappings for user-facing diagnostics
ERROR_MESSAGES = {
    "CONFIG_ERROR": {
        "title": "Configuration Error",
        "message": "The run configuration is invalid.",
        "solution": "Check the named key against the documented schema and re-run."
    },
    "DOMAIN_ERROR": {
        "title": "Domain Violation",
        "message": "An iterate left the admissible state domain D (assumption A3).",
        "solution": "Shrink the period, start closer to the orbit, or use domain_policy = \"final_only\"."
    },
    "CONDITIONING_ERROR": {
        "title": "Ill-Conditioned System",
        "message": "A linear solve hit a singular or ill-conditioned matrix.",
        "solution": "Inspect the reported rcond; refine the grid or rescale the model."
    },
    "A1_VIOLATION": {
        "title": "Dominant Linearization Violated",
        "message": "The boundary matrix M0 + M1 e^{tau A} is singular (assumption A1).",
        "solution": "Pick a period with no eigenvalue of tau*A on 2*pi*i*Z, or change the boundary condition."
    },
    "MX_SINGULAR": {
        "title": "Newton Matrix Singular",
        "message": "M_x is singular, so the Newton inverse does not exist.",
        "solution": "Run `certify` and check the (A5) verdict; simple iteration may still apply."
    },
    "DIVERGENCE_ERROR": {
        "title": "Divergence",
        "message": "Non-finite values appeared during the computation.",
        "solution": "Reduce the period or use a different initial trajectory."
    },
    "GRID_MISMATCH": {
        "title": "Grid Mismatch",
        "message": "Trajectories were sampled on different grids.",
        "solution": "Build all trajectories from the same Grid instance."
    },
    "HESSIAN_UNAVAILABLE": {
        "title": "Hessian Unavailable",
        "message": "The nonlinearity provides no analytic second derivative.",
        "solution": "Use a built-in or polynomial nonlinearity, or supply H_bar explicitly."
    },
    "CONVERGENCE_ERROR": {
        "title": "No Convergence",
        "message": "The iteration did not reach the requested tolerance.",
        "solution": "Raise the step limit or loosen the tolerance."
    },
    "BOUNDS_REJECTED": {
        "title": "Growth Bounds Rejected",
        "message": "The supplied (M, omega) pair underestimates ||e^{tA}|| (assumption A2).",
        "solution": "Increase M or omega, or drop the override to use the default (1, ||A||)."
    }
}


def get_user_friendly_error(error_code: str) -> Dict[str, str]:
    """Get user-facing message for an error code"""
    return ERROR_MESSAGES.get(error_code, {
        "title": "Unknown Error",
        "message": "An unexpected error occurred.",
        "solution": "Re-run with --debug and inspect the log file."
    })
