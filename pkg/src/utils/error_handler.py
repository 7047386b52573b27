"""
Centralized error handling for solver runs
"""

import functools
import time
from typing import Callable, Any, Optional

from .logger import get_logger
from .exceptions import (
    PeriodicSolverError, get_user_friendly_error,
    EXIT_NUMERICAL_FAILURE,
)


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit-code contract"""
    if isinstance(error, PeriodicSolverError):
        return error.exit_code
    return EXIT_NUMERICAL_FAILURE


class ErrorHandler:
    """Logs failures, notifies the user and resolves exit codes"""

    def __init__(self, notification_callback: Optional[Callable[[str, str], None]] = None):
        self.logger = get_logger()
        self.notification_callback = notification_callback

    def handle_error(self,
                     error: Exception,
                     context: str = "",
                     notify_user: bool = True,
                     critical: bool = False) -> int:
        """
        Handle an error with logging and optional user notification

        Args:
            error: The exception that occurred
            context: Where the error occurred (e.g. "solve")
            notify_user: Whether to pass a title/hint pair to the callback
            critical: Whether to also write a crash report

        Returns:
            int: exit code for the failure category
        """
        error_msg = f"{context}: {error}" if context else str(error)

        if critical:
            self.logger.critical(error_msg, exception=error)
            self.logger.create_crash_report(error, {"context": context, "critical": True})
        else:
            self.logger.error(error_msg, exception=error)

        if notify_user and self.notification_callback:
            self._notify_user_of_error(error)

        return exit_code_for(error)

    def _notify_user_of_error(self, error: Exception):
        if isinstance(error, PeriodicSolverError):
            error_info = get_user_friendly_error(error.error_code)
            title = error_info['title']
            message = f"{error}\nHint: {error_info['solution']}"
        else:
            title = "Unexpected Error"
            message = f"{type(error).__name__}: {error}"

        self.notification_callback(title, message)


def log_performance(operation_name: str = ""):
    """
    Decorator that logs function execution time

    Args:
        operation_name: Custom name for the operation (defaults to function name)
    """
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            logger = get_logger()
            start_time = time.perf_counter()
            operation = operation_name or func.__name__

            try:
                result = func(*args, **kwargs)
            except Exception:
                logger.log_performance(f"{operation} (FAILED)", time.perf_counter() - start_time)
                raise
            logger.log_performance(operation, time.perf_counter() - start_time)
            return result

        return wrapper
    return decorator
