"""
Logging system for the periodic BVP solver
"""

import json
import logging
import logging.handlers
import os
import sys
import traceback
from datetime import datetime
from pathlib import Path
from typing import Optional, Dict, Any

import numpy as np
import scipy

from .config import APP_CONFIG


def default_log_dir(app_name: str) -> Path:
    """Log directory, overridable through PERIODIC_BVP_LOG_DIR"""
    override = os.environ.get("PERIODIC_BVP_LOG_DIR")
    if override:
        return Path(override)
    return Path.home() / f".{app_name.lower()}" / "logs"


class SolverLogger:
    """Centralized logger with rotating files and context-aware messages"""

    def __init__(self, app_name: str = APP_CONFIG.app_name, debug_mode: bool = False,
                 log_dir: Optional[Path] = None):
        self.app_name = app_name
        self.debug_mode = debug_mode
        self.logger = logging.getLogger(app_name)

        self.log_dir: Optional[Path] = Path(log_dir) if log_dir else default_log_dir(app_name)
        try:
            self.log_dir.mkdir(parents=True, exist_ok=True)
        except OSError:
            # read-only home, sandboxed runs
            self.log_dir = None

        self.setup_logger()

    def setup_logger(self):
        """Configure the logger with file and console handlers"""
        self.logger.setLevel(logging.DEBUG if self.debug_mode else logging.INFO)
        self.logger.handlers.clear()
        self.logger.propagate = False

        detailed_formatter = logging.Formatter(
            '%(asctime)s | %(levelname)-8s | %(name)s:%(lineno)d | %(funcName)s() | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        simple_formatter = logging.Formatter(
            '%(asctime)s | %(levelname)-8s | %(message)s',
            datefmt='%H:%M:%S'
        )

        if self.log_dir is not None:
            file_handler = logging.handlers.RotatingFileHandler(
                self.log_dir / f"{self.app_name.lower()}.log",
                maxBytes=10*1024*1024,  # 10MB
                backupCount=10,
                encoding='utf-8'
            )
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(detailed_formatter)

            error_handler = logging.handlers.RotatingFileHandler(
                self.log_dir / f"{self.app_name.lower()}_errors.log",
                maxBytes=5*1024*1024,  # 5MB
                backupCount=5,
                encoding='utf-8'
            )
            error_handler.setLevel(logging.ERROR)
            error_handler.setFormatter(detailed_formatter)

            self.logger.addHandler(file_handler)
            self.logger.addHandler(error_handler)

        # stdout carries CLI summaries
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.DEBUG if self.debug_mode else logging.WARNING)
        console_handler.setFormatter(simple_formatter)
        self.logger.addHandler(console_handler)

        self.logger.info(f"{self.app_name} {APP_CONFIG.app_version} | numpy {np.__version__} | "
                         f"scipy {scipy.__version__} | debug={self.debug_mode} | logs={self.log_dir}")

    def info(self, message: str, **kwargs):
        """Log info message with optional context"""
        self._log_with_context(logging.INFO, message, **kwargs)

    def warning(self, message: str, **kwargs):
        """Log warning message with optional context"""
        self._log_with_context(logging.WARNING, message, **kwargs)

    def error(self, message: str, exception: Optional[Exception] = None, **kwargs):
        """Log error message with optional exception and context"""
        if exception:
            self._log_with_context(logging.ERROR, f"{message} | Exception: {exception}", **kwargs)
            if self.debug_mode:
                self.logger.error(f"Traceback: {traceback.format_exc()}")
        else:
            self._log_with_context(logging.ERROR, message, **kwargs)

    def critical(self, message: str, exception: Optional[Exception] = None, **kwargs):
        """Log critical message with optional exception and context"""
        if exception:
            self.logger.critical(f"{message} | Exception: {exception}")
            self.logger.critical(f"Traceback: {traceback.format_exc()}")
        else:
            self._log_with_context(logging.CRITICAL, message, **kwargs)

    def debug(self, message: str, **kwargs):
        """Log debug message with optional context"""
        if self.debug_mode:
            self._log_with_context(logging.DEBUG, message, **kwargs)

    def _log_with_context(self, level: int, message: str, **kwargs):
        if kwargs:
            context = " | ".join(f"{k}={_format_value(v)}" for k, v in kwargs.items())
            message = f"{message} | {context}"
        self.logger.log(level, message)

    def log_iteration(self, label: str, report, **kwargs):
        """One line per iterate: the recursion residual, sup ||P(x)|| and the boundary gap"""
        self.info(label, k=report.k, d=report.d, residual=report.operator_residual,
                  gap=report.periodicity_gap, **kwargs)

    def log_performance(self, operation: str, duration: float, **kwargs):
        """Log wall-clock time of an operation"""
        self.info(f"Performance: {operation} took {duration:.3f}s", **kwargs)

    def log_system_info(self) -> Dict[str, Any]:
        """Log system information and return it for run reports"""
        info = system_info()
        self.info("System Information", **info)
        return info

    def create_crash_report(self, exception: Exception, context: Dict[str, Any] = None) -> Optional[Path]:
        """Write a JSON crash report next to the logs"""
        if self.log_dir is None:
            return None

        crash_time = datetime.now().isoformat()
        crash_file = self.log_dir / f"crash_report_{crash_time.replace(':', '-')}.json"
        crash_data = {
            "timestamp": crash_time,
            "exception_type": type(exception).__name__,
            "exception_message": str(exception),
            "traceback": traceback.format_exc(),
            "context": context or {},
            "system_info": system_info(),
        }
        try:
            with open(crash_file, 'w', encoding='utf-8') as f:
                json.dump(crash_data, f, indent=2, ensure_ascii=False, default=str)
            self.critical(f"Crash report created: {crash_file}")
            return crash_file
        except OSError as e:
            self.critical(f"Failed to create crash report: {e}")
            return None


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def system_info() -> Dict[str, Any]:
    """Platform and resource figures for reports"""
    try:
        import platform
        import psutil

        return {
            "platform": platform.platform(),
            "python_version": platform.python_version(),
            "cpu_count": psutil.cpu_count(),
            "memory_gb": round(psutil.virtual_memory().total / (1024**3), 2),
        }
    except Exception:
        return {"error": "Could not gather system info"}


# Global logger instance
_logger_instance: Optional[SolverLogger] = None


def get_logger(debug_mode: bool = False) -> SolverLogger:
    """Get or create the global logger instance"""
    global _logger_instance
    if _logger_instance is None:
        _logger_instance = SolverLogger(debug_mode=debug_mode)
    elif debug_mode and not _logger_instance.debug_mode:
        _logger_instance.debug_mode = True
        _logger_instance.setup_logger()
    return _logger_instance


def setup_global_exception_handler():
    """Setup global exception handler for uncaught exceptions"""
    def handle_exception(exc_type, exc_value, exc_traceback):
        if issubclass(exc_type, KeyboardInterrupt):
            sys.__excepthook__(exc_type, exc_value, exc_traceback)
            return

        logger = get_logger()
        logger.critical("Uncaught exception occurred", exception=exc_value)
        logger.create_crash_report(exc_value, {
            "exception_type": exc_type.__name__,
            "in_main_thread": True
        })

    sys.excepthook = handle_exception
