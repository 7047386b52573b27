#!/usr/bin/env python3
"""
Unit tests for error handling system
"""

import unittest
import tempfile
import os
import sys
import shutil
from pathlib import Path
from unittest.mock import Mock, patch

# Add project root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.utils.exceptions import (
    PeriodicSolverError, ConfigurationError, DomainViolationError, ConditioningError,
    DominantLinearizationError, MxSingularError, DivergenceError, BoundsRejectedError,
    HessianUnavailableError, get_user_friendly_error,
    EXIT_USER_ERROR, EXIT_ASSUMPTION_FAILURE, EXIT_NUMERICAL_FAILURE,
)
from src.utils.error_handler import ErrorHandler, exit_code_for, log_performance
from src.utils.logger import SolverLogger
from src.core.operators import ResidualReport


class TestCustomExceptions(unittest.TestCase):
    """Test cases for custom exception classes"""

    def test_solver_error_basic(self):
        """Test basic PeriodicSolverError functionality"""
        error = PeriodicSolverError("Test error")
        self.assertEqual(str(error), "[PeriodicSolverError] Test error")
        self.assertEqual(error.error_code, "PeriodicSolverError")

    def test_solver_error_with_context(self):
        """Test PeriodicSolverError with context"""
        error = PeriodicSolverError("Test error", "TEST_CODE", {"iteration": 3, "value": 1.5})
        self.assertIn("TEST_CODE", str(error))
        self.assertIn("iteration=3", str(error))
        self.assertIn("value=1.5", str(error))

    def test_to_dict(self):
        """Test serialization of errors with array context"""
        import numpy as np
        error = DomainViolationError(context={"state": np.array([1.0, 2.0])})
        data = error.to_dict()
        self.assertEqual(data["error_code"], "DOMAIN_ERROR")
        self.assertEqual(data["context"]["state"], [1.0, 2.0])
        self.assertEqual(data["exit_code"], EXIT_ASSUMPTION_FAILURE)

    def test_exit_codes(self):
        """Test the exit-code category of every error class"""
        self.assertEqual(ConfigurationError().exit_code, EXIT_USER_ERROR)
        self.assertEqual(HessianUnavailableError().exit_code, EXIT_USER_ERROR)
        self.assertEqual(DomainViolationError().exit_code, EXIT_ASSUMPTION_FAILURE)
        self.assertEqual(DominantLinearizationError().exit_code, EXIT_ASSUMPTION_FAILURE)
        self.assertEqual(MxSingularError().exit_code, EXIT_ASSUMPTION_FAILURE)
        self.assertEqual(BoundsRejectedError().exit_code, EXIT_ASSUMPTION_FAILURE)
        self.assertEqual(ConditioningError().exit_code, EXIT_NUMERICAL_FAILURE)
        self.assertEqual(DivergenceError().exit_code, EXIT_NUMERICAL_FAILURE)
        self.assertIsInstance(MxSingularError(), ConditioningError)

    def test_get_user_friendly_error(self):
        """Test user-friendly error message retrieval"""
        error_info = get_user_friendly_error("A1_VIOLATION")
        self.assertIn("title", error_info)
        self.assertIn("message", error_info)
        self.assertIn("solution", error_info)

        unknown_error = get_user_friendly_error("UNKNOWN_ERROR")
        self.assertEqual(unknown_error["title"], "Unknown Error")


class TestErrorHandler(unittest.TestCase):
    """Test cases for ErrorHandler class"""

    def setUp(self):
        self.notification_mock = Mock()
        self.error_handler = ErrorHandler(self.notification_mock)

    def test_handle_error_basic(self):
        """Test that handled errors map to their exit codes"""
        result = self.error_handler.handle_error(ConfigurationError("bad key"), "solve")
        self.assertEqual(result, EXIT_USER_ERROR)
        self.notification_mock.assert_called_once()
        title, message = self.notification_mock.call_args[0]
        self.assertEqual(title, "Configuration Error")
        self.assertIn("Hint:", message)

    def test_handle_unexpected_error(self):
        """Test that foreign exceptions count as numerical failures"""
        result = self.error_handler.handle_error(ValueError("boom"))
        self.assertEqual(result, EXIT_NUMERICAL_FAILURE)
        self.assertEqual(self.notification_mock.call_args[0][0], "Unexpected Error")

    def test_handle_error_no_notification(self):
        """Test error handling without user notification"""
        result = self.error_handler.handle_error(DivergenceError(), notify_user=False)
        self.assertEqual(result, EXIT_NUMERICAL_FAILURE)
        self.notification_mock.assert_not_called()

    def test_exit_code_for(self):
        """Test the exit-code mapping helper"""
        self.assertEqual(exit_code_for(BoundsRejectedError()), EXIT_ASSUMPTION_FAILURE)
        self.assertEqual(exit_code_for(RuntimeError()), EXIT_NUMERICAL_FAILURE)


class TestErrorDecorators(unittest.TestCase):
    """Test cases for the performance decorator"""

    def test_log_performance_success(self):
        """Test that the wrapped result is returned and timed"""
        with patch('src.utils.error_handler.get_logger') as get_logger:
            @log_performance("sum")
            def add(x, y):
                return x + y

            self.assertEqual(add(1, 2), 3)
            get_logger.return_value.log_performance.assert_called_once()
            self.assertEqual(get_logger.return_value.log_performance.call_args[0][0], "sum")

    def test_log_performance_failure(self):
        """Test that failures are timed and re-raised"""
        with patch('src.utils.error_handler.get_logger') as get_logger:
            @log_performance()
            def fail():
                raise DivergenceError()

            with self.assertRaises(DivergenceError):
                fail()
            name = get_logger.return_value.log_performance.call_args[0][0]
            self.assertEqual(name, "fail (FAILED)")


class TestLogger(unittest.TestCase):
    """Test cases for logging system"""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_logger_initialization(self):
        """Test logger initialization"""
        logger = SolverLogger("TestApp", debug_mode=True, log_dir=Path(self.temp_dir))
        self.assertEqual(logger.app_name, "TestApp")
        self.assertTrue(logger.debug_mode)
        self.assertTrue((Path(self.temp_dir) / "testapp.log").exists())

    def test_log_dir_override(self):
        """Test the environment override of the log directory"""
        with patch.dict(os.environ, {"PERIODIC_BVP_LOG_DIR": self.temp_dir}):
            logger = SolverLogger("TestApp")
        self.assertEqual(logger.log_dir, Path(self.temp_dir))

    def test_logging_with_context(self):
        """Test logging with context parameters"""
        logger = SolverLogger("TestApp", debug_mode=True, log_dir=Path(self.temp_dir))
        logger.info("Newton iteration", k=1, residual="5.69e-03")
        logger.error("Error message", error_code="TEST_ERROR")
        logger.log_performance("solve", 0.123)
        for handler in logger.logger.handlers:
            handler.flush()
        text = (Path(self.temp_dir) / "testapp.log").read_text(encoding="utf-8")
        self.assertIn("k=1 | residual=5.69e-03", text)
        self.assertIn("Performance: solve took 0.123s", text)

    def test_log_iteration(self):
        """Test the per-iterate line with float formatting"""
        logger = SolverLogger("TestApp", log_dir=Path(self.temp_dir))
        report = ResidualReport(k=2, d=0.000180856, periodicity_gap=1e-14, iterate_gap=0.01,
                                operator_residual=0.00569119)
        logger.log_iteration("Newton iteration", report, method="newton-modified")
        for handler in logger.logger.handlers:
            handler.flush()
        text = (Path(self.temp_dir) / "testapp.log").read_text(encoding="utf-8")
        self.assertIn("Newton iteration | k=2 | d=0.000180856 | residual=0.00569119 | gap=1e-14 "
                      "| method=newton-modified", text)

    def test_crash_report(self):
        """Test that crash reports land next to the logs"""
        logger = SolverLogger("TestApp", log_dir=Path(self.temp_dir))
        path = logger.create_crash_report(DivergenceError(), {"context": "solve"})
        self.assertIsNotNone(path)
        self.assertTrue(path.exists())

    @patch('psutil.virtual_memory')
    @patch('psutil.cpu_count')
    def test_system_info_logging(self, cpu_count, virtual_memory):
        """Test system information logging"""
        cpu_count.return_value = 8
        virtual_memory.return_value = Mock(total=16 * 1024**3)

        logger = SolverLogger("TestApp", log_dir=Path(self.temp_dir))
        info = logger.log_system_info()
        self.assertEqual(info["cpu_count"], 8)
        self.assertEqual(info["memory_gb"], 16.0)


if __name__ == "__main__":
    unittest.main()
