#!/usr/bin/env python3
"""
Unit tests for run configuration loading and problem assembly
"""

import unittest
import tempfile
import os
import sys
import json
import math
import shutil
from pathlib import Path

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.core.operators import Quadrature
from src.core.registry import build_boundary, build_grid, build_model, build_schedule, solver_options
from src.core.simple_iteration import DomainPolicy
from src.utils.settings import (
    RunConfig, RunConfigLoader, SolverSpec, ScheduleSpec, SystemSpec, CertificateSpec,
    BoundarySpec, parse_number,
)
from src.utils.exceptions import ConfigurationError

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

TWO_POINT_TOML = """
[system]
name = "inline"
A = [[-2.0, 0.0], [0.0, -3.0]]
nonlinearity = "polynomial"
terms = [[[0.1, [2, 0]]], [[-0.05, [1, 1]]]]
domain_lower = ["-inf", -5.0]
domain_upper = [5.0, "inf"]

[schedule]
kind = "piecewise"
tau = 1.0
fractions = [0.0, 0.5, 1.0]
values = [[1.0, 0.0], [0.0, 1.0]]

[boundary]
kind = "two_point"
M0 = [[1.0, 0.0], [0.0, 0.0]]
M1 = [[0.0, 0.0], [0.0, 1.0]]
beta = [0.2, -0.1]

[certificate]
enabled = true
r = "inf"
"""


class TestSpecSections(unittest.TestCase):
    """Test cases for section validation"""

    def test_defaults(self):
        """Test the reactor benchmark defaults"""
        config = RunConfig()
        self.assertEqual(config.system.name, "reactor")
        self.assertEqual(config.schedule.kind, "bang_bang_5")
        self.assertEqual(config.solver.method, "newton-modified")
        self.assertEqual(config.solver.n_G, 100000)
        self.assertEqual(config.solver.n_I, 9)
        self.assertEqual(config.boundary.kind, "periodic")
        self.assertFalse(config.certificate.enabled)
        self.assertEqual(config.certificate.r, math.inf)

    def test_invalid_choices(self):
        """Test rejection of unknown enum values"""
        with self.assertRaises(ConfigurationError):
            SolverSpec(method="bisection")
        with self.assertRaises(ConfigurationError):
            SolverSpec(quadrature="simpson")
        with self.assertRaises(ConfigurationError):
            SystemSpec(name="pendulum")

    def test_invalid_counts(self):
        """Test grid and iteration counts"""
        with self.assertRaises(ConfigurationError):
            SolverSpec(n_G=0)
        with self.assertRaises(ConfigurationError):
            SolverSpec(n_I=-1)
        with self.assertRaises(ConfigurationError):
            SolverSpec(n_G=True)
        with self.assertRaises(ConfigurationError):
            SolverSpec(tol=0.0)

    def test_schedule_validation(self):
        """Test period and interval checks"""
        with self.assertRaises(ConfigurationError):
            ScheduleSpec(tau=0.0)
        with self.assertRaises(ConfigurationError):
            ScheduleSpec(tau="inf")
        with self.assertRaises(ConfigurationError):
            ScheduleSpec(kind="piecewise", fractions=[0.0, 1.0], values=[[1.0], [2.0]])

    def test_system_validation(self):
        """Test inline and built-in system checks"""
        with self.assertRaises(ConfigurationError):
            SystemSpec(name="inline")
        with self.assertRaises(ConfigurationError):
            SystemSpec(name="reactor", A=[[1.0]])
        with self.assertRaises(ConfigurationError):
            SystemSpec(name="inline", A=[[1.0, 0.0]])

    def test_certificate_validation(self):
        """Test that paired certificate settings come together"""
        with self.assertRaises(ConfigurationError):
            CertificateSpec(M=2.0)
        with self.assertRaises(ConfigurationError):
            CertificateSpec(box_lower=[-1.0, -1.0])
        with self.assertRaises(ConfigurationError):
            CertificateSpec(density=1)
        self.assertEqual(CertificateSpec(M=2.0, omega=0.5).growth_override, (2.0, 0.5))
        with self.assertRaises(ConfigurationError):
            BoundarySpec(kind="two_point", M0=[[1.0]])

    def test_parse_number(self):
        """Test numbers, infinity strings and defaults"""
        self.assertEqual(parse_number("inf", "x"), math.inf)
        self.assertEqual(parse_number("-inf", "x"), -math.inf)
        self.assertEqual(parse_number(None, "x", 1.5), 1.5)
        self.assertEqual(parse_number(3, "x"), 3.0)
        with self.assertRaises(ConfigurationError):
            parse_number("three", "x")
        with self.assertRaises(ConfigurationError):
            parse_number(True, "x")
        with self.assertRaises(ConfigurationError):
            parse_number(None, "x")


class TestRunConfigLoader(unittest.TestCase):
    """Test cases for RunConfigLoader"""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.loader = RunConfigLoader()

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def write(self, name, text):
        path = Path(self.temp_dir) / name
        path.write_text(text, encoding="utf-8")
        return path

    def test_load_toml(self):
        """Test a two-point TOML configuration with infinite bounds"""
        config = self.loader.load(self.write("run.toml", TWO_POINT_TOML))
        self.assertEqual(config.system.domain_lower, [-math.inf, -5.0])
        self.assertEqual(config.system.domain_upper, [5.0, math.inf])
        self.assertEqual(config.boundary.beta, [0.2, -0.1])
        self.assertTrue(config.certificate.enabled)

    def test_unknown_keys(self):
        """Test that misspelled keys are rejected"""
        with self.assertRaises(ConfigurationError):
            self.loader.from_dict({"solvr": {}})
        with self.assertRaises(ConfigurationError) as ctx:
            self.loader.from_dict({"solver": {"n_g": 10}})
        self.assertIn("n_G", ctx.exception.context["valid"])
        with self.assertRaises(ConfigurationError):
            self.loader.from_dict({"solver": []})
        with self.assertRaises(ConfigurationError):
            self.loader.from_dict({"oracle": "yes"})

    def test_bad_files(self):
        """Test missing, malformed and wrongly named files"""
        with self.assertRaises(ConfigurationError):
            self.loader.load(Path(self.temp_dir) / "missing.toml")
        with self.assertRaises(ConfigurationError):
            self.loader.load(self.write("broken.toml", "[solver\n"))
        with self.assertRaises(ConfigurationError):
            self.loader.load(self.write("broken.json", "{"))
        with self.assertRaises(ConfigurationError):
            self.loader.load(self.write("run.yaml", "solver: {}"))

    def test_overrides(self):
        """Test that command-line values win and are revalidated"""
        config = self.loader.from_dict({"solver": {"n_G": 1000}})
        config = self.loader.apply_overrides(config, n_G=500, n_I=3, method="simple",
                                             oracle=True, seed=7, out_dir="out")
        self.assertEqual(config.solver.n_G, 500)
        self.assertEqual(config.solver.n_I, 3)
        self.assertEqual(config.solver.method, "simple")
        self.assertTrue(config.oracle)
        self.assertEqual(config.certificate.seed, 7)
        self.assertEqual(config.output.directory, Path("out"))
        with self.assertRaises(ConfigurationError):
            self.loader.apply_overrides(config, n_G=0)

    def test_echo_round_trip(self):
        """Test that the JSON echo loads back into an equal config"""
        config = self.loader.load(self.write("run.toml", TWO_POINT_TOML))
        echo = self.loader.to_dict(config)
        self.assertEqual(echo["system"]["domain_lower"][0], "-inf")
        self.assertEqual(echo["certificate"]["r"], "inf")

        path = self.write("echo.json", json.dumps(echo))
        self.assertEqual(self.loader.load(path), config)

    def test_shipped_configs(self):
        """Test that every example configuration loads"""
        for path in sorted(CONFIG_DIR.iterdir()):
            with self.subTest(config=path.name):
                self.loader.load(path)


class TestRegistry(unittest.TestCase):
    """Test cases for building problems from configuration"""

    def setUp(self):
        self.loader = RunConfigLoader()

    def test_inline_two_point(self):
        """Test the inline model, schedule and boundary condition"""
        config = self.loader.load(CONFIG_DIR / "quadratic_two_point.json")
        model = build_model(config.system)
        self.assertEqual(model.n, 2)
        np.testing.assert_allclose(model.g(np.array([1.0, 2.0])), [0.1, -0.1])
        schedule = build_schedule(config.schedule, model)
        self.assertEqual(schedule.n_intervals, 2)
        bc = build_boundary(config.boundary, model.n)
        self.assertFalse(bc.is_periodic)
        grid = build_grid(schedule, config.solver)
        self.assertEqual(grid.n_steps, 5000)

    def test_reactor_defaults(self):
        """Test the reactor with its five-interval input"""
        config = RunConfig()
        model = build_model(config.system)
        schedule = build_schedule(config.schedule, model)
        self.assertEqual(schedule.n_intervals, 5)
        self.assertAlmostEqual(schedule.sup_norm(), 1.79923, places=5)

    def test_reactor_parameter_errors(self):
        """Test unknown reactor parameters"""
        with self.assertRaises(ConfigurationError):
            build_model(SystemSpec(params={"volume": 2.0}))

    def test_dimension_checks(self):
        """Test schedule and boundary dimensions against the model"""
        model = build_model(SystemSpec(name="inline", A=[[-1.0]]))
        with self.assertRaises(ConfigurationError):
            build_schedule(ScheduleSpec(), model)
        with self.assertRaises(ConfigurationError):
            build_schedule(ScheduleSpec(kind="piecewise", fractions=[0.0, 1.0], values=[[1.0, 2.0]]), model)
        with self.assertRaises(ConfigurationError):
            build_boundary(BoundarySpec(kind="two_point", M0=[[1.0, 0.0], [0.0, 1.0]],
                                        M1=[[0.0, 0.0], [0.0, 0.0]], beta=[0.0, 0.0]), model.n)

    def test_solver_options(self):
        """Test the keyword arguments handed to the solvers"""
        options = solver_options(SolverSpec(quadrature="exact_input", domain_policy="final_only", tol=1e-8))
        self.assertEqual(options["quadrature"], Quadrature.EXACT_INPUT)
        self.assertEqual(options["domain_policy"], DomainPolicy.FINAL_ONLY)
        self.assertEqual(options["tol"], 1e-8)


if __name__ == '__main__':
    unittest.main()
