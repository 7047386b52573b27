#!/usr/bin/env python3
"""
Command-line tests: verbs, output files and exit codes
"""

import argparse
import io
import json
import shutil
import tempfile
import unittest
import os
import sys
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

# Add project root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.ui.cli_app import main, parse_count, parse_grid_count

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

LINEAR_TOML = """
[system]
name = "inline"
A = {A}
nonlinearity = "zero"

[schedule]
kind = "piecewise"
tau = 1.0
fractions = [0.0, 0.5, 1.0]
values = [[1.0, 0.0], [0.0, -1.0]]

[solver]
method = "simple"
n_G = 200
n_I = 2

[certificate]
enabled = true
"""


class TestCli(unittest.TestCase):
    """Test cases for the periodic-bvp command"""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.out_dir = str(Path(self.temp_dir) / "out")

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def write_config(self, A="[[-1.0, 0.0], [0.0, -1.0]]", extra=""):
        path = Path(self.temp_dir) / "run.toml"
        path.write_text(LINEAR_TOML.replace("{A}", A) + extra, encoding="utf-8")
        return str(path)

    def run_cli(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv))
        return code, out.getvalue(), err.getvalue()

    def test_certify_linear_passes(self):
        """Test certify on a stable linear system"""
        code, out, _ = self.run_cli("certify", "--config", self.write_config(), "--out", self.out_dir)
        self.assertEqual(code, 0)
        self.assertIn("q = 0.0", out)
        with open(Path(self.out_dir) / "certificate.json") as f:
            data = json.load(f)
        self.assertTrue(data["passed"])
        self.assertEqual(data["config"]["solver"]["n_G"], 200)

    def test_certify_singular_linearization(self):
        """Test that A = 0 fails the certificate with exit code 2"""
        config = self.write_config(A="[[0.0, 0.0], [0.0, 0.0]]")
        code, _, _ = self.run_cli("certify", "--config", config, "--out", self.out_dir)
        self.assertEqual(code, 2)

    def test_solve_singular_linearization(self):
        """Test that solve reports the violated assumption"""
        config = self.write_config(A="[[0.0, 0.0], [0.0, 0.0]]")
        code, _, err = self.run_cli("solve", "--config", config, "--out", self.out_dir)
        self.assertEqual(code, 2)
        self.assertIn("Dominant Linearization Violated", err)

    def test_unknown_key(self):
        """Test that an unknown config key exits with code 1"""
        config = self.write_config(extra="\n[output]\nfolder = \"x\"\n")
        code, _, err = self.run_cli("solve", "--config", config)
        self.assertEqual(code, 1)
        self.assertIn("Configuration Error", err)

    def test_solve_writes_outputs(self):
        """Test the trajectory CSV and run report of the linear demo"""
        code, out, _ = self.run_cli("solve", "--config", str(CONFIG_DIR / "linear_demo.toml"),
                                    "--out", self.out_dir)
        self.assertEqual(code, 0)
        self.assertIn("converged = True", out)

        with open(Path(self.out_dir) / "trajectory.csv") as f:
            self.assertEqual(f.readline().strip(), "t,x1,x2,x3")
            self.assertEqual(sum(1 for _ in f), 2001)

        with open(Path(self.out_dir) / "run_report.json") as f:
            report = json.load(f)
        self.assertEqual(report["method"], "simple")
        self.assertTrue(report["converged"])
        self.assertTrue(report["certificate"]["passed"])
        self.assertLess(report["oracle"]["closed_form_distance"], 1e-6)
        self.assertLess(report["oracle"]["initial_state_distance"], 1e-6)
        self.assertIn("solve_s", report["timings"])

    def test_solve_method_override(self):
        """Test --method and the grid override"""
        code, _, _ = self.run_cli("solve", "--config", self.write_config(), "--out", self.out_dir,
                                  "--method", "newton-modified", "--n-g", "1e3")
        self.assertEqual(code, 0)
        with open(Path(self.out_dir) / "run_report.json") as f:
            report = json.load(f)
        self.assertEqual(report["method"], "newton-modified")
        self.assertEqual(report["n_G"], 1000)

    def test_bench_informational(self):
        """Test that a reduced benchmark is informational and exits 0"""
        code, out, _ = self.run_cli("bench", "table1", "--n-g", "1000", "--n-i", "2", "--out", self.out_dir)
        self.assertEqual(code, 0)
        self.assertIn("informational run", out)
        with open(Path(self.out_dir) / "table1_report.json") as f:
            self.assertTrue(json.load(f)["informational"])

    def test_usage_errors(self):
        """Test that usage errors exit with code 1"""
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main(["solve"])
            self.assertEqual(ctx.exception.code, 1)
            with self.assertRaises(SystemExit) as ctx:
                main(["bench", "table1", "--seed", "3"])
            self.assertEqual(ctx.exception.code, 1)
            with self.assertRaises(SystemExit) as ctx:
                main(["bench", "table2"])
            self.assertEqual(ctx.exception.code, 1)

    def test_count_ranges(self):
        """Test that negative iteration counts and empty grids are usage errors"""
        for argv in (["bench", "figure1", "--n-g", "1000", "--n-i", "-1"],
                     ["bench", "table1", "--n-i", "-1"],
                     ["bench", "table1", "--n-g", "0"],
                     ["solve", "--config", self.write_config(), "--n-g", "0"]):
            with self.subTest(argv=argv):
                with redirect_stderr(io.StringIO()):
                    with self.assertRaises(SystemExit) as ctx:
                        main(argv)
                self.assertEqual(ctx.exception.code, 1)

    def test_zero_iterations(self):
        """Test that n_I = 0 evaluates the starting trajectory only"""
        code, _, _ = self.run_cli("bench", "table1", "--n-g", "1000", "--n-i", "0", "--out", self.out_dir)
        self.assertEqual(code, 0)
        with open(Path(self.out_dir) / "table1_report.json") as f:
            data = json.load(f)
        self.assertEqual(data["n_G"], 1000)
        for algorithm in data["algorithms"]:
            self.assertEqual([row["k"] for row in algorithm["rows"]], [0])

    def test_parse_count(self):
        """Test count parsing"""
        self.assertEqual(parse_count("1e5"), 100000)
        self.assertEqual(parse_count("10^3"), 1000)
        self.assertEqual(parse_count("42"), 42)
        with self.assertRaises(argparse.ArgumentTypeError):
            parse_count("1.5")
        with self.assertRaises(argparse.ArgumentTypeError):
            parse_count("many")
        with self.assertRaises(argparse.ArgumentTypeError):
            parse_count("-1")
        with self.assertRaises(argparse.ArgumentTypeError):
            parse_count("inf")
        with self.assertRaises(argparse.ArgumentTypeError):
            parse_count("10^-1")
        with self.assertRaises(argparse.ArgumentTypeError):
            parse_grid_count("0")
        self.assertEqual(parse_count("0"), 0)
        self.assertEqual(parse_grid_count("1e3"), 1000)


if __name__ == '__main__':
    unittest.main()
