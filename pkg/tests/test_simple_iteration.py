#!/usr/bin/env python3
"""
Unit tests for the simple (fixed-point) iteration
"""

import unittest
import os
import sys

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.core.certificates import check_theorem1
from src.core.model import BoundaryCondition, BoxDomain, ControlSchedule, Grid, SystemModel, Trajectory
from src.core.nonlinearities import PolynomialField, ZeroField
from src.core.simple_iteration import DomainPolicy, is_converged, solve_simple
from src.core.operators import ResidualReport
from src.utils.exceptions import ConfigurationError, DomainViolationError, GridMismatchError


class TestSimpleIteration(unittest.TestCase):
    """Test cases for solve_simple"""

    def setUp(self):
        self.grid = Grid(1.0, 1000)
        self.bc = BoundaryCondition.periodic(1)
        self.schedule = ControlSchedule.from_fractions(1.0, [0.0, 0.3, 1.0], [[0.1], [-0.05]])

    def test_linear_second_iterate_equals_first(self):
        """Test that for g = 0 one step reaches the discrete solution"""
        A = np.array([[-1.0, 0.3], [0.0, -2.0]])
        model = SystemModel(A, ZeroField(2), BoxDomain.unbounded(2))
        schedule = ControlSchedule.from_fractions(1.0, [0.0, 0.5, 1.0], [[1.0, 0.0], [0.0, -1.0]])
        result = solve_simple(model, BoundaryCondition.periodic(2), schedule, self.grid,
                              n_I=2, keep_iterates=True)
        x1, x2 = result.iterates[1], result.iterates[2]
        self.assertLessEqual(x2.distance(x1), 1e-14 * (1 + x1.sup_norm()))
        self.assertEqual(len(result.history), 3)
        self.assertEqual(result.method, "simple")

    def test_linear_converges_after_one_iteration(self):
        """Test tolerance mode on a linear system"""
        model = SystemModel(np.array([[-1.0]]), ZeroField(1), BoxDomain.unbounded(1))
        result = solve_simple(model, self.bc, self.schedule, self.grid, n_I=10, tol=1e-10)
        self.assertTrue(result.converged)
        self.assertEqual(result.iterations_run, 1)

    def test_history_contents(self):
        """Test that every iterate gets a full residual report"""
        model = SystemModel(np.array([[-1.0]]), PolynomialField(1, [[(0.05, [2])]]),
                            BoxDomain(np.array([-1.0]), np.array([1.0])))
        result = solve_simple(model, self.bc, self.schedule, self.grid, n_I=4)
        self.assertEqual([r.k for r in result.history], [0, 1, 2, 3, 4])
        self.assertEqual(result.history[0].iterate_gap, 0.0)
        # F(x_k) - x_k is the next iterate gap
        for prev, cur in zip(result.history[:-1], result.history[1:]):
            self.assertAlmostEqual(prev.operator_residual, cur.iterate_gap, places=14)
        self.assertFalse(result.converged)
        self.assertIn("history", result.to_dict())

    def test_contraction_matches_certificate(self):
        """Test that observed gap ratios stay below q + 0.05"""
        model = SystemModel(np.array([[-1.0]]), PolynomialField(1, [[(0.05, [2])]]),
                            BoxDomain(np.array([-1.0]), np.array([1.0])))
        check = check_theorem1(model.A, 1.0, self.bc, M=1.0, omega=1.0, L=0.1)
        self.assertTrue(check.a4_ok)

        x0 = Trajectory.constant(self.grid, [0.5])
        result = solve_simple(model, self.bc, self.schedule, self.grid, n_I=12, initial=x0)
        gaps = [r.iterate_gap for r in result.history[1:]]
        for a, b in zip(gaps[:-1], gaps[1:]):
            if a > 1e-13 and b > 1e-13:
                self.assertLessEqual(b / a, check.q + 0.05)

    def test_domain_violation_every_iterate(self):
        """Test that an iterate leaving D stops the run"""
        model = SystemModel(np.array([[-1.0]]), ZeroField(1), BoxDomain(np.array([-0.5]), np.array([0.5])))
        schedule = ControlSchedule.constant(1.0, [1.0])
        with self.assertRaises(DomainViolationError) as ctx:
            solve_simple(model, self.bc, schedule, self.grid, n_I=3)
        self.assertEqual(ctx.exception.context["iteration"], 1)

    def test_domain_policy_final_only(self):
        """Test that final_only still checks the returned iterate"""
        model = SystemModel(np.array([[-1.0]]), ZeroField(1), BoxDomain(np.array([-0.5]), np.array([0.5])))
        schedule = ControlSchedule.constant(1.0, [1.0])
        with self.assertRaises(DomainViolationError):
            solve_simple(model, self.bc, schedule, self.grid, n_I=3,
                         domain_policy=DomainPolicy.FINAL_ONLY)

    def test_initial_on_other_grid(self):
        """Test that the initial trajectory must use the solver grid"""
        model = SystemModel(np.array([[-1.0]]), ZeroField(1), BoxDomain.unbounded(1))
        with self.assertRaises(GridMismatchError):
            solve_simple(model, self.bc, self.schedule, self.grid,
                         initial=Trajectory.zeros(Grid(1.0, 10), 1))

    def test_iteration_count_validated(self):
        """Test that n_I must be a nonnegative integer and n_I = 0 keeps x^(0)"""
        model = SystemModel(np.array([[-1.0]]), ZeroField(1), BoxDomain.unbounded(1))
        for bad in (-1, 2.5, True):
            with self.subTest(n_I=bad):
                with self.assertRaises(ConfigurationError):
                    solve_simple(model, self.bc, self.schedule, self.grid, n_I=bad)
        result = solve_simple(model, self.bc, self.schedule, self.grid, n_I=np.int64(0))
        self.assertEqual(len(result.history), 1)
        self.assertEqual(result.final.sup_norm(), 0.0)

    def test_is_converged(self):
        """Test the stopping rule"""
        report = ResidualReport(k=0, d=1.0, periodicity_gap=0.0, iterate_gap=0.0, operator_residual=1.0)
        self.assertFalse(is_converged(report, 1e-6))
        self.assertFalse(is_converged(report, None))
        report = ResidualReport(k=2, d=1.0, periodicity_gap=0.0, iterate_gap=1e-8, operator_residual=1.0)
        self.assertTrue(is_converged(report, 1e-6))


if __name__ == '__main__':
    unittest.main()
