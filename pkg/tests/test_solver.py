import math
import unittest

import numpy as np
from pydantic import ValidationError

from src.cli.examples import random_pattern
from src.core.curvature_field import potential, residual
from src.core.errors import DomainError, InvalidPatternError, RateEstimationError
from src.core.feasibility import check_exhaustive
from src.core.pattern_graph import PatternGraph
from src.core.solver import (
    FlowConfig,
    Trajectory,
    estimate_rate,
    integrate_flow,
    integrate_flow_radius,
    newton_solve,
    random_initial_k,
    smallest_jacobian_eigenvalue,
)
from tests.patterns import K_TETRA, R_TETRA, single_edge, star, tetrahedron

# constant mode of the tetrahedron Jacobian at the solution
TETRA_LAMBDA_MIN = (8.0 / 9.0) * (2.0 * math.pi / 3.0 - math.sqrt(3.0) / 2.0)


class TestFlowOnTetrahedron(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.graph = tetrahedron()
        cls.trajectory, cls.result = integrate_flow(cls.graph, np.zeros(4))

    def test_reaches_the_standard_tiling(self) -> None:
        self.assertTrue(self.result.converged)
        self.assertEqual(self.result.termination, "tolerance")
        self.assertEqual(self.result.method, "flow")
        np.testing.assert_allclose(self.result.r_star, R_TETRA, rtol=0, atol=1e-8)
        np.testing.assert_allclose(self.result.k_star, K_TETRA, rtol=0, atol=1e-8)
        self.assertLessEqual(self.result.final_residual, 1e-10)

    def test_energy_never_increases(self) -> None:
        energies = np.array(self.trajectory.energies)
        self.assertTrue(np.all(np.diff(energies) <= 1e-10))
        self.assertLess(self.result.energy_drop, 0.0)
        self.assertLessEqual(self.result.max_energy_increase, 1e-10)

    def test_energy_column_matches_direct_quadrature(self) -> None:
        final = potential(self.graph, self.trajectory.states[-1])
        self.assertAlmostEqual(self.trajectory.energies[-1], final, delta=1e-9)

    def test_rate_matches_smallest_eigenvalue(self) -> None:
        self.assertAlmostEqual(self.result.rate_predicted, TETRA_LAMBDA_MIN, places=8)
        self.assertIsNotNone(self.result.rate)
        self.assertLess(abs(self.result.rate - self.result.rate_predicted), 0.2 * self.result.rate_predicted)

    def test_trajectory_is_consistent(self) -> None:
        self.assertEqual(self.trajectory.times[0], 0.0)
        self.assertEqual(len(self.trajectory), self.result.iterations + 1)
        self.assertTrue(np.all(np.diff(self.trajectory.times) > 0.0))
        self.assertAlmostEqual(self.trajectory.times[-1], self.result.time, places=12)
        self.assertAlmostEqual(self.trajectory.residuals[0], residual(self.graph, np.zeros(4)), places=15)


class TestSolvers(unittest.TestCase):
    def test_random_starts_reach_the_same_radii(self) -> None:
        graph = tetrahedron()
        rng = np.random.default_rng(53)
        for trial in range(5):
            k0 = random_initial_k(4, rng)
            self.assertTrue(np.all((k0 >= -3.0) & (k0 <= 3.0)))
            _, flow = integrate_flow(graph, k0)
            newton = newton_solve(graph, k0)
            with self.subTest(trial=trial):
                self.assertTrue(flow.converged)
                self.assertTrue(newton.converged)
                np.testing.assert_allclose(flow.r_star, R_TETRA, rtol=0, atol=1e-8)
                np.testing.assert_allclose(newton.r_star, R_TETRA, rtol=0, atol=1e-8)
                self.assertLess(flow.elapsed_seconds, 30.0)

    def test_newton_is_fast_on_the_tetrahedron(self) -> None:
        result = newton_solve(tetrahedron())
        self.assertTrue(result.converged)
        self.assertEqual(result.method, "newton")
        self.assertLessEqual(result.iterations, 10)
        self.assertLessEqual(result.final_residual, 1e-12)
        np.testing.assert_allclose(result.r_star, R_TETRA, rtol=0, atol=1e-12)
        self.assertAlmostEqual(result.rate_predicted, TETRA_LAMBDA_MIN, places=10)

    def test_radius_form_agrees(self) -> None:
        _, result = integrate_flow_radius(tetrahedron(), np.full(4, math.pi / 4))
        self.assertTrue(result.converged)
        self.assertEqual(result.method, "flow-radius")
        np.testing.assert_allclose(result.r_star, R_TETRA, rtol=0, atol=1e-8)

    def test_euler_integrator(self) -> None:
        config = FlowConfig(integrator="euler", step=0.05, tol=1e-9)
        _, result = integrate_flow(tetrahedron(), np.full(4, 1.5), config)
        self.assertTrue(result.converged)
        np.testing.assert_allclose(result.r_star, R_TETRA, rtol=0, atol=1e-8)

    def test_uniqueness_on_random_feasible_instances(self) -> None:
        rng = np.random.default_rng(59)
        for trial in range(3):
            graph = random_pattern(rng, int(rng.integers(3, 7)), feasible=True)
            endpoints = []
            for _ in range(2):
                _, result = integrate_flow(graph, random_initial_k(graph.n, rng), FlowConfig(max_time=5e3))
                self.assertTrue(result.converged, f"trial {trial}: {result.termination}")
                endpoints.append(result.k_star)
            newton = newton_solve(graph, np.zeros(graph.n))
            with self.subTest(trial=trial):
                np.testing.assert_allclose(endpoints[0], endpoints[1], rtol=0, atol=1e-6)
                self.assertTrue(newton.converged)
                np.testing.assert_allclose(newton.k_star, endpoints[0], rtol=0, atol=1e-6)

    def test_infeasible_instances_do_not_converge(self) -> None:
        rng = np.random.default_rng(61)
        config = FlowConfig(max_time=200.0)
        for trial in range(3):
            graph = random_pattern(rng, int(rng.integers(2, 6)), feasible=False)
            self.assertFalse(check_exhaustive(graph).feasible)
            _, result = integrate_flow(graph, np.zeros(graph.n), config)
            with self.subTest(trial=trial):
                self.assertFalse(result.converged)
                self.assertIn(result.termination, ("max_time", "diverging", "step_underflow"))

    def test_escaping_star_is_diverging(self) -> None:
        config = FlowConfig(max_time=1e3)
        _, result = integrate_flow(star(), np.zeros(4), config)
        self.assertFalse(result.converged)
        self.assertEqual(result.termination, "diverging")
        self.assertLess(result.time, config.max_time)
        self.assertGreater(np.max(np.abs(result.k_star)), config.escape_bound)
        # the X = {c} deficit of 1.5 spread over four vertices
        self.assertGreater(result.final_residual, 0.3)

    def test_saturated_single_edge_creeps(self) -> None:
        _, result = integrate_flow(single_edge(), np.zeros(2), FlowConfig(max_time=50.0))
        self.assertFalse(result.converged)
        self.assertEqual(result.termination, "max_time")
        self.assertAlmostEqual(result.time, 50.0, places=9)
        self.assertGreater(result.final_residual, 1e-10)

    def test_saturated_star_fails_for_newton(self) -> None:
        result = newton_solve(star(), max_iter=30)
        self.assertFalse(result.converged)
        self.assertIn(result.termination, ("max_iter", "stalled", "singular"))

    def test_step_underflow(self) -> None:
        config = FlowConfig(step=1e3, max_halvings=1)
        with self.assertLogs("src.core.solver", level="WARNING"):
            _, result = integrate_flow(tetrahedron(), np.zeros(4), config)
        self.assertEqual(result.termination, "step_underflow")
        self.assertEqual(result.iterations, 0)
        self.assertFalse(result.converged)

    def test_capture_interval(self) -> None:
        trajectory, result = integrate_flow(tetrahedron(), np.zeros(4), FlowConfig(capture_every=1.0))
        self.assertTrue(result.converged)
        gaps = np.diff(trajectory.times)
        self.assertTrue(np.all(gaps[:-1] >= 1.0 - 1e-12))
        self.assertLess(len(trajectory), result.iterations)

    def test_smallest_eigenvalue(self) -> None:
        value = smallest_jacobian_eigenvalue(tetrahedron(), np.full(4, K_TETRA))
        self.assertAlmostEqual(value, TETRA_LAMBDA_MIN, places=12)

    def test_input_errors(self) -> None:
        with self.assertRaises(ValidationError):
            FlowConfig(step=-1.0)
        with self.assertRaises(ValidationError):
            FlowConfig(integrator="leapfrog")
        with self.assertRaises(ValidationError):
            FlowConfig(stall_ratio=1.5)
        with self.assertRaises(DomainError):
            newton_solve(tetrahedron(), tol=0.0)
        with self.assertRaises(DomainError):
            integrate_flow_radius(tetrahedron(), [0.5, 0.5, 0.5, math.pi / 2])
        broken = PatternGraph.build(["a", "b"], [("a", "b", 1.0)], [1.0, 0.0])
        with self.assertRaises(InvalidPatternError):
            integrate_flow(broken, [0.0, 0.0])


class TestEstimateRate(unittest.TestCase):
    @staticmethod
    def _trajectory(times, residuals) -> Trajectory:
        trajectory = Trajectory()
        for t, res in zip(times, residuals):
            trajectory.record(float(t), np.zeros(1), float(res), 0.0)
        return trajectory

    def test_pure_exponential(self) -> None:
        times = np.arange(0.0, 40.0, 0.1)
        rate = estimate_rate(self._trajectory(times, np.exp(-0.7 * times)))
        self.assertAlmostEqual(rate, 0.7, places=10)

    def test_transient_is_ignored(self) -> None:
        times = np.arange(0.0, 60.0, 0.1)
        residuals = 5.0 * np.exp(-3.0 * times) + 1e-3 * np.exp(-0.4 * times)
        rate = estimate_rate(self._trajectory(times, residuals))
        self.assertAlmostEqual(rate, 0.4, places=6)

    def test_too_few_samples(self) -> None:
        times = np.arange(0.0, 12.0, 1.0)
        with self.assertRaisesRegex(RateEstimationError, "too few samples"):
            estimate_rate(self._trajectory(times, np.exp(-1.0 * times)))

    def test_non_decaying_tail(self) -> None:
        times = np.arange(0.0, 30.0, 0.1)
        with self.assertRaisesRegex(RateEstimationError, "non-decaying tail"):
            estimate_rate(self._trajectory(times, np.full(times.shape, 0.5)))
        with self.assertRaisesRegex(RateEstimationError, "non-decaying tail"):
            estimate_rate(self._trajectory([], []))


if __name__ == "__main__":
    unittest.main()
