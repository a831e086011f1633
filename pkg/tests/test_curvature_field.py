import math
import unittest

import numpy as np
from scipy import sparse

from src.cli.examples import random_pattern
from src.core.curvature_field import (
    curvature_bound,
    curvature_vector,
    curvatures,
    curvatures_batch,
    jacobian,
    potential,
    residual,
)
from src.core.errors import DimensionMismatchError, DomainError, InvalidPatternError
from src.core.pattern_graph import PatternGraph
from src.utils.quadrature import integrate_segment
from tests.patterns import K_TETRA, single_edge, tetrahedron

TWO_PI = 2.0 * math.pi


class TestCurvatures(unittest.TestCase):
    def test_tetrahedron_solution_is_a_smooth_tiling(self) -> None:
        graph = tetrahedron()
        state = curvatures(graph, np.full(4, K_TETRA))
        np.testing.assert_allclose(state.L, 2.0 * math.pi / 3.0, rtol=0, atol=1e-12)
        np.testing.assert_allclose(state.alpha, TWO_PI, rtol=0, atol=1e-12)
        np.testing.assert_allclose(state.face_cone, TWO_PI, rtol=0, atol=1e-12)
        self.assertTrue(state.is_smooth(1e-9))
        # four congruent triangles tile the unit sphere
        self.assertAlmostEqual(state.total_area, 4.0 * math.pi, places=11)
        self.assertAlmostEqual(state.gauss_bonnet_defect, 0.0, places=11)

    def test_single_edge(self) -> None:
        state = curvatures(single_edge(), [0.0, 0.0])
        np.testing.assert_allclose(state.L, [1.3510217177, 1.3510217177], rtol=0, atol=1e-9)
        self.assertIsNone(state.face_cone)
        self.assertIsNone(state.gauss_bonnet_defect)
        self.assertFalse(state.is_smooth())

    def test_right_angle_note_stays_at_debug(self) -> None:
        with self.assertLogs("src.core.pattern_graph", level="DEBUG") as logs:
            for _ in range(3):
                curvatures(single_edge(), [0.0, 0.0])
        self.assertEqual({record.levelname for record in logs.records}, {"DEBUG"})

    def test_gauss_bonnet_off_solution(self) -> None:
        rng = np.random.default_rng(3)
        graph = tetrahedron()
        for _ in range(10):
            state = curvatures(graph, rng.uniform(-2.0, 2.0, size=4))
            self.assertAlmostEqual(state.gauss_bonnet_defect, 0.0, places=10)

    def test_lengths_and_totals_follow_cone_angles(self) -> None:
        rng = np.random.default_rng(5)
        graph = random_pattern(rng, 7)
        k = rng.uniform(-3.0, 3.0, size=graph.n)
        state = curvatures(graph, k)
        r = np.arctan(np.exp(-k))
        np.testing.assert_allclose(state.L, state.alpha * np.cos(r), rtol=1e-12)
        np.testing.assert_allclose(state.lengths, state.alpha * np.sin(r), rtol=1e-12)

    def test_relabeling_permutes_curvatures(self) -> None:
        rng = np.random.default_rng(11)
        graph = random_pattern(rng, 6)
        k = rng.uniform(-2.0, 2.0, size=graph.n)
        order = rng.permutation(graph.n)
        shuffled = PatternGraph.build([graph.vertices[i] for i in order], graph.edges,
                                      [graph.targets[i] for i in order])
        np.testing.assert_allclose(curvatures(shuffled, k[order]).L, curvatures(graph, k).L[order],
                                   rtol=1e-14, atol=1e-15)

    def test_curvature_bound_holds(self) -> None:
        rng = np.random.default_rng(17)
        graph = random_pattern(rng, 8)
        bound = curvature_bound(graph)
        for _ in range(50):
            L = curvature_vector(graph, rng.uniform(-6.0, 6.0, size=graph.n))
            self.assertTrue(np.all(L > 0.0))
            self.assertTrue(np.all(L < bound))

    def test_strict_monotonicity(self) -> None:
        rng = np.random.default_rng(19)
        graph = random_pattern(rng, 6)
        for _ in range(50):
            a, b = rng.uniform(-3.0, 3.0, size=(2, graph.n))
            self.assertGreater(float((curvature_vector(graph, a) - curvature_vector(graph, b)) @ (a - b)), 0.0)

    def test_batch_matches_single_evaluation(self) -> None:
        rng = np.random.default_rng(23)
        graph = random_pattern(rng, 5)
        points = rng.uniform(-2.0, 2.0, size=(7, graph.n))
        batch = curvatures_batch(graph, points)
        for row, k in zip(batch, points):
            np.testing.assert_allclose(row, curvatures(graph, k).L, rtol=1e-15, atol=1e-15)

    def test_residual(self) -> None:
        graph = tetrahedron()
        self.assertLess(residual(graph, np.full(4, K_TETRA)), 1e-12)
        expected = float(np.max(np.abs(curvatures(graph, np.zeros(4)).L - 2.0 * math.pi / 3.0)))
        self.assertEqual(residual(graph, np.zeros(4)), expected)

    def test_input_errors(self) -> None:
        with self.assertRaises(DimensionMismatchError):
            curvatures(tetrahedron(), np.zeros(3))
        with self.assertRaises(DomainError):
            curvatures(tetrahedron(), [0.0, 0.0, float("nan"), 0.0])
        broken = PatternGraph.build(["a", "b"], [("a", "b", 2.0)], [1.0, 1.0])
        with self.assertRaises(InvalidPatternError) as ctx:
            curvatures(broken, [0.0, 0.0])
        self.assertTrue(ctx.exception.violations)


class TestJacobian(unittest.TestCase):
    def test_single_edge_block(self) -> None:
        J = jacobian(single_edge(), [0.0, 0.0]).dense()
        expected = np.array([[1.0088441922, -2.0 / 3.0], [-2.0 / 3.0, 1.0088441922]])
        np.testing.assert_allclose(J, expected, rtol=0, atol=1e-9)

    def test_tetrahedron_solution_spectrum(self) -> None:
        J = jacobian(tetrahedron(), np.full(4, K_TETRA)).dense()
        np.testing.assert_array_equal(J, J.T)
        eigenvalues = np.linalg.eigvalsh(J)
        self.assertGreater(eigenvalues[0], 0.0)
        # by symmetry the constant vector is an eigenvector and the rest is threefold
        np.testing.assert_allclose(eigenvalues[1:], eigenvalues[1], rtol=1e-12)

    def test_matches_finite_differences(self) -> None:
        rng = np.random.default_rng(29)
        h = 1e-6
        for trial in range(5):
            graph = random_pattern(rng, 6)
            k = rng.uniform(-2.0, 2.0, size=graph.n)
            J = jacobian(graph, k).dense()
            fd = np.empty_like(J)
            for v in range(graph.n):
                step = np.zeros(graph.n)
                step[v] = h
                fd[:, v] = (curvature_vector(graph, k + step) - curvature_vector(graph, k - step)) / (2 * h)
            with self.subTest(trial=trial):
                np.testing.assert_allclose(J, fd, rtol=1e-5, atol=1e-8)

    def test_structure_at_random_points(self) -> None:
        rng = np.random.default_rng(31)
        graph = random_pattern(rng, 10)
        for _ in range(100):
            J = jacobian(graph, rng.uniform(-4.0, 4.0, size=graph.n)).dense()
            off = J - np.diag(np.diag(J))
            self.assertTrue(np.all(off <= 0.0))
            self.assertTrue(np.all(J.sum(axis=1) > 0.0))
            self.assertGreater(np.linalg.eigvalsh(J)[0], 0.0)

    def test_sparse_and_dense_agree_with_parallel_edges(self) -> None:
        graph = PatternGraph.build(["a", "b", "c"],
                                   [("a", "b", 1.0), ("b", "a", 0.7), ("b", "c", 1.2)],
                                   [1.0, 1.0, 1.0])
        J = jacobian(graph, [0.3, -0.2, 0.1])
        dense = J.dense()
        self.assertTrue(sparse.issparse(J.sparse()))
        np.testing.assert_allclose(J.sparse().toarray(), dense, rtol=1e-15)
        self.assertEqual(dense[0, 2], 0.0)
        self.assertLess(dense[0, 1], 0.0)
        self.assertTrue(sparse.issparse(J.matrix(dense_limit=2)))
        self.assertIsInstance(J.matrix(dense_limit=3), np.ndarray)


class TestPotential(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.rng = np.random.default_rng(37)
        cls.graph = random_pattern(cls.rng, 6)

    def test_zero_at_reference(self) -> None:
        k = self.rng.uniform(-2.0, 2.0, size=self.graph.n)
        self.assertEqual(potential(self.graph, k, reference=k), 0.0)

    def test_gradient_is_curvature_minus_target(self) -> None:
        h = 1e-5
        for _ in range(5):
            k = self.rng.uniform(-2.0, 2.0, size=self.graph.n)
            d = self.rng.normal(size=self.graph.n)
            d /= np.linalg.norm(d)
            fd = (potential(self.graph, k + h * d) - potential(self.graph, k - h * d)) / (2 * h)
            exact = float((curvature_vector(self.graph, k) - self.graph.target_vector) @ d)
            self.assertAlmostEqual(fd, exact, delta=1e-6)

    def test_path_independence(self) -> None:
        for _ in range(5):
            start, end = self.rng.uniform(-2.0, 2.0, size=(2, self.graph.n))
            corner = start.copy()
            corner[: self.graph.n // 2] = end[: self.graph.n // 2]
            two_legs = potential(self.graph, corner, start) + potential(self.graph, end, corner)
            self.assertAlmostEqual(potential(self.graph, end, start), two_legs, delta=1e-9)

    def test_matches_generic_line_integral(self) -> None:
        start, end = self.rng.uniform(-2.0, 2.0, size=(2, self.graph.n))
        target = self.graph.target_vector
        generic = integrate_segment(lambda points: curvatures_batch(self.graph, points) - target,
                                    start, end, 48)
        self.assertAlmostEqual(potential(self.graph, end, start, nodes=48), generic, delta=1e-12)

    def test_decreases_toward_solution(self) -> None:
        graph = tetrahedron()
        solution = np.full(4, K_TETRA)
        self.assertLess(potential(graph, solution), 0.0)
        self.assertGreater(potential(graph, solution + 0.3, reference=solution), 0.0)


if __name__ == "__main__":
    unittest.main()
