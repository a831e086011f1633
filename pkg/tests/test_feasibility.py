import math
import unittest

import numpy as np

from src.cli.examples import get_example, random_pattern
from src.core.errors import EnumerationLimitError, InvalidPatternError, UnknownVertexError
from src.core.feasibility import check_exhaustive, check_flow, critical_scale, slack
from src.core.pattern_graph import PatternGraph
from tests.patterns import single_edge, star, tetrahedron


class TestExhaustive(unittest.TestCase):
    def test_tetrahedron(self) -> None:
        report = check_exhaustive(tetrahedron())
        self.assertTrue(report.feasible)
        self.assertEqual(report.method, "exhaustive")
        self.assertAlmostEqual(report.worst_slack, 4.0 * math.pi / 3.0, places=12)
        self.assertAlmostEqual(report.worst_slack, 4.18879, places=5)
        # singletons and V tie; the smallest index tuple wins
        self.assertEqual(report.witness, ("v1",))
        self.assertAlmostEqual(slack(tetrahedron(), ["v1", "v2", "v3", "v4"]), report.worst_slack, places=12)

    def test_saturated_single_edge(self) -> None:
        report = check_exhaustive(single_edge())
        self.assertFalse(report.feasible)
        self.assertEqual(report.worst_slack, 0.0)
        self.assertEqual(report.witness, ("a", "b"))
        self.assertAlmostEqual(slack(single_edge(), ["a"]), math.pi / 2, places=15)

    def test_star_with_saturated_center(self) -> None:
        graph = star()
        report = check_exhaustive(graph)
        self.assertFalse(report.feasible)
        self.assertAlmostEqual(slack(graph, ["c"]), 0.0, places=14)
        # adding the leaves keeps E(X) and only adds their targets
        self.assertEqual(report.witness, ("c", "l1", "l2", "l3"))
        self.assertAlmostEqual(report.worst_slack, -1.5, places=14)

    def test_near_tie_across_zero_stays_infeasible(self) -> None:
        tiny = 2.0 ** -42
        graph = PatternGraph.build(["a", "b"], [("a", "b", 1.0)], [2.0 - tiny, tiny])
        self.assertEqual(slack(graph, ["a", "b"]), 0.0)
        self.assertAlmostEqual(slack(graph, ["a"]), tiny, delta=1e-20)
        report = check_exhaustive(graph)
        self.assertFalse(report.feasible)
        self.assertEqual(report.worst_slack, 0.0)
        self.assertEqual(report.witness, ("a", "b"))
        self.assertFalse(check_flow(graph, 1e-15).feasible)

    def test_witness_slack_is_recomputed(self) -> None:
        rng = np.random.default_rng(41)
        for _ in range(10):
            graph = random_pattern(rng, int(rng.integers(2, 9)), feasible=bool(rng.integers(0, 2)))
            report = check_exhaustive(graph)
            self.assertTrue(report.witness)
            self.assertAlmostEqual(slack(graph, report.witness), report.worst_slack, delta=1e-10)
            self.assertEqual(report.feasible, report.worst_slack > 0.0)

    def test_refuses_large_graphs(self) -> None:
        names = [f"p{i}" for i in range(25)]
        edges = [(names[i], names[i + 1], 1.0) for i in range(24)]
        with self.assertRaises(EnumerationLimitError):
            check_exhaustive(PatternGraph.build(names, edges, [0.5] * 25))

    def test_invalid_graph(self) -> None:
        with self.assertRaises(InvalidPatternError):
            check_exhaustive(PatternGraph.build(["a"], [], [1.0]))

    def test_slack_unknown_vertex(self) -> None:
        with self.assertRaises(UnknownVertexError):
            slack(tetrahedron(), ["v1", "x"])

    def test_lowering_a_target_keeps_feasibility(self) -> None:
        rng = np.random.default_rng(43)
        for _ in range(10):
            graph = random_pattern(rng, 6, feasible=True)
            targets = list(graph.targets)
            targets[int(rng.integers(0, graph.n))] *= rng.uniform(0.1, 1.0)
            self.assertTrue(check_exhaustive(graph.with_targets(targets)).feasible)

    def test_critical_scale_is_the_boundary(self) -> None:
        graph = tetrahedron()
        scale = critical_scale(graph)
        # X = V binds: 4 pi / (8 pi / 3)
        self.assertAlmostEqual(scale, 1.5, places=12)
        targets = np.array(graph.targets)
        self.assertTrue(check_exhaustive(graph.with_targets(0.999 * scale * targets)).feasible)
        self.assertFalse(check_exhaustive(graph.with_targets(1.001 * scale * targets)).feasible)

    def test_platonic_examples_are_feasible(self) -> None:
        for name in ["tetrahedron", "cube", "octahedron", "icosahedron", "dodecahedron"]:
            with self.subTest(name=name):
                self.assertTrue(check_exhaustive(get_example(name)).feasible)


class TestFlow(unittest.TestCase):
    def test_tetrahedron(self) -> None:
        report = check_flow(tetrahedron(), epsilon=1e-9)
        self.assertTrue(report.feasible)
        self.assertEqual(report.method, "flow")
        self.assertAlmostEqual(slack(tetrahedron(), report.witness), report.worst_slack, places=12)
        self.assertAlmostEqual(report.worst_slack, 4.0 * math.pi / 3.0, places=12)

    def test_saturated_single_edge(self) -> None:
        for epsilon in (1e-12, 1e-6, 0.1):
            with self.subTest(epsilon=epsilon):
                report = check_flow(single_edge(), epsilon)
                self.assertFalse(report.feasible)
                self.assertEqual(set(report.witness), {"a", "b"})
                self.assertLess(report.worst_slack, epsilon)

    def test_rejects_bad_margin(self) -> None:
        for epsilon in (0.0, -1.0, float("nan")):
            with self.subTest(epsilon=epsilon):
                with self.assertRaises(ValueError):
                    check_flow(tetrahedron(), epsilon)

    def test_agrees_with_exhaustive(self) -> None:
        rng = np.random.default_rng(47)
        compared = 0
        for i in range(60):
            n = int(rng.integers(2, 9))
            if i % 3 == 2:
                # unscaled random targets land anywhere relative to the boundary
                graph = random_pattern(rng, n)
                graph = graph.with_targets(rng.uniform(0.1, 4.0, size=n).tolist())
            else:
                graph = random_pattern(rng, n, feasible=bool(i % 2))
            exact = check_exhaustive(graph)
            if abs(exact.worst_slack) <= 1e-9:
                continue
            flow = check_flow(graph, 1e-12)
            compared += 1
            with self.subTest(i=i):
                self.assertEqual(flow.feasible, exact.feasible)
                if not flow.feasible:
                    self.assertLess(slack(graph, flow.witness), 1e-12)
        self.assertGreater(compared, 50)


if __name__ == "__main__":
    unittest.main()
