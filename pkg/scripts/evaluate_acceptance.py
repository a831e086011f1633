"""
circleflow - Acceptance Evaluation Script

Runs the acceptance suite at full sample sizes (the unit tests use reduced
sizes with the same tolerances) and prints a summary report:
1. Tetrahedron reproduction from random starts (flow and Newton)
2. Smooth spherical tiling at the tetrahedron solution
3. Closed-form derivatives against central differences
4. Positive bigon area, cross-checked against the geometric construction
5. Gradient structure of the potential and monotone energy along flows
6. Fitted exponential rate against the smallest Jacobian eigenvalue
7. Flow convergence iff the targets are feasible
8. Uniqueness of the converged radii
9. Feasibility checker against hand computation and the flow method

Usage:
    python scripts/evaluate_acceptance.py
    python scripts/evaluate_acceptance.py --verbose  # Show per-criterion details
    python scripts/evaluate_acceptance.py --save     # Write reports/acceptance_report.json
"""

import sys
import math
import json
import time
import logging
import argparse
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple
from datetime import datetime
from dataclasses import dataclass, asdict, field

# Add src to path
sys.path.append(str(Path(__file__).parent.parent))

import numpy as np
from dotenv import load_dotenv

from src.cli.examples import random_pattern
from src.core.bigon_geometry import bigon_kernel, trig_from_k, trig_from_r
from src.core.curvature_field import curvature_vector, curvatures, potential
from src.core.feasibility import check_exhaustive, check_flow
from src.core.pattern_graph import PatternGraph
from src.core.solver import FlowConfig, integrate_flow, newton_solve, random_initial_k
from tests.geometry_oracle import lens_area

# Load environment
load_dotenv()

# Configure logging
logging.basicConfig(
    level=logging.WARNING,  # Suppress solver info logs during evaluation
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

R_TETRA = math.acos(1.0 / 3.0)
K_TETRA = -math.log(math.tan(R_TETRA))
TWO_PI = 2.0 * math.pi


def tetrahedron() -> PatternGraph:
    edges = [("v1", "v2"), ("v2", "v3"), ("v1", "v3"), ("v1", "v4"), ("v2", "v4"), ("v3", "v4")]
    faces = [("e1", "e2", "e3"), ("e4", "e1", "e5"), ("e3", "e6", "e4"), ("e5", "e6", "e2")]
    return PatternGraph.build(["v1", "v2", "v3", "v4"],
                              [(f"e{i}", u, w, math.pi / 3) for i, (u, w) in enumerate(edges, 1)],
                              [2 * math.pi / 3] * 4, faces)


@dataclass
class CriterionResult:
    """Outcome of one acceptance criterion"""
    number: int
    name: str
    passed: bool
    samples: int
    detail: str
    seconds: float
    metrics: Dict[str, float] = field(default_factory=dict)


class AcceptanceEvaluator:
    """Evaluates the solver stack against the acceptance criteria"""

    def __init__(self, seed: int = 2024, verbose: bool = False):
        self.rng = np.random.default_rng(seed)
        self.seed = seed
        self.verbose = verbose
        self.results: List[CriterionResult] = []
        # feasible instance -> converged K endpoints, shared by criteria 7 and 8
        self.endpoints: List[Tuple[PatternGraph, List[np.ndarray]]] = []

    # ==================== CRITERIA ====================

    def tetrahedron_reproduction(self) -> CriterionResult:
        graph = tetrahedron()
        worst_error = 0.0
        slowest = 0.0
        failures = 0
        runs = 20
        for _ in range(runs):
            k0 = random_initial_k(4, self.rng)
            _, flow = integrate_flow(graph, k0)
            newton = newton_solve(graph, k0)
            for result in (flow, newton):
                error = float(np.max(np.abs(result.r_star - R_TETRA)))
                worst_error = max(worst_error, error)
                slowest = max(slowest, result.elapsed_seconds)
                if not result.converged or error > 1e-8 or result.elapsed_seconds > 1.0:
                    failures += 1
        return CriterionResult(
            1, "Tetrahedron reproduction", failures == 0, 2 * runs,
            f"max |r - arccos(1/3)| = {worst_error:.2e}, slowest run {slowest:.3f}s",
            0.0, {"max_error": worst_error, "slowest_seconds": slowest})

    def smoothness(self) -> CriterionResult:
        state = curvatures(tetrahedron(), np.full(4, K_TETRA))
        vertex_gap = float(np.max(np.abs(state.alpha - TWO_PI)))
        face_gap = float(np.max(np.abs(state.face_cone - TWO_PI)))
        return CriterionResult(
            2, "Smooth spherical tiling", max(vertex_gap, face_gap) <= 1e-9, 8,
            f"vertex cone gap {vertex_gap:.2e}, face cone gap {face_gap:.2e}",
            0.0, {"vertex_gap": vertex_gap, "face_gap": face_gap})

    def _random_bigons(self, count: int):
        r1 = self.rng.uniform(0.05, 0.5 * math.pi - 0.05, size=count)
        r2 = self.rng.uniform(0.05, 0.5 * math.pi - 0.05, size=count)
        theta = self.rng.uniform(0.05, 0.5 * math.pi, size=count)
        return r1, r2, theta

    def derivative_fidelity(self) -> CriterionResult:
        count, h = 1000, 1e-6
        r1, r2, theta = self._random_bigons(count)
        k1, k2 = -np.log(np.tan(r1)), -np.log(np.tan(r2))

        def kernel(a, b):
            return bigon_kernel(*trig_from_k(a), *trig_from_k(b), theta)

        exact = kernel(k1, k2)
        plus, minus = kernel(k1 + h, k2), kernel(k1 - h, k2)
        column = (plus["L1"] + plus["L2"] - minus["L1"] - minus["L2"]) / (2 * h)
        plus, minus = kernel(k1, k2 + h), kernel(k1, k2 - h)
        cross = (plus["L1"] - minus["L1"]) / (2 * h)

        def relative(a, b):
            return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-3)))

        cross_err = relative(exact["dL1_dK2"], cross)
        column_err = relative(exact["dL1_dK1"] + exact["dL2_dK1"], column)
        signs = bool(np.all(exact["dL1_dK2"] < 0.0) and np.all(exact["dL1_dK1"] + exact["dL2_dK1"] > 0.0))
        return CriterionResult(
            3, "Derivative fidelity", max(cross_err, column_err) <= 1e-5 and signs, count,
            f"relative error cross {cross_err:.2e}, column {column_err:.2e}, signs {'ok' if signs else 'VIOLATED'}",
            0.0, {"cross_error": cross_err, "column_error": column_err})

    def area_positivity(self) -> CriterionResult:
        r1, r2, theta = self._random_bigons(10_000)
        values = bigon_kernel(*trig_from_r(r1), *trig_from_r(r2), theta)
        positive = bool(np.all(values["area"] > 0.0))
        oracle_gap = max(abs(float(values["area"][i]) - lens_area(r1[i], r2[i], theta[i])) for i in range(100))
        return CriterionResult(
            4, "Gauss-Bonnet positivity", positive and oracle_gap <= 1e-8, 10_000,
            f"min area {float(values['area'].min()):.3e}, oracle gap {oracle_gap:.2e} on 100 samples",
            0.0, {"oracle_gap": oracle_gap})

    def gradient_structure(self) -> CriterionResult:
        h = 1e-5
        worst_fd = 0.0
        worst_increase = 0.0
        instances = 10
        for _ in range(instances):
            graph = random_pattern(self.rng, int(self.rng.integers(2, 9)))
            k = self.rng.uniform(-2.0, 2.0, size=graph.n)
            for v in range(graph.n):
                step = np.zeros(graph.n)
                step[v] = h
                fd = (potential(graph, k + step) - potential(graph, k - step)) / (2 * h)
                exact = curvature_vector(graph, k)[v] - graph.targets[v]
                worst_fd = max(worst_fd, abs(fd - exact))
            trajectory, _ = integrate_flow(graph, random_initial_k(graph.n, self.rng))
            worst_increase = max(worst_increase, float(np.max(np.diff(trajectory.energies), initial=0.0)))
        return CriterionResult(
            5, "Gradient structure", worst_fd <= 1e-6 and worst_increase <= 1e-10, instances,
            f"max |dE - (L - L-hat)| = {worst_fd:.2e}, max energy increase {worst_increase:.2e}",
            0.0, {"gradient_error": worst_fd, "energy_increase": worst_increase})

    def exponential_rate(self) -> CriterionResult:
        graphs = [tetrahedron()] + [random_pattern(self.rng, int(self.rng.integers(2, 11)), feasible=True)
                                    for _ in range(10)]
        worst = 0.0
        missing = 0
        for graph in graphs:
            _, result = integrate_flow(graph, np.zeros(graph.n))
            if not result.converged or result.rate is None:
                missing += 1
                continue
            worst = max(worst, abs(result.rate - result.rate_predicted) / result.rate_predicted)
        return CriterionResult(
            6, "Exponential rate", missing == 0 and worst <= 0.2, len(graphs),
            f"max relative rate gap {worst:.1%}, {missing} runs without a fitted rate",
            0.0, {"max_relative_gap": worst})

    def dichotomy(self) -> CriterionResult:
        config = FlowConfig(max_time=1e3)
        feasible_count = infeasible_count = 0
        wrong = 0
        while feasible_count + infeasible_count < 50:
            want_feasible = feasible_count < 25
            graph = random_pattern(self.rng, int(self.rng.integers(2, 9)), feasible=want_feasible)
            verdict = check_exhaustive(graph)
            if verdict.feasible != want_feasible:
                continue
            finals = []
            for _ in range(5):
                _, result = integrate_flow(graph, random_initial_k(graph.n, self.rng), config)
                if result.converged != want_feasible:
                    wrong += 1
                    if self.verbose:
                        print(f"   N={graph.n} feasible={want_feasible}: {result.termination}, "
                              f"residual {result.final_residual:.2e}")
                if result.converged:
                    finals.append(result.k_star)
            if want_feasible:
                feasible_count += 1
                self.endpoints.append((graph, finals))
            else:
                infeasible_count += 1
        return CriterionResult(
            7, "Dichotomy", wrong == 0, 250,
            f"{wrong} of 250 runs disagreed with the feasibility verdict", 0.0, {"disagreements": wrong})

    def uniqueness(self) -> CriterionResult:
        worst = 0.0
        for _, finals in self.endpoints:
            if len(finals) > 1:
                stacked = np.vstack(finals)
                worst = max(worst, float(np.max(stacked.max(axis=0) - stacked.min(axis=0))))
        return CriterionResult(
            8, "Uniqueness", bool(self.endpoints) and worst <= 1e-6, len(self.endpoints),
            f"max spread of converged K across starts {worst:.2e}", 0.0, {"max_spread": worst})

    def checker(self) -> CriterionResult:
        single = PatternGraph.build(["a", "b"], [("a", "b", math.pi / 2)], [math.pi / 2, math.pi / 2])
        star = PatternGraph.build(["c", "l1", "l2", "l3"],
                                  [("c", f"l{i}", math.pi / 4) for i in (1, 2, 3)],
                                  [1.5 * math.pi, 0.5, 0.5, 0.5])
        hand = [
            abs(check_exhaustive(tetrahedron()).worst_slack - 4 * math.pi / 3) <= 1e-12,
            check_exhaustive(single).worst_slack == 0.0 and not check_exhaustive(single).feasible,
            not check_exhaustive(star).feasible,
        ]
        compared = disagreements = 0
        while compared < 1000:
            n = int(self.rng.integers(2, 9))
            graph = random_pattern(self.rng, n, feasible=bool(self.rng.integers(0, 2)))
            exact = check_exhaustive(graph)
            if abs(exact.worst_slack) <= 1e-9:
                continue
            compared += 1
            if check_flow(graph, 1e-12).feasible != exact.feasible:
                disagreements += 1
        return CriterionResult(
            9, "Feasibility checker", all(hand) and disagreements == 0, compared,
            f"hand cases {sum(hand)}/3, flow vs exhaustive disagreements {disagreements}",
            0.0, {"disagreements": disagreements})

    # ==================== DRIVER ====================

    def criteria(self) -> List[Callable[[], CriterionResult]]:
        return [
            self.tetrahedron_reproduction,
            self.smoothness,
            self.derivative_fidelity,
            self.area_positivity,
            self.gradient_structure,
            self.exponential_rate,
            self.dichotomy,
            self.uniqueness,
            self.checker,
        ]

    def run_all(self):
        """Run every criterion in order, collecting results"""
        checks = self.criteria()
        print(f"\n📋 Running {len(checks)} acceptance criteria (seed {self.seed})...\n")

        for i, check in enumerate(checks, 1):
            start = time.perf_counter()
            try:
                result = check()
            except Exception as e:
                print(f"[{i}/{len(checks)}] ❌ Error: {e}")
                logger.error(f"Criterion {i} failed", exc_info=True)
                continue
            result.seconds = time.perf_counter() - start
            self.results.append(result)

            status = "✅" if result.passed else "⚠️"
            print(f"[{i}/{len(checks)}] {status} {result.name} ({result.samples} samples, {result.seconds:.1f}s)")
            if self.verbose or not result.passed:
                print(f"   {result.detail}")

    def generate_report(self) -> Dict[str, Any]:
        if not self.results:
            return {"error": "No results to report"}
        return {
            "summary": {
                "criteria_run": len(self.results),
                "criteria_passed": sum(r.passed for r in self.results),
                "total_seconds": sum(r.seconds for r in self.results),
                "seed": self.seed,
            },
            "failures": [r.number for r in self.results if not r.passed],
            "timestamp": datetime.now().isoformat(),
        }

    def print_report(self, report: Dict[str, Any]):
        print("\n" + "=" * 60)
        print("📊 CIRCLEFLOW ACCEPTANCE REPORT")
        print("=" * 60)
        summary = report["summary"]
        print(f"   Criteria passed: {summary['criteria_passed']}/{summary['criteria_run']}")
        print(f"   Total time: {summary['total_seconds']:.1f}s")
        for result in self.results:
            mark = "PASS" if result.passed else "FAIL"
            print(f"   {result.number}. {result.name:<28} {mark}  {result.detail}")
        if not report["failures"]:
            print(f"\n🎉 All criteria passed!")
        print("\n" + "=" * 60)

    def save_report(self, report: Dict[str, Any], filename: str = "acceptance_report.json"):
        output_path = Path(__file__).parent.parent / "reports" / filename
        output_path.parent.mkdir(exist_ok=True)
        full_report = {**report, "detailed_results": [asdict(r) for r in self.results]}
        with open(output_path, 'w', encoding='utf-8') as f:
            json.dump(full_report, f, indent=2)
        print(f"\n💾 Detailed report saved to: {output_path}")


def main():
    parser = argparse.ArgumentParser(description="Run the circleflow acceptance suite")
    parser.add_argument("--verbose", action="store_true", help="Show per-criterion details")
    parser.add_argument("--save", action="store_true", help="Save the report to reports/")
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()

    evaluator = AcceptanceEvaluator(seed=args.seed, verbose=args.verbose)
    evaluator.run_all()
    report = evaluator.generate_report()
    if "error" in report:
        print(f"❌ {report['error']}")
        return 1
    evaluator.print_report(report)
    if args.save:
        evaluator.save_report(report)
    return 0 if not report["failures"] else 1


if __name__ == "__main__":
    sys.exit(main())
