"""
Solvers for prescribed total geodesic curvature
Integrates the gradient flow dK/dt = -(L(K) - L-hat) (or its radius form
dr/dt = (L - L-hat) sin(2r) / 2) with energy-checked steps, runs damped Newton on
L(K) = L-hat, and fits the exponential decay rate of the residual.
"""

import math
import time
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Deque, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import linalg
from scipy.sparse.linalg import cg, eigsh
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

from .curvature_field import (
    curvature_vector,
    ensure_valid,
    jacobian_unchecked,
    potential_unchecked,
)
from .errors import DomainError, RateEstimationError
from .pattern_graph import KVector, PatternGraph, RadiusVector, as_vector, k_from_r, r_from_k, require_finite_k
from src.utils.config import get_settings

logger = logging.getLogger(__name__)

Termination = Literal["tolerance", "max_time", "diverging", "step_underflow",
                      "max_iter", "singular", "stalled"]


class FlowConfig(BaseModel):
    """Integration knobs for the curvature flow"""
    step: float = Field(0.1, gt=0, description="Initial (and maximal) time step")
    tol: float = Field(1e-10, gt=0, description="Stop when ||L - L-hat||_inf <= tol")
    max_time: float = Field(1e3, gt=0, description="Cap on integrated time")
    capture_every: float = Field(0.0, ge=0, description="Trajectory sampling interval; 0 keeps every step")
    integrator: Literal["rk4", "euler"] = "rk4"
    escape_bound: float = Field(50.0, gt=0, description="||K||_inf beyond which a stalled run is diverging")
    stall_window: float = Field(25.0, gt=0, description="Look-back time for the stalled-residual test")
    stall_ratio: float = Field(0.5, gt=0, le=1, description="Residual must fall below ratio * earlier value")
    max_halvings: int = Field(30, ge=1, description="Step halvings tried before giving up on a step")
    energy_slack: float = Field(1e-10, ge=0, description="Largest accepted energy increase per step")
    quadrature_nodes: Optional[int] = Field(None, ge=1, description="Overrides CIRCLEFLOW_QUADRATURE_NODES")


@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    states: List[np.ndarray] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    energies: List[float] = field(default_factory=list)

    def record(self, t: float, k: np.ndarray, res: float, energy: float) -> None:
        self.times.append(t)
        self.states.append(k.copy())
        self.residuals.append(res)
        self.energies.append(energy)

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class SolveResult:
    converged: bool
    k_star: KVector
    r_star: RadiusVector
    iterations: int
    final_residual: float
    termination: Termination
    method: str
    rate: Optional[float] = None
    rate_predicted: Optional[float] = None
    time: Optional[float] = None
    energy_drop: Optional[float] = None
    max_energy_increase: Optional[float] = None
    elapsed_seconds: float = 0.0


class StepRejected(Exception):
    """The trial step increased the energy or left the domain"""


def random_initial_k(n: int, rng: np.random.Generator, low: float = -3.0, high: float = 3.0) -> KVector:
    return rng.uniform(low, high, size=n)


def smallest_jacobian_eigenvalue(graph: PatternGraph, k: np.ndarray) -> float:
    """lambda_min of dL/dK, the linearized decay rate of the flow at a critical point"""
    J = jacobian_unchecked(graph, k)
    if J.n <= get_settings().dense_limit or J.n < 3:
        return float(np.linalg.eigvalsh(J.dense())[0])
    value = eigsh(J.sparse(), k=1, which="SA", return_eigenvectors=False)
    return float(value[0])


def _residual_of(graph: PatternGraph, k: np.ndarray) -> Tuple[np.ndarray, float]:
    gradient = curvature_vector(graph, k) - graph.target_vector
    return gradient, float(np.max(np.abs(gradient)))


class _FlowIntegrator:
    """
    Shared stepping loop for the K form and the radius form

    The state x is K or r; to_k maps it to K for energy and residual checks.
    """

    def __init__(self, graph: PatternGraph, config: FlowConfig,
                 field_fn: Callable[[np.ndarray], np.ndarray],
                 to_k: Callable[[np.ndarray], np.ndarray],
                 method: str):
        self.graph = graph
        self.config = config
        self.field_fn = field_fn
        self.to_k = to_k
        self.method = method
        self.nodes = config.quadrature_nodes or get_settings().quadrature_nodes
        self.reference = np.zeros(graph.n)

    def _advance(self, x: np.ndarray, h: float) -> np.ndarray:
        f = self.field_fn
        if self.config.integrator == "euler":
            return x + h * f(x)
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def _trial(self, x: np.ndarray, k: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray, float]:
        with np.errstate(all="ignore"):
            x_new = self._advance(x, h)
            k_new = self.to_k(x_new)
        if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(k_new))):
            logger.debug(f"Rejected step h={h:.3g}: non-finite state")
            raise StepRejected("non-finite state")
        delta = potential_unchecked(self.graph, k_new, k, self.nodes)
        if not math.isfinite(delta) or delta > self.config.energy_slack:
            logger.debug(f"Rejected step h={h:.3g}: energy change {delta:.3g}")
            raise StepRejected(f"energy increased by {delta!r}")
        return x_new, k_new, delta

    def run(self, x0: np.ndarray) -> Tuple[Trajectory, SolveResult]:
        cfg = self.config
        started = time.perf_counter()
        x = x0.copy()
        k = self.to_k(x)
        energy = potential_unchecked(self.graph, k, self.reference, self.nodes)
        energy0 = energy
        _, res = _residual_of(self.graph, k)

        trajectory = Trajectory()
        trajectory.record(0.0, k, res, energy)
        window: Deque[Tuple[float, float]] = deque([(0.0, res)])

        t = 0.0
        h = cfg.step
        steps = 0
        max_increase = -math.inf
        last_capture = 0.0
        termination: Termination = "max_time"

        logger.info(f"Starting {self.method} ({cfg.integrator}) on N={self.graph.n}, residual {res:.3e}")
        while True:
            if res <= cfg.tol:
                termination = "tolerance"
                break
            if t >= cfg.max_time:
                termination = "max_time"
                break

            h_base = min(h, cfg.max_time - t)
            try:
                for attempt in Retrying(stop=stop_after_attempt(cfg.max_halvings),
                                        retry=retry_if_exception_type(StepRejected)):
                    with attempt:
                        h_try = h_base / 2 ** (attempt.retry_state.attempt_number - 1)
                        x_new, k_new, delta = self._trial(x, k, h_try)
            except RetryError:
                termination = "step_underflow"
                logger.warning(f"Step underflow at t={t:.4g}: {cfg.max_halvings} halvings rejected")
                break

            x, k = x_new, k_new
            t += h_try
            steps += 1
            energy += delta
            max_increase = max(max_increase, delta)
            _, res = _residual_of(self.graph, k)
            # recover toward the configured step after a successful halving
            h = min(2.0 * h_try, cfg.step)

            if t - last_capture >= cfg.capture_every or res <= cfg.tol:
                trajectory.record(t, k, res, energy)
                last_capture = t

            window.append((t, res))
            while len(window) > 1 and window[1][0] <= t - cfg.stall_window:
                window.popleft()
            if np.max(np.abs(k)) > cfg.escape_bound:
                earlier_t, earlier_res = window[0]
                if t - earlier_t >= cfg.stall_window and res > cfg.stall_ratio * earlier_res:
                    termination = "diverging"
                    break

        if trajectory.times[-1] != t:
            trajectory.record(t, k, res, energy)

        converged = termination == "tolerance"
        result = SolveResult(
            converged=converged,
            k_star=k.copy(),
            r_star=r_from_k(k),
            iterations=steps,
            final_residual=res,
            termination=termination,
            method=self.method,
            time=t,
            energy_drop=energy - energy0,
            max_energy_increase=max_increase if steps else None,
        )
        if converged:
            result.rate_predicted = smallest_jacobian_eigenvalue(self.graph, k)
            try:
                result.rate = estimate_rate(trajectory)
            except RateEstimationError as e:
                logger.info(f"No rate fitted: {e}")
        result.elapsed_seconds = time.perf_counter() - started
        logger.info(f"{self.method} stopped ({termination}) after {steps} steps, t={t:.4g}, "
                    f"residual {res:.3e}")
        return trajectory, result


def flow_field(graph: PatternGraph, k: np.ndarray) -> np.ndarray:
    """dK/dt = -(L - L-hat)"""
    return graph.target_vector - curvature_vector(graph, k)


def _k_of_radius(r: np.ndarray) -> np.ndarray:
    return -np.log(np.tan(r))


def radius_flow_field(graph: PatternGraph, r: np.ndarray) -> np.ndarray:
    """dr/dt = (L - L-hat) sin(2r) / 2"""
    return 0.5 * (curvature_vector(graph, _k_of_radius(r)) - graph.target_vector) * np.sin(2.0 * r)


def integrate_flow(graph: PatternGraph, k0: np.ndarray,
                   config: Optional[FlowConfig] = None) -> Tuple[Trajectory, SolveResult]:
    """Integrate dK/dt = -(L(K) - L-hat) from k0"""
    ensure_valid(graph)
    config = config or FlowConfig()
    k0 = require_finite_k(as_vector(k0, graph.n, "k0"))
    return _FlowIntegrator(graph, config, lambda k: flow_field(graph, k), lambda k: k, "flow").run(k0)


def integrate_flow_radius(graph: PatternGraph, r0: np.ndarray,
                          config: Optional[FlowConfig] = None) -> Tuple[Trajectory, SolveResult]:
    """Integrate dr/dt = (L - L-hat) sin(2r) / 2 from r0; states are reported in K"""
    ensure_valid(graph)
    config = config or FlowConfig()
    r0 = as_vector(r0, graph.n, "r0")
    k_from_r(r0)
    return _FlowIntegrator(graph, config, lambda r: radius_flow_field(graph, r), _k_of_radius,
                           "flow-radius").run(r0)


def _solve_step(J, gradient: np.ndarray) -> np.ndarray:
    """delta with J delta = -gradient; dense Cholesky or conjugate gradients"""
    if isinstance(J, np.ndarray):
        factor = linalg.cho_factor(J)
        return linalg.cho_solve(factor, -gradient)
    delta, info = cg(J, -gradient, rtol=1e-13, atol=0.0, maxiter=10 * J.shape[0])
    if info != 0:
        raise np.linalg.LinAlgError(f"conjugate gradients did not converge (info={info})")
    return delta


def newton_solve(graph: PatternGraph, k0: Optional[np.ndarray] = None, tol: float = 1e-12,
                 max_iter: int = 50) -> SolveResult:
    """
    Damped Newton on L(K) = L-hat

    Steps solve J delta = -(L - L-hat) with the SPD Jacobian and backtrack on
    the merit 0.5 * ||L - L-hat||^2 (Armijo condition).
    """
    ensure_valid(graph)
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    started = time.perf_counter()
    k = np.zeros(graph.n) if k0 is None else require_finite_k(as_vector(k0, graph.n, "k0"))
    gradient, res = _residual_of(graph, k)
    merit = 0.5 * float(gradient @ gradient)
    dense_limit = get_settings().dense_limit

    iterations = 0
    termination: Termination = "max_iter"
    while True:
        if res <= tol:
            termination = "tolerance"
            break
        if iterations >= max_iter:
            termination = "max_iter"
            break
        try:
            delta = _solve_step(jacobian_unchecked(graph, k).matrix(dense_limit), gradient)
        except (np.linalg.LinAlgError, ValueError) as e:
            logger.warning(f"Newton: Jacobian singular to working precision at iteration {iterations}: {e}")
            termination = "singular"
            break

        step = 1.0
        accepted = False
        for _ in range(40):
            k_try = k + step * delta
            if np.all(np.isfinite(k_try)):
                g_try, res_try = _residual_of(graph, k_try)
                merit_try = 0.5 * float(g_try @ g_try)
                # directional derivative of the merit along delta is -2 * merit
                if merit_try <= (1.0 - 2e-4 * step) * merit:
                    accepted = True
                    break
            step *= 0.5
            logger.debug(f"Newton backtrack to step {step:.3g}")
        iterations += 1
        if not accepted:
            termination = "stalled"
            break
        k, gradient, res, merit = k_try, g_try, res_try, merit_try

    converged = termination == "tolerance"
    result = SolveResult(
        converged=converged,
        k_star=k.copy(),
        r_star=r_from_k(k),
        iterations=iterations,
        final_residual=res,
        termination=termination,
        method="newton",
    )
    if converged:
        result.rate_predicted = smallest_jacobian_eigenvalue(graph, k)
    result.elapsed_seconds = time.perf_counter() - started
    logger.info(f"newton stopped ({termination}) after {iterations} iterations, residual {res:.3e}")
    return result


MIN_TAIL_SAMPLES = 10
TAIL_FRACTION = 1e-2
MIN_TAIL_DECADES = 2.0


def estimate_rate(trajectory: Trajectory) -> float:
    """
    Exponential decay rate of the residual over the converged tail

    The tail is the samples whose residual has fallen below 1e-2 of the initial
    value; the rate is minus the least-squares slope of ln(residual) against time
    over the later half of that window.
    """
    times = np.asarray(trajectory.times, dtype=float)
    residuals = np.asarray(trajectory.residuals, dtype=float)
    if residuals.size == 0 or not residuals[0] > 0:
        raise RateEstimationError("non-decaying tail: empty trajectory or zero initial residual")

    in_tail = (residuals <= TAIL_FRACTION * residuals[0]) & (residuals > 0)
    if not np.any(in_tail):
        raise RateEstimationError("non-decaying tail: residual never fell below 1e-2 of its initial value")
    first = int(np.argmax(in_tail))
    tail_t = times[first:]
    tail_r = residuals[first:]
    if np.any(tail_r <= 0):
        raise RateEstimationError("non-decaying tail: residual vanished inside the tail")
    if tail_t.size < MIN_TAIL_SAMPLES:
        raise RateEstimationError(f"too few samples: {tail_t.size} in the tail, need {MIN_TAIL_SAMPLES}")

    half = max(tail_t.size // 2, MIN_TAIL_SAMPLES)
    window_t = tail_t[-half:]
    window_log = np.log(tail_r[-half:])
    slope, _ = np.polyfit(window_t, window_log, 1)
    decades = (np.log(tail_r[0]) - np.log(tail_r[-1])) / math.log(10.0)
    if not slope < 0 or decades < MIN_TAIL_DECADES:
        raise RateEstimationError("non-decaying tail: residual is not decaying exponentially")
    return float(-slope)
