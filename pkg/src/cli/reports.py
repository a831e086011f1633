"""
Machine-readable run reports
Pydantic models printed as JSON by the command-line surface, and the
trajectory CSV export.
"""

import math
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from src.core.curvature_field import CurvatureState, curvature_bound
from src.core.feasibility import FeasibilityReport
from src.core.pattern_graph import PatternGraph, r_from_k
from src.core.solver import SolveResult, Trajectory
from src.utils.config import get_settings

logger = logging.getLogger(__name__)


def rounded(value: Optional[float], digits: Optional[int] = None) -> Optional[float]:
    """Round to CIRCLEFLOW_REPORT_DIGITS significant digits when configured"""
    if value is None:
        return None
    value = float(value)
    digits = get_settings().report_digits if digits is None else digits
    if digits is None or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


class VertexReport(BaseModel):
    id: str
    r: float
    K: float
    L: float
    target: float
    alpha: float = Field(description="Cone angle at the circle center")
    length: float = Field(description="Length of the circle")
    curvature_bound: float = Field(description="2 * sum of incident theta")


class FaceReport(BaseModel):
    id: str
    cone_angle: float


class FeasibilityPayload(BaseModel):
    feasible: bool
    worst_slack: float
    witness: List[str]
    method: str
    epsilon: Optional[float] = None

    @classmethod
    def from_report(cls, report: FeasibilityReport, epsilon: Optional[float] = None) -> "FeasibilityPayload":
        return cls(feasible=report.feasible, worst_slack=rounded(report.worst_slack),
                   witness=list(report.witness), method=report.method, epsilon=epsilon)


class SolverStats(BaseModel):
    method: str
    converged: bool
    termination: str
    steps: int
    final_residual: float
    rate: Optional[float] = None
    rate_predicted: Optional[float] = None
    time: Optional[float] = None
    energy_drop: Optional[float] = None
    max_energy_increase: Optional[float] = None
    elapsed_seconds: float

    @classmethod
    def from_result(cls, result: SolveResult) -> "SolverStats":
        return cls(
            method=result.method,
            converged=result.converged,
            termination=result.termination,
            steps=result.iterations,
            final_residual=rounded(result.final_residual),
            rate=rounded(result.rate),
            rate_predicted=rounded(result.rate_predicted),
            time=rounded(result.time),
            energy_drop=rounded(result.energy_drop),
            max_energy_increase=rounded(result.max_energy_increase),
            elapsed_seconds=result.elapsed_seconds,
        )


class CheckReport(BaseModel):
    command: str = "check"
    pattern: Optional[str] = None
    vertices: int
    edges: int
    feasibility: FeasibilityPayload
    warnings: List[str] = Field(default_factory=list)


class RunReport(BaseModel):
    """State of a pattern at one K, with the solver runs and feasibility verdict that led there"""
    command: str
    pattern: Optional[str] = None
    vertices: List[VertexReport]
    faces: Optional[List[FaceReport]] = None
    residual: float
    total_area: float
    gauss_bonnet_defect: Optional[float] = None
    smooth: bool
    feasibility: Optional[FeasibilityPayload] = None
    solvers: List[SolverStats] = Field(default_factory=list)
    solver_agreement: Optional[float] = Field(
        None, description="max |K_flow - K_newton| when both methods converged")
    initial_residual: Optional[float] = None
    run_config: Dict[str, Any] = Field(default_factory=dict)


class ErrorReport(BaseModel):
    command: str
    pattern: Optional[str] = None
    error: str
    line: Optional[int] = None


def build_run_report(command: str, graph: PatternGraph, k: np.ndarray, state: CurvatureState,
                     pattern: Optional[str] = None, **extra: Any) -> RunReport:
    """Per-vertex and per-face tables at K plus whatever solver context the caller passes"""
    r = r_from_k(k)
    bound = curvature_bound(graph)
    vertices = [
        VertexReport(id=v, r=rounded(r[i]), K=rounded(k[i]), L=rounded(state.L[i]),
                     target=rounded(graph.targets[i]), alpha=rounded(state.alpha[i]),
                     length=rounded(state.lengths[i]), curvature_bound=rounded(bound[i]))
        for i, v in enumerate(graph.vertices)
    ]
    faces = None
    if state.face_cone is not None:
        faces = [FaceReport(id=fid, cone_angle=rounded(angle))
                 for fid, angle in zip(graph.face_ids, state.face_cone)]
    residual = float(np.max(np.abs(state.L - graph.target_vector)))
    return RunReport(
        command=command,
        pattern=pattern,
        vertices=vertices,
        faces=faces,
        residual=rounded(residual),
        total_area=rounded(state.total_area),
        gauss_bonnet_defect=rounded(state.gauss_bonnet_defect),
        smooth=state.is_smooth(),
        **extra,
    )


def trajectory_frame(graph: PatternGraph, trajectory: Trajectory) -> pd.DataFrame:
    """Columns t, residual, energy, K_<vertex id>..."""
    frame = pd.DataFrame({
        "t": trajectory.times,
        "residual": trajectory.residuals,
        "energy": trajectory.energies,
    })
    states = np.vstack(trajectory.states) if len(trajectory) else np.empty((0, graph.n))
    k_columns = pd.DataFrame(states, columns=[f"K_{v}" for v in graph.vertices])
    return pd.concat([frame, k_columns], axis=1)


def write_trajectory(path: Union[str, Path], graph: PatternGraph, trajectory: Trajectory) -> None:
    frame = trajectory_frame(graph, trajectory)
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info(f"Wrote {len(frame)} trajectory samples to {path}")
