"""
Core numerics for circleflow: pattern graphs, bigon trigonometry, the curvature
field, the feasibility checker and the flow / Newton solvers
"""

from .errors import (
    CircleFlowError,
    DimensionMismatchError,
    DomainError,
    EnumerationLimitError,
    InvalidPatternError,
    PatternFileError,
    RateEstimationError,
    UnknownExampleError,
    UnknownVertexError,
)
from .pattern_graph import (
    Edge,
    PatternGraph,
    ValidationReport,
    boundary_edge_set,
    incident_edges,
    k_from_r,
    r_from_k,
    validate,
)
from .bigon_geometry import BigonInput, BigonMeasurement, half_angle, measure
from .curvature_field import (
    CurvatureJacobian,
    CurvatureState,
    curvature_bound,
    curvatures,
    jacobian,
    potential,
    residual,
)
from .feasibility import FeasibilityReport, check_exhaustive, check_flow, critical_scale, slack
from .solver import (
    FlowConfig,
    SolveResult,
    Trajectory,
    estimate_rate,
    integrate_flow,
    integrate_flow_radius,
    newton_solve,
)

__all__ = [
    'CircleFlowError', 'DimensionMismatchError', 'DomainError', 'EnumerationLimitError',
    'InvalidPatternError', 'PatternFileError', 'RateEstimationError', 'UnknownExampleError', 'UnknownVertexError',
    'Edge', 'PatternGraph', 'ValidationReport', 'boundary_edge_set', 'incident_edges',
    'k_from_r', 'r_from_k', 'validate',
    'BigonInput', 'BigonMeasurement', 'half_angle', 'measure',
    'CurvatureJacobian', 'CurvatureState', 'curvature_bound', 'curvatures', 'jacobian',
    'potential', 'residual',
    'FeasibilityReport', 'check_exhaustive', 'check_flow', 'critical_scale', 'slack',
    'FlowConfig', 'SolveResult', 'Trajectory', 'estimate_rate', 'integrate_flow',
    'integrate_flow_radius', 'newton_solve',
]
