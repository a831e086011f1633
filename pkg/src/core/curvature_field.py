"""
Curvature field of a circle pattern
Assembles per-vertex totals from per-edge bigons: the map K -> L(K), its
Jacobian, the potential E(K) (as a difference from a reference point), cone
angles, circle lengths and the area of the glued surface.
"""

import math
import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from scipy import sparse

from .bigon_geometry import bigon_kernel, trig_from_k
from .errors import InvalidPatternError
from .pattern_graph import PatternGraph, as_vector, require_finite_k, validate
from src.utils.config import get_settings
from src.utils.quadrature import segment_points

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CurvatureState:
    """Per-vertex totals at one K (vectors in vertex order, faces in face order)"""
    L: np.ndarray
    alpha: np.ndarray
    lengths: np.ndarray
    face_cone: Optional[np.ndarray]
    total_area: float
    gauss_bonnet_defect: Optional[float]

    def is_smooth(self, tol: float = 1e-9) -> bool:
        """True when every vertex and face cone angle equals 2 pi within tol"""
        if np.any(np.abs(self.alpha - TWO_PI) > tol):
            return False
        if self.face_cone is not None and np.any(np.abs(self.face_cone - TWO_PI) > tol):
            return False
        return True


@dataclass(frozen=True)
class CurvatureJacobian:
    """
    dL/dK stored as a diagonal plus one off-diagonal entry per edge

    Entries for parallel edges add up when materialized.
    """
    diagonal: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    cross: np.ndarray

    @property
    def n(self) -> int:
        return self.diagonal.shape[0]

    def dense(self) -> np.ndarray:
        J = np.diag(self.diagonal).astype(float)
        np.add.at(J, (self.rows, self.cols), self.cross)
        np.add.at(J, (self.cols, self.rows), self.cross)
        return J

    def sparse(self) -> sparse.csr_matrix:
        idx = np.arange(self.n)
        rows = np.concatenate([idx, self.rows, self.cols])
        cols = np.concatenate([idx, self.cols, self.rows])
        data = np.concatenate([self.diagonal, self.cross, self.cross])
        # coo -> csr sums duplicate entries (parallel edges)
        return sparse.coo_matrix((data, (rows, cols)), shape=(self.n, self.n)).tocsr()

    def matrix(self, dense_limit: Optional[int] = None):
        """Dense array up to the dense limit, CSR matrix above it"""
        limit = get_settings().dense_limit if dense_limit is None else dense_limit
        return self.dense() if self.n <= limit else self.sparse()


def ensure_valid(graph: PatternGraph) -> None:
    report = validate(graph)
    if not report.ok:
        raise InvalidPatternError(report.violations)


def _edge_values(graph: PatternGraph, k: np.ndarray) -> Dict[str, np.ndarray]:
    """Bigon kernel at K; k may be (N,) or batched (Q, N)"""
    u_idx, w_idx = graph.endpoints
    trig = trig_from_k(k)
    first = tuple(t[..., u_idx] for t in trig)
    second = tuple(t[..., w_idx] for t in trig)
    return bigon_kernel(*first, *second, graph.theta)


def _scatter(graph: PatternGraph, at_u: np.ndarray, at_w: np.ndarray) -> np.ndarray:
    """Sum per-edge endpoint contributions into vertices, in input edge order"""
    u_idx, w_idx = graph.endpoints
    index = np.stack([u_idx, w_idx], axis=1).reshape(-1)
    lead = at_u.shape[:-1]
    values = np.stack([at_u, at_w], axis=-1).reshape(lead + (-1,))
    out = np.zeros(lead + (graph.n,))
    if lead:
        np.add.at(out, (slice(None), index), values)
    else:
        np.add.at(out, index, values)
    return out


def face_cone_angles(graph: PatternGraph) -> Optional[np.ndarray]:
    """Cone angle at each face center: sum over boundary edges of (pi - theta)"""
    if graph.faces is None:
        return None
    lookup = graph.edge_index
    theta = graph.theta
    return np.array([sum(math.pi - theta[lookup[eid]] for eid in cycle) for cycle in graph.faces])


def curvature_bound(graph: PatternGraph) -> np.ndarray:
    """Per-vertex upper bound 2 * sum of incident theta; L_v stays strictly below it"""
    return _scatter(graph, 2.0 * graph.theta, 2.0 * graph.theta)


def curvatures(graph: PatternGraph, k: np.ndarray) -> CurvatureState:
    """Total geodesic curvature, cone angle and circle length of every vertex at K"""
    ensure_valid(graph)
    k = require_finite_k(as_vector(k, graph.n, "K"))
    values = _edge_values(graph, k)
    sin_r, cos_r, _ = trig_from_k(k)

    L = _scatter(graph, values["L1"], values["L2"])
    alpha = _scatter(graph, 2.0 * values["beta1"], 2.0 * values["beta2"])
    face_cone = face_cone_angles(graph)

    # quadrilateral v1 A v2 B has angles 2b1, 2b2 and twice (pi - theta)
    total_area = float(np.sum(2.0 * values["beta1"] + 2.0 * values["beta2"] - 2.0 * graph.theta))
    defect = None
    if face_cone is not None:
        chi = graph.n - graph.m + len(face_cone)
        defect = float(np.sum(TWO_PI - alpha) + np.sum(TWO_PI - face_cone)
                       + total_area - TWO_PI * chi)

    return CurvatureState(
        L=L,
        alpha=alpha,
        lengths=alpha * sin_r,
        face_cone=face_cone,
        total_area=total_area,
        gauss_bonnet_defect=defect,
    )


def curvatures_batch(graph: PatternGraph, k_points: np.ndarray) -> np.ndarray:
    """L(K) for a batch of K rows; shape (Q, N) in, (Q, N) out. No validation."""
    k_points = np.atleast_2d(np.asarray(k_points, dtype=float))
    values = _edge_values(graph, k_points)
    return _scatter(graph, values["L1"], values["L2"])


def curvature_vector(graph: PatternGraph, k: np.ndarray) -> np.ndarray:
    """L(K) only, for hot loops on an already validated graph"""
    values = _edge_values(graph, k)
    return _scatter(graph, values["L1"], values["L2"])


def residual(graph: PatternGraph, k: np.ndarray) -> float:
    """Sup-norm of L(K) - L-hat"""
    ensure_valid(graph)
    k = require_finite_k(as_vector(k, graph.n, "K"))
    return float(np.max(np.abs(curvature_vector(graph, k) - graph.target_vector)))


def jacobian(graph: PatternGraph, k: np.ndarray) -> CurvatureJacobian:
    """dL_u/dK_v assembled from the per-edge 2x2 closed-form blocks"""
    ensure_valid(graph)
    k = require_finite_k(as_vector(k, graph.n, "K"))
    return jacobian_unchecked(graph, k)


def jacobian_unchecked(graph: PatternGraph, k: np.ndarray) -> CurvatureJacobian:
    values = _edge_values(graph, k)
    u_idx, w_idx = graph.endpoints
    diagonal = _scatter(graph, values["dL1_dK1"], values["dL2_dK2"])
    return CurvatureJacobian(diagonal=diagonal, rows=u_idx.copy(), cols=w_idx.copy(),
                             cross=values["dL1_dK2"])


def potential(graph: PatternGraph, k: np.ndarray, reference: Optional[np.ndarray] = None,
              nodes: Optional[int] = None) -> float:
    """
    E(k) - E(reference)

    Each edge integrates its closed 1-form L1 dK1 + L2 dK2 along the straight
    segment reference -> k with Gauss-Legendre quadrature; the edge integrals are
    summed in input edge order and the linear target term is subtracted.

    Args:
        reference: defaults to K = 0 (every radius pi/4)
        nodes: quadrature node count, defaults to CIRCLEFLOW_QUADRATURE_NODES
    """
    ensure_valid(graph)
    k = require_finite_k(as_vector(k, graph.n, "K"))
    if reference is None:
        reference = np.zeros(graph.n)
    reference = require_finite_k(as_vector(reference, graph.n, "reference"))
    return potential_unchecked(graph, k, reference, nodes)


def potential_unchecked(graph: PatternGraph, k: np.ndarray, reference: np.ndarray,
                        nodes: Optional[int] = None) -> float:
    count = get_settings().quadrature_nodes if nodes is None else nodes
    points, weights = segment_points(reference, k, count)
    values = _edge_values(graph, points)
    u_idx, w_idx = graph.endpoints
    step = k - reference
    # (Q, M) integrand of each edge's 1-form along the segment
    integrand = values["L1"] * step[u_idx] + values["L2"] * step[w_idx]
    per_edge = weights @ integrand
    return float(math.fsum(per_edge) - np.dot(graph.target_vector, step))
