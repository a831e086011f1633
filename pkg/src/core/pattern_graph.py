"""
Pattern graph for spherical ideal circle patterns
Combinatorial data (vertices, edges, optional faces), intersection angles and
prescribed total geodesic curvatures, plus the K <-> radius change of variables.
"""

import math
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from .errors import DimensionMismatchError, DomainError, UnknownVertexError

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi

# One real per vertex, in the graph's vertex order
KVector = npt.NDArray[np.float64]
RadiusVector = npt.NDArray[np.float64]


@dataclass(frozen=True)
class Edge:
    """One edge {u, w} with its intersection angle Theta(e)"""
    id: str
    u: str
    w: str
    theta: float


EdgeSpec = Union[Edge, Tuple[str, str, float], Tuple[str, str, str, float]]


@dataclass(frozen=True)
class PatternGraph:
    """
    Immutable combinatorial surface data with angles and targets

    Vertex order fixes the coordinate order of every per-vertex vector.
    Faces, when present, are cyclic sequences of edge ids.
    """
    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    targets: Tuple[float, ...]
    faces: Optional[Tuple[Tuple[str, ...], ...]] = None
    face_ids: Optional[Tuple[str, ...]] = None

    @classmethod
    def build(cls,
              vertices: Iterable[str],
              edges: Iterable[EdgeSpec],
              targets: Union[Mapping[str, float], Sequence[float]],
              faces: Optional[Iterable[Iterable[str]]] = None,
              face_ids: Optional[Iterable[str]] = None) -> "PatternGraph":
        """
        Build a graph from loose Python data

        Args:
            vertices: vertex ids in coordinate order
            edges: Edge objects, (u, w, theta) or (id, u, w, theta); ids default to e1, e2, ...
            targets: mapping vertex -> L-hat, or a sequence aligned with vertices
            faces: optional cyclic edge-id sequences
        """
        vertex_tuple = tuple(str(v) for v in vertices)
        edge_list: List[Edge] = []
        for position, spec in enumerate(edges, 1):
            if isinstance(spec, Edge):
                edge_list.append(spec)
            elif len(spec) == 3:
                u, w, theta = spec
                edge_list.append(Edge(f"e{position}", str(u), str(w), float(theta)))
            else:
                eid, u, w, theta = spec
                edge_list.append(Edge(str(eid), str(u), str(w), float(theta)))

        if isinstance(targets, Mapping):
            target_tuple = tuple(float(targets.get(v, math.nan)) for v in vertex_tuple)
        else:
            target_tuple = tuple(float(t) for t in targets)
            if len(target_tuple) != len(vertex_tuple):
                raise DimensionMismatchError(
                    f"Expected {len(vertex_tuple)} targets, got {len(target_tuple)}")

        face_tuple = None
        face_id_tuple = None
        if faces is not None:
            face_tuple = tuple(tuple(str(e) for e in cycle) for cycle in faces)
            if face_ids is None:
                face_id_tuple = tuple(f"f{i}" for i in range(1, len(face_tuple) + 1))
            else:
                face_id_tuple = tuple(str(f) for f in face_ids)

        return cls(vertex_tuple, tuple(edge_list), target_tuple, face_tuple, face_id_tuple)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def vertex_index(self) -> Dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def edge_index(self) -> Dict[str, int]:
        return {e.id: i for i, e in enumerate(self.edges)}

    @cached_property
    def endpoints(self) -> Tuple[np.ndarray, np.ndarray]:
        """Index arrays (u_idx, w_idx) over edges; valid graphs only"""
        index = self.vertex_index
        u_idx = np.array([index[e.u] for e in self.edges], dtype=np.intp)
        w_idx = np.array([index[e.w] for e in self.edges], dtype=np.intp)
        return u_idx, w_idx

    @cached_property
    def theta(self) -> np.ndarray:
        return np.array([e.theta for e in self.edges], dtype=float)

    @cached_property
    def target_vector(self) -> np.ndarray:
        return np.array(self.targets, dtype=float)

    @cached_property
    def degrees(self) -> np.ndarray:
        u_idx, w_idx = self.endpoints
        return np.bincount(np.concatenate([u_idx, w_idx]), minlength=self.n)

    def target_of(self, vertex: str) -> float:
        return self.targets[self._require(vertex)]

    def _require(self, vertex: str) -> int:
        try:
            return self.vertex_index[vertex]
        except KeyError:
            raise UnknownVertexError(vertex) from None

    def with_targets(self, targets: Sequence[float]) -> "PatternGraph":
        """Same combinatorics and angles, new targets"""
        values = tuple(float(t) for t in targets)
        if len(values) != self.n:
            raise DimensionMismatchError(f"Expected {self.n} targets, got {len(values)}")
        return PatternGraph(self.vertices, self.edges, values, self.faces, self.face_ids)


@dataclass
class ValidationReport:
    """Violations of the PatternGraph invariants; empty means valid"""
    violations: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    euler_characteristic: Optional[int] = None
    genus: Optional[int] = None

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(graph: PatternGraph) -> ValidationReport:
    """Check every PatternGraph invariant and report all violations found"""
    report = ValidationReport()
    violations = report.violations

    if graph.n < 1:
        violations.append("graph has no vertices")
    if graph.m < 1:
        violations.append("graph has no edges")

    seen = set()
    for v in graph.vertices:
        if v in seen:
            violations.append(f"duplicate vertex id {v!r}")
        seen.add(v)

    edge_ids = set()
    touched = set()
    for e in graph.edges:
        if e.id in edge_ids:
            violations.append(f"duplicate edge id {e.id!r}")
        edge_ids.add(e.id)
        for endpoint in (e.u, e.w):
            if endpoint not in graph.vertex_index:
                violations.append(f"edge {e.id!r}: unknown endpoint {endpoint!r}")
        if e.u == e.w:
            violations.append(f"edge {e.id!r}: self-loop at {e.u!r} is not supported")
        touched.update((e.u, e.w))
        if not (math.isfinite(e.theta) and 0.0 < e.theta <= HALF_PI):
            violations.append(f"edge {e.id!r}: theta out of (0, pi/2]: {e.theta!r}")
        elif e.theta == HALF_PI:
            report.warnings.append(
                f"edge {e.id!r}: theta = pi/2; convergence is only guaranteed for theta < pi/2")

    for v, target in zip(graph.vertices, graph.targets):
        if not (math.isfinite(target) and target > 0.0):
            violations.append(f"vertex {v!r}: target must be a positive finite number, got {target!r}")
        if v not in touched:
            violations.append(f"vertex {v!r}: isolated (no incident edge)")

    if graph.faces is not None:
        _validate_faces(graph, report)

    for warning in report.warnings:
        logger.debug(warning)
    return report


def _validate_faces(graph: PatternGraph, report: ValidationReport) -> None:
    counts: Dict[str, int] = {e.id: 0 for e in graph.edges}
    for face_id, cycle in zip(graph.face_ids or (), graph.faces or ()):
        if not cycle:
            report.violations.append(f"face {face_id!r}: empty boundary")
        for eid in cycle:
            if eid not in counts:
                report.violations.append(f"face {face_id!r}: unknown edge {eid!r}")
            else:
                counts[eid] += 1
    for eid, count in counts.items():
        if count != 2:
            report.violations.append(f"edge {eid!r}: appears in {count} face boundaries, expected 2")

    chi = graph.n - graph.m + len(graph.faces or ())
    report.euler_characteristic = chi
    if chi > 2 or chi % 2:
        report.violations.append(f"Euler characteristic {chi} is not 2 - 2g for an integer g >= 0")
    else:
        report.genus = (2 - chi) // 2


def incident_edges(graph: PatternGraph, v: str) -> List[str]:
    """Edge ids having v as an endpoint, in input order (parallel edges listed separately)"""
    graph._require(v)
    return [e.id for e in graph.edges if v in (e.u, e.w)]


def boundary_edge_set(graph: PatternGraph, subset: Iterable[str]) -> List[str]:
    """E(X): edge ids with at least one endpoint in X, in input order"""
    members = set()
    for v in subset:
        graph._require(v)
        members.add(v)
    return [e.id for e in graph.edges if e.u in members or e.w in members]


def as_vector(values: Union[Sequence[float], np.ndarray], n: int, name: str = "vector") -> np.ndarray:
    """Copy values into a float array of length n or raise DimensionMismatchError"""
    array = np.array(values, dtype=float).reshape(-1)
    if array.shape[0] != n:
        raise DimensionMismatchError(f"{name} has length {array.shape[0]}, graph has {n} vertices")
    return array


def require_finite_k(k: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(k)):
        raise DomainError("K vector contains non-finite entries")
    return k


def k_from_r(r: Union[Sequence[float], np.ndarray]) -> KVector:
    """K_v = ln cot r_v for r strictly inside (0, pi/2)"""
    radii = np.asarray(r, dtype=float)
    if not np.all((radii > 0.0) & (radii < HALF_PI)):
        raise DomainError("radii must lie strictly inside (0, pi/2)")
    return -np.log(np.tan(radii))


def r_from_k(k: Union[Sequence[float], np.ndarray]) -> RadiusVector:
    """r_v = arccot(exp K_v), the inverse of k_from_r"""
    values = require_finite_k(np.asarray(k, dtype=float))
    return np.arctan(np.exp(-values))
