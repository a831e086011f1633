"""
Built-in pattern generators
The five Platonic surfaces with uniform angle pi/3 and targets
(2/3) * theta * deg(v), plus random connected instances on either side of the
feasibility boundary.
"""

import logging
from collections import defaultdict
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import UnknownExampleError
from src.core.feasibility import critical_scale
from src.core.pattern_graph import Edge, PatternGraph
from .pattern_file import pi_multiple

logger = logging.getLogger(__name__)

Cycle = Sequence[int]

TETRAHEDRON: List[Cycle] = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]

# vertex i of the cube has coordinates given by its three bits
CUBE: List[Cycle] = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]

# vertices +x, -x, +y, -y, +z, -z; one face per octant
OCTAHEDRON: List[Cycle] = [(x, y, z) for x in (0, 1) for y in (2, 3) for z in (4, 5)]

ICOSAHEDRON: List[Cycle] = [
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
]


def _pairs(cycle: Cycle):
    return zip(cycle, list(cycle[1:]) + [cycle[0]])


def dual_faces(faces: Sequence[Cycle]) -> List[List[int]]:
    """
    Faces of the dual of a triangulated sphere

    Dual vertex j is primal face j; the dual face of primal vertex v walks the
    ring of triangles around v across the edges at v, so primal orientation is
    irrelevant.
    """
    by_edge: Dict[FrozenSet[int], List[int]] = defaultdict(list)
    for index, face in enumerate(faces):
        for a, b in _pairs(face):
            by_edge[frozenset((a, b))].append(index)

    vertices = sorted({v for face in faces for v in face})
    rings = []
    for v in vertices:
        start = next(i for i, face in enumerate(faces) if v in face)
        ring = [start]
        current = start
        across = next(x for x in faces[start] if x != v)
        while True:
            first, second = by_edge[frozenset((v, across))]
            current = second if first == current else first
            if current == start:
                break
            ring.append(current)
            across = next(x for x in faces[current] if x not in (v, across))
        rings.append(ring)
    return rings


def surface_from_faces(faces: Sequence[Cycle], theta: float,
                       target_of_degree: Callable[[int], float]) -> PatternGraph:
    """
    Pattern graph of a polyhedral surface given by vertex cycles

    Edges are numbered in order of first appearance along the faces.
    """
    count = 1 + max(v for face in faces for v in face)
    names = [f"v{i + 1}" for i in range(count)]
    edge_ids: Dict[FrozenSet[int], str] = {}
    edges: List[Edge] = []
    face_edges: List[List[str]] = []
    degree = [0] * count
    for face in faces:
        boundary = []
        for a, b in _pairs(face):
            key = frozenset((a, b))
            if key not in edge_ids:
                edge_ids[key] = f"e{len(edge_ids) + 1}"
                edges.append(Edge(edge_ids[key], names[min(a, b)], names[max(a, b)], theta))
                degree[a] += 1
                degree[b] += 1
            boundary.append(edge_ids[key])
        face_edges.append(boundary)
    targets = [target_of_degree(d) for d in degree]
    return PatternGraph.build(names, edges, targets, face_edges)


def platonic(faces: Sequence[Cycle]) -> PatternGraph:
    # theta = pi/3 and target (2/3) theta deg = 2 deg pi / 9
    return surface_from_faces(faces, pi_multiple(1, 3), lambda d: pi_multiple(2 * d, 9))


def random_pattern(rng: np.random.Generator, n: int = 6, feasible: bool = True,
                   extra_edges: Optional[int] = None) -> PatternGraph:
    """
    Random connected pattern placed on a chosen side of the feasibility boundary

    A random spanning tree plus extra edges gets angles in [0.3, 1.45] and
    weights w_v in [0.5, 1.5]; the targets are 0.7 (feasible) or 1.3
    (infeasible) times critical_scale * w.
    """
    if n < 2:
        raise ValueError(f"random patterns need at least 2 vertices, got {n}")
    names = [f"v{i + 1}" for i in range(n)]
    order = rng.permutation(n)
    pairs = set()
    for position in range(1, n):
        parent = order[rng.integers(0, position)]
        pairs.add(frozenset((int(order[position]), int(parent))))

    if extra_edges is None:
        extra_edges = int(rng.integers(0, n + 1))
    possible = n * (n - 1) // 2
    while extra_edges > 0 and len(pairs) < possible:
        a, b = rng.choice(n, size=2, replace=False)
        key = frozenset((int(a), int(b)))
        if key not in pairs:
            pairs.add(key)
            extra_edges -= 1

    ordered = sorted(tuple(sorted(p)) for p in pairs)
    thetas = rng.uniform(0.3, 1.45, size=len(ordered))
    edges = [Edge(f"e{j + 1}", names[a], names[b], float(t)) for j, ((a, b), t) in enumerate(zip(ordered, thetas))]
    weights = rng.uniform(0.5, 1.5, size=n)

    graph = PatternGraph.build(names, edges, weights.tolist())
    scale = critical_scale(graph) * (0.7 if feasible else 1.3)
    logger.debug(f"Random pattern N={n}, M={len(edges)}, target scale {scale:.4g}")
    return graph.with_targets((scale * weights).tolist())


PLATONIC: Dict[str, List[Cycle]] = {
    "tetrahedron": TETRAHEDRON,
    "cube": CUBE,
    "octahedron": OCTAHEDRON,
    "dodecahedron": [tuple(ring) for ring in dual_faces(ICOSAHEDRON)],
    "icosahedron": ICOSAHEDRON,
}

EXAMPLE_NAMES: Tuple[str, ...] = tuple(PLATONIC) + ("random",)


def get_example(name: str, seed: int = 0, vertices: int = 6, infeasible: bool = False) -> PatternGraph:
    """Named example; `random` uses seed, vertices and infeasible"""
    key = name.strip().lower()
    if key in PLATONIC:
        return platonic(PLATONIC[key])
    if key == "random":
        return random_pattern(np.random.default_rng(seed), vertices, feasible=not infeasible)
    raise UnknownExampleError(name, list(EXAMPLE_NAMES))
