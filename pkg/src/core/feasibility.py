"""
Feasibility of prescribed total geodesic curvatures
Decides the strict subset condition

    sum_{v in X} L-hat_v < 2 * sum_{e in E(X)} Theta(e)   for every nonempty X

either exactly by enumerating subsets or, with an explicit margin, through a
max-flow / min-cut on the vertex-edge transportation network.
"""

import math
import logging
from dataclasses import dataclass
from typing import Iterable, List, Literal, Optional, Tuple

import networkx as nx
import numpy as np
from networkx.algorithms.flow import edmonds_karp

from .curvature_field import ensure_valid
from .errors import EnumerationLimitError
from .pattern_graph import PatternGraph

logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 24
BLOCK_BITS = 16
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    worst_slack: float
    witness: Tuple[str, ...]
    method: Literal["exhaustive", "flow"]


def slack(graph: PatternGraph, subset: Iterable[str]) -> float:
    """2 * sum of theta over E(X) minus the sum of targets over X"""
    members = {graph._require(v) for v in subset}
    u_idx, w_idx = graph.endpoints
    covered = np.array([u in members or w in members for u, w in zip(u_idx, w_idx)], dtype=bool)
    targets = graph.target_vector[sorted(members)]
    return float(2.0 * graph.theta[covered].sum() - targets.sum())


def _subset_tables(graph: PatternGraph, masks: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(covered 2*Theta, target sum) for each bitmask in a block"""
    u_idx, w_idx = graph.endpoints
    edge_masks = (np.left_shift(1, u_idx) | np.left_shift(1, w_idx)).astype(np.int64)
    covered = (masks[:, None] & edge_masks[None, :]) != 0
    bits = (masks[:, None] >> np.arange(graph.n, dtype=np.int64)[None, :]) & 1
    return covered @ (2.0 * graph.theta), bits @ graph.target_vector


def _mask_members(mask: int, n: int) -> Tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)


def _enumerate(graph: PatternGraph) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Every nonempty subset as (masks, covered weight, target sum), block by block"""
    total = 1 << graph.n
    block = 1 << BLOCK_BITS
    mask_parts: List[np.ndarray] = []
    cover_parts: List[np.ndarray] = []
    target_parts: List[np.ndarray] = []
    for start in range(1, total, block):
        masks = np.arange(start, min(start + block, total), dtype=np.int64)
        covered, targets = _subset_tables(graph, masks)
        mask_parts.append(masks)
        cover_parts.append(covered)
        target_parts.append(targets)
    return np.concatenate(mask_parts), np.concatenate(cover_parts), np.concatenate(target_parts)


def _min_slack_witness(graph: PatternGraph) -> Tuple[float, Tuple[int, ...]]:
    """Minimal slack and the lexicographically smallest index tuple attaining it"""
    total = 1 << graph.n
    block = 1 << BLOCK_BITS
    best = math.inf
    pool: List[Tuple[float, int]] = []
    # blocks keep memory bounded; the min-reduction does not depend on block order
    for start in range(1, total, block):
        masks = np.arange(start, min(start + block, total), dtype=np.int64)
        covered, targets = _subset_tables(graph, masks)
        slacks = covered - targets
        best = min(best, float(slacks.min()))
        limit = best + TIE_TOLERANCE * (1.0 + abs(best))
        if best <= 0.0:
            # a tie never crosses zero
            limit = min(limit, 0.0)
        keep = slacks <= limit
        pool.extend(zip(slacks[keep].tolist(), masks[keep].tolist()))
        pool = [(s, m) for s, m in pool if s <= limit]
    return best, min(_mask_members(m, graph.n) for _, m in pool)


def check_exhaustive(graph: PatternGraph) -> FeasibilityReport:
    """
    Exact verdict by enumerating all 2^N - 1 nonempty subsets

    The verdict and worst_slack come from the enumerated minimum; ties within
    1e-12 relative (never across zero) go to the lexicographically smallest
    index tuple.
    """
    ensure_valid(graph)
    if graph.n > EXHAUSTIVE_LIMIT:
        raise EnumerationLimitError(
            f"check_exhaustive enumerates 2^N subsets and refuses N={graph.n} > {EXHAUSTIVE_LIMIT}; "
            "use check_flow instead")
    worst, members = _min_slack_witness(graph)
    witness = tuple(graph.vertices[i] for i in members)
    logger.debug(f"Exhaustive check over {2 ** graph.n - 1} subsets: worst slack {worst:.6g}")
    return FeasibilityReport(feasible=worst > 0.0, worst_slack=worst, witness=witness,
                             method="exhaustive")


def critical_scale(graph: PatternGraph) -> float:
    """
    Supremum of the scalings s for which s * L-hat is feasible:
    s * L-hat satisfies the condition iff s < critical_scale(graph)
    """
    ensure_valid(graph)
    if graph.n > EXHAUSTIVE_LIMIT:
        raise EnumerationLimitError(f"critical_scale refuses N={graph.n} > {EXHAUSTIVE_LIMIT}")
    _, covered, targets = _enumerate(graph)
    return float(np.min(covered / targets))


def check_flow(graph: PatternGraph, epsilon: float = 1e-12) -> FeasibilityReport:
    """
    Margin-epsilon verdict from a min cut of the transportation network

        source -> v        capacity L-hat_v
        v -> e  (v < e)    unbounded
        e -> sink          capacity 2 Theta(e) - epsilon / M

    All source arcs saturate iff every X has slack >= epsilon |E(X)| / M, which
    implies the strict condition. The source side of the min cut is the witness.
    """
    if not (epsilon > 0.0 and math.isfinite(epsilon)):
        raise ValueError(f"epsilon must be a positive finite margin, got {epsilon!r}")
    ensure_valid(graph)

    margin = epsilon / graph.m
    network = nx.DiGraph()
    for i, v in enumerate(graph.vertices):
        network.add_edge("source", ("v", i), capacity=graph.targets[i])
    u_idx, w_idx = graph.endpoints
    for j, edge in enumerate(graph.edges):
        # no capacity attribute means unbounded in networkx
        network.add_edge(("v", int(u_idx[j])), ("e", j))
        network.add_edge(("v", int(w_idx[j])), ("e", j))
        network.add_edge(("e", j), "sink", capacity=max(2.0 * edge.theta - margin, 0.0))

    cut_value, (source_side, _) = nx.minimum_cut(network, "source", "sink", flow_func=edmonds_karp)
    members = tuple(sorted(node[1] for node in source_side if isinstance(node, tuple) and node[0] == "v"))

    found = None
    feasible = True
    if members:
        found = tuple(graph.vertices[i] for i in members)
        feasible = slack(graph, found) - margin * _covered_count(graph, members) >= 0.0
    # a nontrivial source side on a feasible instance is rounding residue in the flow
    witness = found if not feasible else _cheap_witness(graph, found)

    worst = slack(graph, witness)
    logger.debug(f"Flow check: cut {cut_value:.6g} vs total target {sum(graph.targets):.6g}")
    return FeasibilityReport(feasible=feasible, worst_slack=worst, witness=witness, method="flow")


def _covered_count(graph: PatternGraph, members: Tuple[int, ...]) -> int:
    chosen = set(members)
    u_idx, w_idx = graph.endpoints
    return sum(1 for u, w in zip(u_idx, w_idx) if u in chosen or w in chosen)


def _cheap_witness(graph: PatternGraph, extra: Optional[Tuple[str, ...]] = None) -> Tuple[str, ...]:
    """Smallest-slack subset among the singletons, V and an optional extra candidate"""
    candidates = [(v,) for v in graph.vertices] + [tuple(graph.vertices)]
    if extra:
        candidates.append(extra)
    return min(candidates, key=lambda subset: slack(graph, subset))
