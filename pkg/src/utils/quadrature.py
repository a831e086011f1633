"""
Gauss-Legendre rules and straight-segment line integrals
"""

from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy import special


@lru_cache(maxsize=16)
def gauss_legendre_unit(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights of the n-point rule mapped to [0, 1]

    Returns:
        (s, w) with sum(w) == 1
    """
    if nodes < 1:
        raise ValueError(f"Quadrature node count must be positive, got {nodes}")
    x, w = special.roots_legendre(nodes)
    s = 0.5 * (x + 1.0)
    w = 0.5 * w
    s.setflags(write=False)
    w.setflags(write=False)
    return s, w


def segment_points(start: np.ndarray, end: np.ndarray, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Points of the straight segment start -> end at the quadrature nodes

    Returns:
        (points[Q, N], weights[Q])
    """
    s, w = gauss_legendre_unit(nodes)
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    points = start[None, :] + s[:, None] * (end - start)[None, :]
    return points, w


def integrate_segment(field: Callable[[np.ndarray], np.ndarray], start: np.ndarray,
                      end: np.ndarray, nodes: int) -> float:
    """
    Line integral of a vector field along the straight segment start -> end

    Args:
        field: maps points[Q, N] to field values[Q, N]
    """
    points, w = segment_points(start, end, nodes)
    direction = np.asarray(end, dtype=float) - np.asarray(start, dtype=float)
    values = field(points)
    return float(np.dot(w, values @ direction))
