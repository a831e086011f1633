"""
Spherical bigon trigonometry
Per-edge quantities for the lens cut out by two spherical disks of radii r1, r2
meeting at angle theta: half-angles at the centers, arc lengths, total geodesic
curvatures, area and the closed-form derivatives of (L1, L2) in (K1, K2).

The kernel works on arrays so one call evaluates every edge of a pattern (and
every quadrature node) at once.
"""

import math
from dataclasses import dataclass
from typing import Dict, Union

import numpy as np

from .errors import DomainError

HALF_PI = 0.5 * math.pi
BOUNDARY_MARGIN = 1e-12

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class BigonInput:
    """Radii in (0, pi/2) and intersection angle in (0, pi/2], radians"""
    r1: float
    r2: float
    theta: float

    def __post_init__(self) -> None:
        for name, r in (("r1", self.r1), ("r2", self.r2)):
            if not (math.isfinite(r) and BOUNDARY_MARGIN < r < HALF_PI - BOUNDARY_MARGIN):
                raise DomainError(f"{name}={r!r} is not inside (0, pi/2) away from the ends")
        if not (math.isfinite(self.theta) and 0.0 < self.theta <= HALF_PI):
            raise DomainError(f"theta={self.theta!r} is not inside (0, pi/2]")


@dataclass(frozen=True)
class BigonMeasurement:
    beta1: float
    beta2: float
    l1: float
    l2: float
    L1: float
    L2: float
    area: float
    dL1_dK1: float
    dL1_dK2: float
    dL2_dK1: float
    dL2_dK2: float


def bigon_kernel(sin1: ArrayLike, cos1: ArrayLike, cot1: ArrayLike,
                 sin2: ArrayLike, cos2: ArrayLike, cot2: ArrayLike,
                 theta: ArrayLike) -> Dict[str, np.ndarray]:
    """
    Vectorized bigon evaluation from sin, cos and cot of both radii

    The half-angle comes from the cotangent 4-part formula
        cot b1 = (cot r2 sin r1 + cos r1 cos theta) / sin theta
    evaluated with atan2 so that b1 lies in (0, pi) even when cot b1 <= 0.
    """
    sin_t = np.sin(theta)
    cos_t = np.cos(theta)
    beta1 = np.arctan2(sin_t, cot2 * sin1 + cos1 * cos_t)
    beta2 = np.arctan2(sin_t, cot1 * sin2 + cos2 * cos_t)

    L1 = 2.0 * beta1 * cos1
    L2 = 2.0 * beta2 * cos2

    # k1 k2 sin^2 r1 == cot r2 sin r1 cos r1; this form stays finite for large K
    sin_b1 = np.sin(beta1)
    cross = -2.0 * sin_b1 * sin_b1 * cot2 * sin1 * cos1 / sin_t
    column1 = cos1 * sin1 * sin1 * (2.0 * beta1 - np.sin(2.0 * beta1))
    column2 = cos2 * sin2 * sin2 * (2.0 * beta2 - np.sin(2.0 * beta2))

    return {
        "beta1": beta1,
        "beta2": beta2,
        "l1": 2.0 * beta1 * sin1,
        "l2": 2.0 * beta2 * sin2,
        "L1": L1,
        "L2": L2,
        "area": 2.0 * theta - L1 - L2,
        "dL1_dK1": column1 - cross,
        "dL1_dK2": cross,
        "dL2_dK1": cross,
        "dL2_dK2": column2 - cross,
    }


def trig_from_k(k: ArrayLike):
    """(sin r, cos r, cot r) for r = arccot(exp K), without forming r"""
    cot = np.exp(k)
    norm = np.hypot(1.0, cot)
    return 1.0 / norm, cot / norm, cot


def trig_from_r(r: ArrayLike):
    sin = np.sin(r)
    cos = np.cos(r)
    return sin, cos, cos / sin


def half_angle(bigon: BigonInput, which: int = 1) -> float:
    """Half of the angle subtended at center 1 (or 2) by the two intersection points"""
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which!r}")
    s1, c1, k1 = trig_from_r(bigon.r1)
    s2, c2, k2 = trig_from_r(bigon.r2)
    if which == 1:
        return float(np.arctan2(math.sin(bigon.theta), k2 * s1 + c1 * math.cos(bigon.theta)))
    return float(np.arctan2(math.sin(bigon.theta), k1 * s2 + c2 * math.cos(bigon.theta)))


def measure(bigon: BigonInput) -> BigonMeasurement:
    """All per-edge quantities of one bigon"""
    values = bigon_kernel(*trig_from_r(bigon.r1), *trig_from_r(bigon.r2), bigon.theta)
    return BigonMeasurement(**{name: float(value) for name, value in values.items()})
