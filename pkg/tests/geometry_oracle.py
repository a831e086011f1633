"""
Independent geometric construction of a bigon on the unit sphere

Two circles are placed explicitly: center 1 at the north pole, center 2 at the
spherical distance d given by the law of cosines. Intersection points, center
angles and the corner angle are then measured from the coordinates, and the
lens area is assembled from two cap sectors and two signed isosceles triangles.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CirclePair:
    c1: np.ndarray
    c2: np.ndarray
    a: np.ndarray
    b: np.ndarray


def _angle_between(u: np.ndarray, v: np.ndarray) -> float:
    return math.atan2(float(np.linalg.norm(np.cross(u, v))), float(np.dot(u, v)))


def _direction(at: np.ndarray, towards: np.ndarray) -> np.ndarray:
    """Unit tangent at `at` of the great circle towards `towards`"""
    t = towards - np.dot(towards, at) * at
    return t / np.linalg.norm(t)


def place_circles(r1: float, r2: float, theta: float) -> CirclePair:
    cos_d = math.cos(r1) * math.cos(r2) - math.sin(r1) * math.sin(r2) * math.cos(theta)
    d = math.acos(max(-1.0, min(1.0, cos_d)))
    c1 = np.array([0.0, 0.0, 1.0])
    c2 = np.array([math.sin(d), 0.0, math.cos(d)])
    # circle i is {p : p . c_i = cos r_i}
    z = math.cos(r1)
    x = (math.cos(r2) - z * math.cos(d)) / math.sin(d)
    y = math.sqrt(max(0.0, 1.0 - x * x - z * z))
    return CirclePair(c1=c1, c2=c2, a=np.array([x, y, z]), b=np.array([x, -y, z]))


def measured_half_angles(r1: float, r2: float, theta: float):
    """Half of the angles A c1 B and A c2 B read off the coordinates"""
    pair = place_circles(r1, r2, theta)
    beta1 = _angle_between(_direction(pair.c1, pair.c2), _direction(pair.c1, pair.a))
    beta2 = _angle_between(_direction(pair.c2, pair.c1), _direction(pair.c2, pair.a))
    return beta1, beta2


def measured_corner_angle(r1: float, r2: float, theta: float) -> float:
    """Angle at A between the two circles, measured inside the lens"""
    pair = place_circles(r1, r2, theta)
    # the angle between the radii at A is the supplement of the lens corner angle
    return math.pi - _angle_between(_direction(pair.a, pair.c1), _direction(pair.a, pair.c2))


def _signed_isosceles_area(r: float, apex: float) -> float:
    t = math.tan(0.5 * r) ** 2
    return 2.0 * math.atan2(t * math.sin(apex), 1.0 + t * math.cos(apex))


def lens_area(r1: float, r2: float, theta: float) -> float:
    """Area of the intersection of the two disks"""
    total = 0.0
    for r, beta in zip((r1, r2), measured_half_angles(r1, r2, theta)):
        sector = 2.0 * beta * (1.0 - math.cos(r))
        total += sector - _signed_isosceles_area(r, 2.0 * beta)
    return total
