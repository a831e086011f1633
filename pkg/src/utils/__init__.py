"""
Utility modules for circleflow
"""

from .config import Settings, get_settings, reset_settings
from .quadrature import gauss_legendre_unit, integrate_segment, segment_points

__all__ = [
    'Settings',
    'get_settings',
    'reset_settings',
    'gauss_legendre_unit',
    'integrate_segment',
    'segment_points',
]
