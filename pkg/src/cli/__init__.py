"""
Command-line surface for circleflow: pattern files, reports and built-in examples
"""

from .commands import build_parser, dispatch, run
from .examples import EXAMPLE_NAMES, get_example, random_pattern
from .pattern_file import PatternDocument, emit_pattern, load_pattern, parse_pattern, write_pattern
from .reports import RunReport

__all__ = [
    'build_parser',
    'dispatch',
    'run',
    'EXAMPLE_NAMES',
    'get_example',
    'random_pattern',
    'PatternDocument',
    'emit_pattern',
    'load_pattern',
    'parse_pattern',
    'write_pattern',
    'RunReport',
]
