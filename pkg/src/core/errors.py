"""
Exception hierarchy for circleflow
Report-style operations return flags instead of raising; these cover misuse
and malformed input.
"""

from typing import List, Optional


class CircleFlowError(Exception):
    """Base class for every error raised by circleflow"""


class InvalidPatternError(CircleFlowError, ValueError):
    """A pattern graph failed validation and cannot be used for computation"""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("Invalid pattern graph: " + "; ".join(self.violations))


class UnknownVertexError(CircleFlowError, KeyError):
    """A vertex identifier that the pattern graph does not declare"""

    def __init__(self, vertex: str):
        self.vertex = vertex
        super().__init__(f"Unknown vertex id: {vertex!r}")

    def __str__(self) -> str:
        return self.args[0]


class DimensionMismatchError(CircleFlowError, ValueError):
    """A per-vertex vector whose length does not match the graph"""


class DomainError(CircleFlowError, ValueError):
    """A value outside its admissible range (radius, angle, non-finite K)"""


class EnumerationLimitError(CircleFlowError, ValueError):
    """Exhaustive subset enumeration refused because N is too large"""


class RateEstimationError(CircleFlowError, ValueError):
    """Exponential rate could not be fitted to a trajectory"""


class PatternFileError(CircleFlowError, ValueError):
    """Malformed pattern file; carries the 1-based source line when known"""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.message = message
        self.line = line
        self.path = path
        super().__init__(self.diagnostic())

    def diagnostic(self) -> str:
        location = self.path or "<pattern>"
        if self.line is not None:
            location = f"{location}:{self.line}"
        return f"{location}: {self.message}"


class UnknownExampleError(CircleFlowError, ValueError):
    """A built-in example name that does not exist"""

    def __init__(self, name: str, available: List[str]):
        self.name = name
        self.available = list(available)
        super().__init__(f"Unknown example {name!r}; available: {', '.join(self.available)}")
