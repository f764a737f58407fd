"""rdflow: a self-contained robust design flow toolkit.

Parsers and writers for the common physical-design exchange formats, a
routing-guide translator, design-rule and connectivity checkers, a lite
static timing engine, reference implementations of the core flow stages,
and an orchestrator that sequences built-in or external point tools.
"""

__version__ = "0.1.0"

from .errors import (
    CheckError,
    DesignError,
    FlowError,
    ParseError,
    RdflowError,
    StageError,
    TimingError,
)
from .geom import Point, Rect
from .model import Design

__all__ = [
    "CheckError",
    "Design",
    "DesignError",
    "FlowError",
    "ParseError",
    "Point",
    "Rect",
    "RdflowError",
    "StageError",
    "TimingError",
    "__version__",
]
