"""Cell timing library model: cells, pins, arcs, and NLDM lookup tables.

Internal units are picoseconds and femtofarads regardless of what the
source library declared; the parser normalizes on the way in.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .errors import TimingError


@dataclass
class LookupTable:
    """2-D NLDM table indexed by (input slew, output load).

    Both axes must be strictly increasing. Queries clamp to the table's
    convex hull, then interpolate bilinearly; a 1-point axis is constant
    along that axis.
    """

    slew_axis: list[float]
    load_axis: list[float]
    values: list[list[float]]  # values[i][j] at (slew_axis[i], load_axis[j])

    def __post_init__(self):
        if not self.slew_axis or not self.load_axis:
            raise TimingError("lookup table with an empty axis")
        if len(self.values) != len(self.slew_axis):
            raise TimingError("lookup table row count does not match slew axis")
        for row in self.values:
            if len(row) != len(self.load_axis):
                raise TimingError("lookup table column count does not match load axis")
        for axis in (self.slew_axis, self.load_axis):
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise TimingError("lookup table axis is not strictly increasing")

    @staticmethod
    def constant(v: float) -> "LookupTable":
        return LookupTable([0.0], [0.0], [[v]])

    @staticmethod
    def _bracket(axis: list[float], x: float) -> tuple[int, int, float]:
        """Indices (i0, i1) and fraction t for clamped interpolation."""
        if len(axis) == 1 or x <= axis[0]:
            return 0, 0, 0.0
        if x >= axis[-1]:
            return len(axis) - 1, len(axis) - 1, 0.0
        i1 = bisect.bisect_right(axis, x)
        i0 = i1 - 1
        t = (x - axis[i0]) / (axis[i1] - axis[i0])
        return i0, i1, t

    def lookup(self, slew: float, load: float) -> float:
        i0, i1, ti = self._bracket(self.slew_axis, slew)
        j0, j1, tj = self._bracket(self.load_axis, load)
        v = self.values
        v0 = v[i0][j0] + (v[i0][j1] - v[i0][j0]) * tj
        v1 = v[i1][j0] + (v[i1][j1] - v[i1][j0]) * tj
        return v0 + (v1 - v0) * ti

    def maxed_with(self, other: "LookupTable") -> "LookupTable":
        """Element-wise max of two tables on identical axes."""
        if self.slew_axis != other.slew_axis or self.load_axis != other.load_axis:
            raise TimingError("cannot merge lookup tables with different axes")
        merged = [
            [max(a, b) for a, b in zip(ra, rb)]
            for ra, rb in zip(self.values, other.values)
        ]
        return LookupTable(list(self.slew_axis), list(self.load_axis), merged)


@dataclass
class TimingArc:
    """Delay and output-slew surfaces from one input pin to one output pin.

    Rise and fall are merged pessimistically (element-wise max) when the
    library provides both, so one arc carries one delay and one slew table.
    """

    from_pin: str
    to_pin: str
    delay: LookupTable
    out_slew: LookupTable
    timing_sense: str = "unknown"
    timing_type: str = "combinational"

    @property
    def is_clock_edge(self) -> bool:
        return self.timing_type in ("rising_edge", "falling_edge")


@dataclass
class LibPin:
    name: str
    direction: str  # input | output | inout
    capacitance: float = 0.0  # fF
    max_capacitance: float = 0.0
    is_clock: bool = False


@dataclass
class LibCell:
    name: str
    area: float = 0.0
    leakage_power: float = 0.0
    is_sequential: bool = False
    pins: dict[str, LibPin] = field(default_factory=dict)
    arcs: list[TimingArc] = field(default_factory=list)
    clock_pin: str = ""  # sequential cells: the pin that clocks the flop
    data_pins: tuple[str, ...] = ()  # sequential cells: setup-checked inputs

    def input_pins(self) -> list[LibPin]:
        return [p for p in self.pins.values() if p.direction == "input"]

    def output_pins(self) -> list[LibPin]:
        return [p for p in self.pins.values() if p.direction == "output"]

    def arcs_to(self, out_pin: str) -> list[TimingArc]:
        return [a for a in self.arcs if a.to_pin == out_pin]


@dataclass
class TimingLibrary:
    name: str
    time_unit_ps: float = 1.0  # ps per library time unit, after normalization
    cap_unit_ff: float = 1.0
    cells: dict[str, LibCell] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def cell(self, name: str) -> LibCell:
        try:
            return self.cells[name]
        except KeyError:
            raise TimingError(f"cell '{name}' not in library '{self.name}'") from None

    def sequential_cells(self) -> list[LibCell]:
        return [c for c in self.cells.values() if c.is_sequential]
