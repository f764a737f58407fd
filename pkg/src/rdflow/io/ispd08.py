"""Global-routing benchmark formats (2008 contest style).

Input: grid dimensions, per-layer directional capacities, wire-size
defaults, nets with absolute-coordinate pins, and capacity adjustments
that SET the capacity of single gcell edges.

Solution: per-net blocks of 3D segments between gcell-center coordinates,
terminated by '!'. Every segment varies in exactly one of x, y, layer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import AdjustmentOutOfRange, NonAxisParallelSegment, ParseError
from ..model import GCellGrid


@dataclass
class GRNet:
    name: str
    id: int
    pins: list[tuple[int, int, int]] = field(default_factory=list)  # x, y DBU; layer 1-based
    min_width: int = 1


@dataclass
class GRRoute:
    name: str
    id: int
    segments: list[tuple[tuple[int, int, int], tuple[int, int, int]]] = field(
        default_factory=list)


@dataclass
class GlobalRouteSolution:
    nets: dict[str, GRRoute] = field(default_factory=dict)


def _lines(text: str) -> list[tuple[str, int]]:
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s and not s.startswith("#"):
            out.append((s, i))
    return out


def _ints(parts: list[str], line: int) -> list[int]:
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ParseError(f"expected integers, got {' '.join(parts)!r}", line) from None


def parse_gr_input(text: str) -> tuple[GCellGrid, list[GRNet]]:
    lines = _lines(text)
    pos = 0

    def need(what: str) -> tuple[str, int]:
        nonlocal pos
        if pos >= len(lines):
            last = lines[-1][1] if lines else 1
            raise ParseError(f"unexpected end of input, expected {what}", last)
        item = lines[pos]
        pos += 1
        return item

    s, ln = need("grid line")
    m = re.fullmatch(r"grid\s+(\d+)\s+(\d+)\s+(\d+)", s)
    if not m:
        raise ParseError(f"expected 'grid X Y L', got {s!r}", ln)
    x_count, y_count, num_layers = (int(g) for g in m.groups())
    if x_count < 1 or y_count < 1 or num_layers < 1:
        raise ParseError("grid dimensions must be positive", ln)

    grid = GCellGrid(x_count=x_count, y_count=y_count)

    def capacity_line(prefix: str) -> list[int]:
        s, ln = need(f"'{prefix}' line")
        if not s.startswith(prefix):
            raise ParseError(f"expected '{prefix}', got {s!r}", ln)
        vals = _ints(s[len(prefix):].split(), ln)
        if len(vals) != num_layers:
            raise ParseError(f"'{prefix}' needs {num_layers} values, got {len(vals)}", ln)
        if any(v < 0 for v in vals):
            raise ParseError(f"'{prefix}' values must be non-negative", ln)
        return vals

    grid.vertical_capacity = capacity_line("vertical capacity")
    grid.horizontal_capacity = capacity_line("horizontal capacity")
    grid.min_width = capacity_line("minimum width")
    grid.min_spacing = capacity_line("minimum spacing")
    grid.via_spacing = capacity_line("via spacing")

    s, ln = need("grid origin line")
    vals = _ints(s.split(), ln)
    if len(vals) != 4:
        raise ParseError("expected 'x y tile_width tile_height'", ln)
    grid.x_origin, grid.y_origin, grid.x_step, grid.y_step = vals
    if grid.x_step <= 0 or grid.y_step <= 0:
        raise ParseError("tile size must be positive", ln)

    s, ln = need("net count")
    m = re.fullmatch(r"num\s+net\s+(\d+)", s)
    if not m:
        raise ParseError(f"expected 'num net N', got {s!r}", ln)
    num_nets = int(m.group(1))

    nets: list[GRNet] = []
    for _ in range(num_nets):
        s, ln = need("net header")
        parts = s.split()
        if len(parts) not in (3, 4):
            raise ParseError(f"expected 'name id num_pins [min_width]', got {s!r}", ln)
        name = parts[0]
        nid, num_pins = _ints(parts[1:3], ln)
        min_width = _ints(parts[3:4], ln)[0] if len(parts) == 4 else 1
        if num_pins < 1:
            raise ParseError(f"net '{name}' needs at least one pin", ln)
        net = GRNet(name=name, id=nid, min_width=min_width)
        for _ in range(num_pins):
            s2, ln2 = need("pin line")
            vals = _ints(s2.split(), ln2)
            if len(vals) != 3:
                raise ParseError(f"expected 'x y layer', got {s2!r}", ln2)
            x, y, layer = vals
            if not 1 <= layer <= num_layers:
                raise ParseError(f"pin layer {layer} outside 1..{num_layers}", ln2)
            gx, gy = grid.gcell_of(x, y)
            if not grid.in_bounds(gx, gy):
                raise ParseError(f"pin ({x},{y}) falls outside the grid", ln2)
            net.pins.append((x, y, layer))
        nets.append(net)

    if pos < len(lines):
        s, ln = need("adjustment count")
        vals = _ints(s.split(), ln)
        if len(vals) != 1:
            raise ParseError(f"expected adjustment count, got {s!r}", ln)
        for _ in range(vals[0]):
            s2, ln2 = need("adjustment line")
            a = _ints(s2.split(), ln2)
            if len(a) != 7:
                raise ParseError("expected 'x1 y1 l1 x2 y2 l2 capacity'", ln2)
            x1, y1, l1, x2, y2, l2, cap = a
            if l1 != l2:
                raise ParseError("adjustment endpoints must share a layer", ln2)
            if not 1 <= l1 <= num_layers:
                raise AdjustmentOutOfRange(f"layer {l1} outside 1..{num_layers}", ln2)
            if not (grid.in_bounds(x1, y1) and grid.in_bounds(x2, y2)):
                raise AdjustmentOutOfRange(
                    f"edge ({x1},{y1})-({x2},{y2}) outside {x_count}x{y_count} grid", ln2)
            if abs(x1 - x2) + abs(y1 - y2) != 1:
                raise ParseError("adjustment endpoints must be adjacent gcells", ln2)
            if cap < 0:
                raise ParseError("adjusted capacity must be non-negative", ln2)
            grid.adjustments[grid.edge_key(x1, y1, l1, x2, y2, l2)] = cap
    if pos < len(lines):
        raise ParseError(f"trailing input: {lines[pos][0]!r}", lines[pos][1])
    return grid, nets


def write_gr_input(grid: GCellGrid, nets: list[GRNet]) -> str:
    """Serialize a grid and net list back to the benchmark input format."""
    L = grid.num_layers
    out = [f"grid {grid.x_count} {grid.y_count} {L}"]

    def row(prefix: str, vals: list[int]) -> str:
        filled = list(vals) + [0] * (L - len(vals))
        return prefix + " " + " ".join(str(v) for v in filled)

    out.append(row("vertical capacity", grid.vertical_capacity))
    out.append(row("horizontal capacity", grid.horizontal_capacity))
    out.append(row("minimum width", grid.min_width or [1] * L))
    out.append(row("minimum spacing", grid.min_spacing or [1] * L))
    out.append(row("via spacing", grid.via_spacing or [1] * L))
    out.append(f"{grid.x_origin} {grid.y_origin} {grid.x_step} {grid.y_step}")
    out.append(f"num net {len(nets)}")
    for net in nets:
        out.append(f"{net.name} {net.id} {len(net.pins)} {net.min_width}")
        for x, y, layer in net.pins:
            out.append(f"{x} {y} {layer}")
    adjustments = sorted(grid.adjustments.items())
    out.append(str(len(adjustments)))
    for ((x1, y1, l1), (x2, y2, l2)), cap in adjustments:
        out.append(f"{x1} {y1} {l1} {x2} {y2} {l2} {cap}")
    return "\n".join(out) + "\n"


_SEG_RE = re.compile(
    r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(\d+)\s*\)\s*-\s*"
    r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(\d+)\s*\)"
)


def parse_gr_solution(text: str, num_layers: int | None = None) -> GlobalRouteSolution:
    sol = GlobalRouteSolution()
    current: GRRoute | None = None
    for s, ln in _lines(text):
        if s == "!":
            if current is None:
                raise ParseError("'!' without a net header", ln)
            if current.name in sol.nets:
                raise ParseError(f"duplicate net '{current.name}'", ln)
            sol.nets[current.name] = current
            current = None
            continue
        if current is None:
            parts = s.split()
            if len(parts) != 2:
                raise ParseError(f"expected 'name id', got {s!r}", ln)
            nid = _ints(parts[1:2], ln)[0]
            current = GRRoute(name=parts[0], id=nid)
            continue
        m = _SEG_RE.fullmatch(s)
        if not m:
            raise ParseError(f"bad segment {s!r}", ln)
        x1, y1, l1, x2, y2, l2 = (int(g) for g in m.groups())
        differs = (x1 != x2) + (y1 != y2) + (l1 != l2)
        if differs != 1:
            raise NonAxisParallelSegment(
                f"segment must vary in exactly one coordinate: {s}", ln)
        if num_layers is not None and not (1 <= l1 <= num_layers and 1 <= l2 <= num_layers):
            raise ParseError(f"segment layer outside 1..{num_layers}", ln)
        current.segments.append(((x1, y1, l1), (x2, y2, l2)))
    if current is not None:
        raise ParseError(f"net '{current.name}' not terminated by '!'",
                         _lines(text)[-1][1])
    return sol


def write_gr_solution(sol: GlobalRouteSolution) -> str:
    out: list[str] = []
    for name in sorted(sol.nets, key=lambda n: (sol.nets[n].id, n)):
        route = sol.nets[name]
        out.append(f"{route.name} {route.id}")
        for (x1, y1, l1), (x2, y2, l2) in route.segments:
            out.append(f"({x1},{y1},{l1})-({x2},{y2},{l2})")
        out.append("!")
    return "\n".join(out) + ("\n" if out else "")
