"""Plot data extraction: placement, congestion heat, routed wires.

Emitters return plain data structures (rect lists, ratio matrices)
plus a portable-pixmap renderer for the congestion heat map, keeping
the package free of plotting-library dependencies. All outputs are
deterministically ordered.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..check.congestion import CongestionMap
from ..errors import UnknownLayer
from ..geom import Rect
from ..model import Design, instance_bbox

# ordinal -> wire color, cycling for stacks deeper than the palette
_LAYER_PALETTE = (
    (0, 0, 255), (0, 255, 255), (0, 255, 0),
    (255, 255, 0), (255, 0, 0), (255, 165, 0),
)

_CLOCK_PIN_NAMES = frozenset({"CK", "CLK", "CP", "G", "GN", "E"})


@dataclass
class PlacementPlot:
    die: Rect
    rects: list[tuple[str, Rect, str]] = field(default_factory=list)


@dataclass
class CongestionPlot:
    layer: int
    ratios: list[list[float]]  # [gx][gy] worst outgoing usage/capacity

    def to_ppm(self) -> bytes:
        """Binary portable pixmap, one pixel per gcell, top row = max gy."""
        width = len(self.ratios)
        height = len(self.ratios[0]) if width else 0
        rows = []
        for gy in range(height - 1, -1, -1):
            row = bytearray()
            for gx in range(width):
                row.extend(_heat_color(self.ratios[gx][gy]))
            rows.append(bytes(row))
        header = f"P6\n{width} {height}\n255\n".encode()
        return header + b"".join(rows)


@dataclass
class RoutedPlot:
    die: Rect
    layers: dict[str, list[Rect]] = field(default_factory=dict)
    colors: dict[str, tuple[int, int, int]] = field(default_factory=dict)


def _heat_color(t: float) -> tuple[int, int, int]:
    """Blue through green and yellow to red over t in [0, 1]."""
    t = 0.0 if t < 0 else 1.0 if t > 1 else t
    if t < 1 / 3:
        f = t * 3
        return (0, int(round(255 * f)), int(round(255 * (1 - f))))
    if t < 2 / 3:
        return (int(round(255 * (t * 3 - 1))), 255, 0)
    return (255, int(round(255 * (3 - t * 3))), 0)


def _is_sequential(design: Design, inst, library=None) -> bool:
    if library is not None and inst.master_name in library.cells:
        return library.cells[inst.master_name].is_sequential
    master = inst.master
    if master is not None:
        return any(p.name.upper() in _CLOCK_PIN_NAMES for p in master.pins)
    return False


def emit_placement_plot(design: Design, library=None) -> PlacementPlot:
    """Instance outlines split into sequential and combinational classes.

    The liberty library decides the class when given; otherwise a cell
    with a conventional clock-pin name counts as sequential. Unplaced
    instances raise Unplaced.
    """
    plot = PlacementPlot(die=design.die_area)
    for name in sorted(design.instances):
        inst = design.instances[name]
        cls = "sequential" if _is_sequential(design, inst, library) \
            else "combinational"
        plot.rects.append((name, instance_bbox(inst), cls))
    return plot


def emit_congestion_plot(cmap: CongestionMap, layer: int) -> CongestionPlot:
    """Per-gcell worst usage/capacity ratio for one routing layer.

    Each gcell reports the fuller of its outgoing right and up edges;
    a used edge with zero capacity reads as 2.0. Layers are 1-based
    ordinals; anything outside the map raises UnknownLayer.
    """
    if not isinstance(layer, int) or not 1 <= layer <= cmap.num_layers:
        raise UnknownLayer(layer)
    grid = cmap.grid
    h_use = cmap.horizontal_usage[layer - 1]
    h_cap = cmap.horizontal_capacity[layer - 1]
    v_use = cmap.vertical_usage[layer - 1]
    v_cap = cmap.vertical_capacity[layer - 1]

    def ratio(use, cap):
        if cap > 0:
            return use / cap
        return 0.0 if use == 0 else 2.0

    ratios = []
    for gx in range(grid.x_count):
        col = []
        for gy in range(grid.y_count):
            worst = 0.0
            if gx + 1 < grid.x_count:
                worst = max(worst, ratio(int(h_use[gx, gy]),
                                         int(h_cap[gx, gy])))
            if gy + 1 < grid.y_count:
                worst = max(worst, ratio(int(v_use[gx, gy]),
                                         int(v_cap[gx, gy])))
            col.append(worst)
        ratios.append(col)
    return CongestionPlot(layer=layer, ratios=ratios)


def emit_routed_plot(design: Design) -> RoutedPlot:
    """Wire rectangles per layer with a stable layer-to-color assignment."""
    tech = design.technology
    plot = RoutedPlot(die=design.die_area)
    if tech is not None:
        for i, layer in enumerate(tech.routing_layers):
            plot.layers[layer.name] = []
            plot.colors[layer.name] = _LAYER_PALETTE[i % len(_LAYER_PALETTE)]
    for name in sorted(design.nets):
        for shape in design.nets[name].routing:
            if shape.kind != "wire":
                continue
            rect = shape.wire_rect()
            if shape.width == 0 and tech is not None \
                    and tech.has_layer(shape.layer):
                half = tech.layer(shape.layer).width // 2
                rect = Rect.of(rect.lo.x - half, rect.lo.y - half,
                               rect.hi.x + half, rect.hi.y + half)
            plot.layers.setdefault(shape.layer, []).append(rect)
            plot.colors.setdefault(
                shape.layer,
                _LAYER_PALETTE[len(plot.colors) % len(_LAYER_PALETTE)])
    return plot
