"""Global-route solution to route-guide translation.

The solution's segments live on gcell-center coordinates; guides are DBU
rectangles per routing layer. Translation rasterizes each net's segments
into per-layer gcell sets, covers every set exactly with rectangles by
row-wise run coalescing plus vertical merging of identical runs, then
optionally dilates the result by a whole number of gcells.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SegmentOffGrid, UnknownNet
from .geom import Rect
from .io.guides import RouteGuideSet
from .io.ispd08 import GlobalRouteSolution
from .model import Design, GCellGrid


@dataclass
class GCellSet:
    per_layer: dict[int, set[tuple[int, int]]] = field(default_factory=dict)

    def add(self, layer: int, gx: int, gy: int):
        self.per_layer.setdefault(layer, set()).add((gx, gy))

    def total(self) -> int:
        return sum(len(s) for s in self.per_layer.values())


def _gcell_at(grid: GCellGrid, x: int, y: int, layer: int) -> tuple[int, int]:
    if not 1 <= layer <= grid.num_layers:
        raise SegmentOffGrid(f"layer {layer} outside 1..{grid.num_layers}")
    gx, gy = grid.gcell_of(x, y)
    if not grid.in_bounds(gx, gy):
        raise SegmentOffGrid(f"point ({x},{y}) outside the gcell grid")
    return gx, gy


def segments_to_gcells(sol: GlobalRouteSolution, grid: GCellGrid) -> dict[str, GCellSet]:
    """Per-net sets of gcells traversed by the solution's segments.

    Wire segments mark every gcell between their endpoints on their layer;
    via segments mark their (gx, gy) on every layer they pass through.
    """
    out: dict[str, GCellSet] = {}
    for name, route in sol.nets.items():
        cells = GCellSet()
        for (x1, y1, l1), (x2, y2, l2) in route.segments:
            gx1, gy1 = _gcell_at(grid, x1, y1, l1)
            gx2, gy2 = _gcell_at(grid, x2, y2, l2)
            if l1 != l2:
                lo, hi = min(l1, l2), max(l1, l2)
                for layer in range(lo, hi + 1):
                    cells.add(layer, gx1, gy1)
            elif gy1 == gy2:
                for gx in range(min(gx1, gx2), max(gx1, gx2) + 1):
                    cells.add(l1, gx, gy1)
            else:
                for gy in range(min(gy1, gy2), max(gy1, gy2) + 1):
                    cells.add(l1, gx1, gy)
        out[name] = cells
    return out


def gcells_to_rects(cells: GCellSet, grid: GCellGrid) -> list[tuple[Rect, int]]:
    """Exact rectangle cover of a gcell set, as (Rect DBU, layer index).

    Each occupied row is split into maximal runs; vertically adjacent rows
    whose runs coincide are merged into one taller rectangle.
    """
    out: list[tuple[Rect, int]] = []
    for layer in sorted(cells.per_layer):
        occupied = cells.per_layer[layer]
        if not occupied:
            continue
        runs_by_row: dict[int, list[tuple[int, int]]] = {}
        for gy in sorted({gy for _, gy in occupied}):
            xs = sorted(gx for gx, gy2 in occupied if gy2 == gy)
            runs: list[tuple[int, int]] = []
            start = prev = xs[0]
            for gx in xs[1:]:
                if gx == prev + 1:
                    prev = gx
                    continue
                runs.append((start, prev))
                start = prev = gx
            runs.append((start, prev))
            runs_by_row[gy] = runs
        # merge identical runs on consecutive rows
        open_rects: dict[tuple[int, int], int] = {}  # run -> start row
        prev_gy: int | None = None
        for gy in sorted(runs_by_row):
            here = set(runs_by_row[gy])
            if prev_gy is not None and gy != prev_gy + 1:
                for run, gy0 in sorted(open_rects.items()):
                    out.append((_run_rect(grid, run, gy0, prev_gy), layer))
                open_rects = {}
            still_open: dict[tuple[int, int], int] = {}
            for run, gy0 in open_rects.items():
                if run in here:
                    still_open[run] = gy0
                    here.discard(run)
                else:
                    out.append((_run_rect(grid, run, gy0, prev_gy), layer))
            for run in here:
                still_open[run] = gy
            open_rects = still_open
            prev_gy = gy
        for run, gy0 in sorted(open_rects.items()):
            out.append((_run_rect(grid, run, gy0, prev_gy), layer))
    out.sort(key=lambda rl: (rl[1], rl[0].lo.y, rl[0].lo.x, rl[0].hi.y, rl[0].hi.x))
    return out


def _run_rect(grid: GCellGrid, run: tuple[int, int], gy0: int, gy1: int) -> Rect:
    x_lo = grid.x_origin + run[0] * grid.x_step
    x_hi = grid.x_origin + (run[1] + 1) * grid.x_step
    y_lo = grid.y_origin + gy0 * grid.y_step
    y_hi = grid.y_origin + (gy1 + 1) * grid.y_step
    return Rect.of(x_lo, y_lo, x_hi, y_hi)


def expand_guides(guides: RouteGuideSet, radius: int, grid: GCellGrid) -> RouteGuideSet:
    """Dilate every guide rect by a number of gcells, clipped to the grid."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return guides
    bounds = Rect.of(
        grid.x_origin, grid.y_origin,
        grid.x_origin + grid.x_count * grid.x_step,
        grid.y_origin + grid.y_count * grid.y_step,
    )
    out = RouteGuideSet()
    dx = radius * grid.x_step
    dy = radius * grid.y_step
    for name, rects in guides.per_net.items():
        grown = []
        for rect, layer in rects:
            g = Rect.of(rect.lo.x - dx, rect.lo.y - dy, rect.hi.x + dx, rect.hi.y + dy)
            clipped = g.clipped(bounds)
            if clipped is not None and clipped.area > 0:
                grown.append((clipped, layer))
        out.per_net[name] = grown
    return out


def _layer_name(design: Design, ordinal: int) -> str:
    tech = design.technology
    if tech is not None and tech.routing_layers:
        return tech.routing_layer(ordinal).name
    return f"M{ordinal}"


def translate(sol: GlobalRouteSolution, grid: GCellGrid, design: Design,
              radius: int = 0, default_layers: tuple[int, int] = (1, 2)) -> RouteGuideSet:
    """Full translation: solution -> per-net guide rectangles.

    Solution nets missing from the design are an error. Design nets with
    two or more pins but no routed solution get a fallback guide: the
    bounding box of their pins' gcells, emitted on default_layers.
    """
    for name in sol.nets:
        if name not in design.nets:
            raise UnknownNet(name)

    guides = RouteGuideSet()
    per_net_cells = segments_to_gcells(sol, grid)
    for name in sorted(design.nets):
        if name in per_net_cells:
            rects = gcells_to_rects(per_net_cells[name], grid)
            guides.per_net[name] = [(r, _layer_name(design, l)) for r, l in rects]
            continue
        net = design.nets[name]
        if len(net.pins) < 2:
            continue
        pts = design.net_pin_positions(net)
        gxs, gys = [], []
        for p in pts:
            gx, gy = grid.gcell_of(p.x, p.y)
            gxs.append(min(max(gx, 0), grid.x_count - 1))
            gys.append(min(max(gy, 0), grid.y_count - 1))
        lo = grid.gcell_rect(min(gxs), min(gys))
        hi = grid.gcell_rect(max(gxs), max(gys))
        bbox = lo.union(hi)
        guides.per_net[name] = [
            (bbox, _layer_name(design, l)) for l in default_layers
        ]
    return expand_guides(guides, radius, grid)
