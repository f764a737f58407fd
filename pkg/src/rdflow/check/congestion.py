"""Per-edge congestion matrices for a global-routing solution."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SegmentOffGrid
from ..io.ispd08 import GlobalRouteSolution
from ..model import GCellGrid


@dataclass
class CongestionMap:
    """Usage and capacity per gcell edge, one matrix pair per layer.

    Horizontal matrices have shape (x_count - 1, y_count), entry [gx, gy]
    for the edge between gcells (gx, gy) and (gx + 1, gy). Vertical
    matrices have shape (x_count, y_count - 1), entry [gx, gy] for the
    edge between (gx, gy) and (gx, gy + 1). Layer lists are indexed by
    routing-layer ordinal minus one.
    """

    grid: GCellGrid
    horizontal_usage: list[np.ndarray] = field(default_factory=list)
    vertical_usage: list[np.ndarray] = field(default_factory=list)
    horizontal_capacity: list[np.ndarray] = field(default_factory=list)
    vertical_capacity: list[np.ndarray] = field(default_factory=list)

    @property
    def num_layers(self) -> int:
        return len(self.horizontal_usage)

    def horizontal_overflow(self, ordinal: int) -> np.ndarray:
        return np.maximum(
            self.horizontal_usage[ordinal - 1]
            - self.horizontal_capacity[ordinal - 1], 0)

    def vertical_overflow(self, ordinal: int) -> np.ndarray:
        return np.maximum(
            self.vertical_usage[ordinal - 1]
            - self.vertical_capacity[ordinal - 1], 0)

    def total_overflow(self) -> int:
        total = 0
        for ordinal in range(1, self.num_layers + 1):
            total += int(self.horizontal_overflow(ordinal).sum())
            total += int(self.vertical_overflow(ordinal).sum())
        return total

    def total_usage(self) -> int:
        return sum(int(m.sum()) for m in self.horizontal_usage) \
            + sum(int(m.sum()) for m in self.vertical_usage)

    def overflowed_edges(self) -> int:
        count = 0
        for ordinal in range(1, self.num_layers + 1):
            count += int((self.horizontal_overflow(ordinal) > 0).sum())
            count += int((self.vertical_overflow(ordinal) > 0).sum())
        return count


def _capacity_matrices(grid: GCellGrid):
    h_cap = []
    v_cap = []
    for ordinal in range(1, grid.num_layers + 1):
        h = np.zeros((max(grid.x_count - 1, 0), grid.y_count), dtype=np.int64)
        v = np.zeros((grid.x_count, max(grid.y_count - 1, 0)), dtype=np.int64)
        if ordinal <= len(grid.horizontal_capacity):
            h[:] = grid.horizontal_capacity[ordinal - 1]
        if ordinal <= len(grid.vertical_capacity):
            v[:] = grid.vertical_capacity[ordinal - 1]
        h_cap.append(h)
        v_cap.append(v)
    for ((gx1, gy1, l1), (gx2, gy2, l2)), cap in grid.adjustments.items():
        if l1 != l2 or not 1 <= l1 <= grid.num_layers:
            continue
        if gy1 == gy2 and gx2 == gx1 + 1:
            h_cap[l1 - 1][gx1, gy1] = cap
        elif gx1 == gx2 and gy2 == gy1 + 1:
            v_cap[l1 - 1][gx1, gy1] = cap
    return h_cap, v_cap


def net_edges(route, grid: GCellGrid) -> set[tuple[str, int, int, int]]:
    """Distinct gcell edges a route crosses: ("h"|"v", ordinal, gx, gy).

    Entry ("h", l, gx, gy) is the edge (gx, gy)-(gx+1, gy) on layer l.
    Raises SegmentOffGrid for endpoints outside the grid or layer range.
    """
    edges: set[tuple[str, int, int, int]] = set()
    for (x1, y1, l1), (x2, y2, l2) in route.segments:
        gx1, gy1 = grid.gcell_of(x1, y1)
        gx2, gy2 = grid.gcell_of(x2, y2)
        for (gx, gy, layer) in ((gx1, gy1, l1), (gx2, gy2, l2)):
            if not grid.in_bounds(gx, gy):
                raise SegmentOffGrid(
                    f"net {route.name}: gcell ({gx}, {gy}) outside "
                    f"{grid.x_count}x{grid.y_count} grid")
            if not 1 <= layer <= grid.num_layers:
                raise SegmentOffGrid(
                    f"net {route.name}: layer {layer} outside 1..{grid.num_layers}")
        if l1 != l2:
            continue  # via segment, crosses no gcell edge
        if gy1 == gy2:
            for gx in range(min(gx1, gx2), max(gx1, gx2)):
                edges.add(("h", l1, gx, gy1))
        elif gx1 == gx2:
            for gy in range(min(gy1, gy2), max(gy1, gy2)):
                edges.add(("v", l1, gx1, gy))
        else:
            raise SegmentOffGrid(
                f"net {route.name}: segment ({x1}, {y1})-({x2}, {y2}) "
                "changes both gcell coordinates")
    return edges


def congestion_map(sol: GlobalRouteSolution, grid: GCellGrid) -> CongestionMap:
    """Count, per gcell edge and layer, how many nets cross it.

    A net contributes at most one unit to an edge no matter how many of
    its segments pass through.
    """
    h_cap, v_cap = _capacity_matrices(grid)
    h_usage = [np.zeros_like(m) for m in h_cap]
    v_usage = [np.zeros_like(m) for m in v_cap]
    for name in sorted(sol.nets):
        for kind, layer, gx, gy in net_edges(sol.nets[name], grid):
            if kind == "h":
                h_usage[layer - 1][gx, gy] += 1
            else:
                v_usage[layer - 1][gx, gy] += 1
    return CongestionMap(
        grid=grid,
        horizontal_usage=h_usage,
        vertical_usage=v_usage,
        horizontal_capacity=h_cap,
        vertical_capacity=v_cap,
    )
