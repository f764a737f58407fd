"""Global placement: seeded random spread, then exact per-cell median moves.

Each pass visits movable cells in name order and slides one cell at a time
to the position minimizing the summed half-perimeter of its nets, holding
everything else still. That single-cell subproblem is a convex piecewise
linear function per axis, so the optimum sits on a breakpoint and can be
found exactly by evaluating the candidate set. Total wirelength never
increases, and the loop stops at the first pass without improvement.

The result is intentionally not legal; overlap removal is the legalizer's
job.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..errors import DesignError, InsufficientArea
from ..geom import Point
from ..model import Design, instance_pin_shapes


@dataclass(frozen=True)
class PlacementResult:
    """Locations for every instance plus the resulting half-perimeter sum."""

    locations: dict[str, Point] = field(default_factory=dict)
    orientations: dict[str, str] = field(default_factory=dict)
    hpwl: int = 0


class _NetView:
    """One net as the optimizer sees it: fixed points plus movable taps."""

    __slots__ = ("fixed_x", "fixed_y", "taps")

    def __init__(self):
        self.fixed_x: list[int] = []
        self.fixed_y: list[int] = []
        self.taps: list[tuple[str, int, int]] = []  # (instance, off_x, off_y)


def _pin_offset(inst) -> dict[str, tuple[int, int]]:
    """Pin-center offsets from the instance origin, for orientation N."""
    out = {}
    m = inst.master
    for name, pin in m.pins.items():
        if pin.shapes:
            c = pin.shapes[0][1].center()
            out[name] = (c.x, c.y)
        else:
            out[name] = (m.width // 2, m.height // 2)
    return out


def _build_views(design: Design, movable: dict[str, object]):
    offsets = {name: _pin_offset(inst) for name, inst in movable.items()}
    views: list[_NetView] = []
    by_inst: dict[str, list[_NetView]] = {name: [] for name in movable}
    for net in design.nets.values():
        if len(net.pins) < 2:
            continue
        view = _NetView()
        for np in net.pins:
            if np.instance is not None and np.instance in movable:
                off = offsets[np.instance].get(np.pin, (0, 0))
                view.taps.append((np.instance, off[0], off[1]))
                continue
            if np.instance is None:
                port = design.ports.get(np.pin)
                if port is None or port.location is None:
                    continue
                view.fixed_x.append(port.location.x)
                view.fixed_y.append(port.location.y)
            else:
                inst = design.instances[np.instance]
                if not inst.placed:
                    continue
                shapes = instance_pin_shapes(inst, np.pin)
                if shapes:
                    c = shapes[0][1].center()
                else:
                    c = Point(inst.location.x + inst.master.width // 2,
                              inst.location.y + inst.master.height // 2)
                view.fixed_x.append(c.x)
                view.fixed_y.append(c.y)
        if view.taps:
            views.append(view)
            for name in {t[0] for t in view.taps}:
                by_inst[name].append(view)
    return views, by_inst


def _axis_span(view: _NetView, pos: dict[str, tuple[int, int]], axis: int) -> int:
    lo = hi = None
    fixed = view.fixed_x if axis == 0 else view.fixed_y
    for v in fixed:
        lo = v if lo is None else min(lo, v)
        hi = v if hi is None else max(hi, v)
    for name, ox, oy in view.taps:
        v = pos[name][axis] + (ox if axis == 0 else oy)
        lo = v if lo is None else min(lo, v)
        hi = v if hi is None else max(hi, v)
    return 0 if lo is None else hi - lo


def _best_axis_position(name: str, views: list[_NetView],
                        pos: dict[str, tuple[int, int]], axis: int,
                        lo_bound: int, hi_bound: int) -> int:
    """Exact 1-D optimum for one cell along one axis, within bounds."""
    # per net: the span of everything that is not this cell, plus the
    # offsets of this cell's own taps on it
    terms = []
    candidates = set()
    for view in views:
        own = []
        lo = hi = None
        fixed = view.fixed_x if axis == 0 else view.fixed_y
        for v in fixed:
            lo = v if lo is None else min(lo, v)
            hi = v if hi is None else max(hi, v)
        for tname, ox, oy in view.taps:
            off = ox if axis == 0 else oy
            if tname == name:
                own.append(off)
                continue
            v = pos[tname][axis] + off
            lo = v if lo is None else min(lo, v)
            hi = v if hi is None else max(hi, v)
        if not own:
            continue
        terms.append((lo, hi, min(own), max(own)))
        if lo is not None:
            for off in (min(own), max(own)):
                candidates.add(min(max(lo - off, lo_bound), hi_bound))
                candidates.add(min(max(hi - off, lo_bound), hi_bound))
    cur = pos[name][axis]
    candidates.add(min(max(cur, lo_bound), hi_bound))

    def cost(x: int) -> int:
        total = 0
        for lo, hi, omin, omax in terms:
            a = x + omin
            b = x + omax
            if lo is not None:
                a = min(a, lo)
                b = max(b, hi)
            total += b - a
        return total

    best = min(sorted(candidates), key=lambda x: (cost(x), x))
    return best


def place_global(design: Design, iterations: int = 20, seed: int = 1) -> PlacementResult:
    """Spread movable cells randomly, then iterate exact single-cell moves.

    iterations bounds the number of full passes; the loop exits early once
    a pass makes no move. Fixed instances and located ports anchor the
    optimization.
    """
    design.require_frozen()
    if not design.rows:
        raise DesignError("global placement requires rows")
    die = design.die_area

    cell_area = 0
    movable: dict[str, object] = {}
    for inst in design.instances.values():
        if inst.master is None:
            raise DesignError(f"instance '{inst.name}' has no master")
        cell_area += inst.master.width * inst.master.height
    row_area = sum(r.num_sites * r.site_width * r.site_height for r in design.rows)
    if cell_area > row_area:
        raise InsufficientArea(
            f"cell area {cell_area} exceeds row area {row_area}")
    for name in sorted(design.instances):
        inst = design.instances[name]
        if inst.status != "fixed":
            movable[name] = inst

    rng = random.Random(seed)
    pos: dict[str, tuple[int, int]] = {}
    for name in sorted(movable):
        inst = movable[name]
        xr = max(die.lo.x, die.hi.x - inst.master.width)
        yr = max(die.lo.y, die.hi.y - inst.master.height)
        x = die.lo.x if xr <= die.lo.x else rng.randrange(die.lo.x, xr + 1)
        y = die.lo.y if yr <= die.lo.y else rng.randrange(die.lo.y, yr + 1)
        pos[name] = (x, y)

    views, by_inst = _build_views(design, movable)

    names = sorted(movable)
    for _ in range(max(0, iterations)):
        moved = False
        for name in names:
            inst = movable[name]
            vlist = by_inst[name]
            if not vlist:
                continue
            xb = _best_axis_position(
                name, vlist, pos, 0,
                die.lo.x, max(die.lo.x, die.hi.x - inst.master.width))
            yb = _best_axis_position(
                name, vlist, pos, 1,
                die.lo.y, max(die.lo.y, die.hi.y - inst.master.height))
            if (xb, yb) != pos[name]:
                pos[name] = (xb, yb)
                moved = True
        if not moved:
            break

    locations = {}
    orientations = {}
    for name, inst in design.instances.items():
        if name in pos:
            locations[name] = Point(pos[name][0], pos[name][1])
            orientations[name] = inst.orientation or "N"
        else:
            locations[name] = inst.location
            orientations[name] = inst.orientation or "N"
    hpwl = sum(_axis_span(v, pos, 0) + _axis_span(v, pos, 1) for v in views)
    # nets with no movable taps still contribute their fixed span
    for net in design.nets.values():
        pts_x, pts_y = [], []
        for np in net.pins:
            if np.instance is not None and np.instance in movable:
                pts_x = []
                break
            if np.instance is None:
                port = design.ports.get(np.pin)
                if port is not None and port.location is not None:
                    pts_x.append(port.location.x)
                    pts_y.append(port.location.y)
            else:
                inst = design.instances[np.instance]
                if inst.placed:
                    shapes = instance_pin_shapes(inst, np.pin)
                    c = (shapes[0][1].center() if shapes
                         else Point(inst.location.x + inst.master.width // 2,
                                    inst.location.y + inst.master.height // 2))
                    pts_x.append(c.x)
                    pts_y.append(c.y)
        if len(pts_x) >= 2:
            hpwl += (max(pts_x) - min(pts_x)) + (max(pts_y) - min(pts_y))
    return PlacementResult(locations=locations, orientations=orientations, hpwl=hpwl)


def apply_placement(design: Design, result: PlacementResult) -> Design:
    """Write a placement back into the design (fixed instances keep theirs)."""
    for name, inst in design.instances.items():
        if inst.status == "fixed":
            continue
        loc = result.locations.get(name)
        if loc is None:
            continue
        inst.location = loc
        inst.orientation = result.orientations.get(name, inst.orientation or "N")
        inst.status = "placed"
    return design
