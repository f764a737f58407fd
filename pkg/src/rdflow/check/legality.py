"""Placement legality: overlaps, row/site alignment, die containment."""

from __future__ import annotations

from ..errors import UnplacedInstance
from ..geom import Rect
from ..model import Design, instance_bbox
from . import Violation, sorted_violations


def check_legality(design: Design) -> list[Violation]:
    """Report instance-placement violations.

    Overlap detection sweeps instances in x order; alignment checks verify
    the origin sits on a row (with the height an exact multiple of the row
    height, so taller cells spanning several rows are legal), the x origin
    on a site boundary of that row, and the footprint inside the die.
    """
    for inst in design.instances.values():
        if not inst.placed:
            raise UnplacedInstance(f"instance '{inst.name}' is not placed")

    violations: list[Violation] = []
    boxes = [(instance_bbox(inst), inst.name) for inst in design.instances.values()]

    # pairwise overlaps via x-sweep
    order = sorted(boxes, key=lambda bn: (bn[0].lo.x, bn[0].lo.y, bn[1]))
    active: list[tuple[Rect, str]] = []
    for box, name in order:
        still = []
        for obox, oname in active:
            if obox.hi.x <= box.lo.x:
                continue
            still.append((obox, oname))
            inter = box.intersection(obox)
            if inter is not None and inter.area > 0:
                pair = tuple(sorted((name, oname)))
                violations.append(Violation(
                    kind="overlap", location=inter, instances=pair))
        active = still
        active.append((box, name))

    rows_by_y: dict[int, list] = {}
    for row in design.rows:
        rows_by_y.setdefault(row.origin.y, []).append(row)
    row_height = design.rows[0].site_height if design.rows else 0

    for inst in design.instances.values():
        box = instance_bbox(inst)
        x, y = inst.location.x, inst.location.y
        h = inst.master.height

        if design.rows:
            on_row = y in rows_by_y
            height_ok = row_height > 0 and h % row_height == 0
            if not on_row or not height_ok:
                violations.append(Violation(
                    kind="offRow", location=box, instances=(inst.name,),
                    measured=y, required=None))
            else:
                # site alignment against a row actually containing the origin
                aligned = False
                covering = [r for r in rows_by_y[y]
                            if r.origin.x <= x and box.hi.x <= r.x_end]
                for r in covering:
                    if r.site_width > 0 and (x - r.origin.x) % r.site_width == 0:
                        aligned = True
                        break
                if not aligned:
                    violations.append(Violation(
                        kind="offSite", location=box, instances=(inst.name,),
                        measured=x, required=None))

        if not design.die_area.contains_rect(box):
            violations.append(Violation(
                kind="outOfDie", location=box, instances=(inst.name,)))
    return sorted_violations(violations)
