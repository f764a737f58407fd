"""Net connectivity: contact graph over wire, via, and pin shapes."""

from __future__ import annotations

from ..geom import Rect
from ..model import Design, Net, instance_pin_shapes
from . import Violation, sorted_violations


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _net_shapes(design: Design, net: Net):
    """(layer, rect, pin_index) triples plus a group id per triple.

    pin_index is None for routing metal. Shapes emitted together (all
    rects of one via, all rects of one pin) share a group id: a via's
    shapes bridge its bottom and top layers through the shared group.
    """
    tech = design.technology
    shapes: list[tuple[str, Rect, int | None]] = []
    groups: list[int] = []
    gid = 0

    def put(layer: str, rect: Rect, pin_idx: int | None):
        shapes.append((layer, rect, pin_idx))
        groups.append(gid)

    for rs in net.routing:
        if rs.kind == "wire":
            width = rs.width
            if width <= 0 and tech.has_layer(rs.layer):
                width = tech.layer(rs.layer).width
            h = width // 2
            rect = Rect.of(
                min(rs.start.x, rs.end.x) - h, min(rs.start.y, rs.end.y) - h,
                max(rs.start.x, rs.end.x) + h, max(rs.start.y, rs.end.y) + h)
            put(rs.layer, rect, None)
        else:
            via = tech.vias.get(rs.via_name)
            if via is not None:
                for lname, rects in via.shapes.items():
                    for r in rects:
                        put(lname, r.translated(rs.start.x, rs.start.y), None)
        gid += 1

    for idx, np in enumerate(net.pins):
        if np.instance is None:
            port = design.ports.get(np.pin)
            if port is not None and port.layer is not None \
                    and port.shape is not None and port.location is not None:
                put(port.layer,
                    port.shape.translated(port.location.x, port.location.y), idx)
        else:
            inst = design.instances[np.instance]
            if inst.placed and inst.master is not None:
                for lname, r in instance_pin_shapes(inst, np.pin):
                    put(lname, r, idx)
        gid += 1
    return shapes, groups


def check_connectivity(design: Design, net: Net) -> list[Violation]:
    """Open violations: one per pin component beyond the largest.

    Same-layer shapes connect when they touch or overlap; a via's own
    shapes connect its bottom and top routing layers. A pin whose
    geometry cannot be found is reported as its own open.
    """
    if len(net.pins) < 2:
        return []
    shapes, groups = _net_shapes(design, net)
    n = len(shapes)
    uf = _UnionFind(n)
    first_of_group: dict[int, int] = {}
    for i in range(n):
        g = groups[i]
        if g in first_of_group:
            uf.union(first_of_group[g], i)
        else:
            first_of_group[g] = i
    for i in range(n):
        layer_i, rect_i, _ = shapes[i]
        for j in range(i + 1, n):
            if shapes[j][0] == layer_i and rect_i.touches(shapes[j][1]):
                uf.union(i, j)

    pin_root: dict[int, int] = {}
    pin_bbox: dict[int, Rect] = {}
    for i, (layer, rect, pin_idx) in enumerate(shapes):
        if pin_idx is None:
            continue
        pin_root[pin_idx] = uf.find(i)
        pin_bbox[pin_idx] = rect if pin_idx not in pin_bbox \
            else pin_bbox[pin_idx].union(rect)

    components: dict[int, list[int]] = {}
    for pin_idx in sorted(pin_root):
        components.setdefault(pin_root[pin_idx], []).append(pin_idx)

    violations = []
    if components:
        comp_list = sorted(components.values(), key=lambda p: (-len(p), p))
        for pins in comp_list[1:]:
            bbox = pin_bbox[pins[0]]
            for p in pins[1:]:
                bbox = bbox.union(pin_bbox[p])
            violations.append(Violation(
                kind="open", location=bbox, nets=(net.name,),
                instances=tuple(sorted(
                    net.pins[p].instance or net.pins[p].pin for p in pins))))
    for idx, np in enumerate(net.pins):
        if idx not in pin_root:
            violations.append(Violation(
                kind="open", location=Rect.of(0, 0, 0, 0), nets=(net.name,),
                instances=(np.instance or np.pin,)))
    return sorted_violations(violations)
