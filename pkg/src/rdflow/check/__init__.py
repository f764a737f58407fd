"""Design-rule, legality, connectivity, and routing-metric checkers.

All checkers are pure functions of a frozen design: equal inputs produce
identical violation lists, sorted by location then kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import UnresolvedReference
from ..geom import Rect
from ..model import Design, instance_obstructions, instance_pin_shapes

VIOLATION_KINDS = (
    "overlap", "offRow", "offSite", "outOfDie",
    "open", "short", "prlSpacing", "eolSpacing", "cutSpacing", "minArea",
)


@dataclass(frozen=True)
class Violation:
    kind: str
    location: Rect
    layer: str = ""
    nets: tuple[str, ...] = ()
    instances: tuple[str, ...] = ()
    measured: int | None = None
    required: int | None = None

    def sort_key(self):
        return (self.location.lo.y, self.location.lo.x,
                self.location.hi.y, self.location.hi.x,
                self.kind, self.layer, self.nets, self.instances)

    def line(self) -> str:
        """Machine-parseable single-line form."""
        x1, y1, x2, y2 = self.location.coords()
        fields = [self.kind, self.layer or "-", str(x1), str(y1), str(x2), str(y2),
                  str(self.measured) if self.measured is not None else "-",
                  str(self.required) if self.required is not None else "-",
                  ",".join(self.nets) or "-",
                  ",".join(self.instances) or "-"]
        return " ".join(fields)


def sorted_violations(violations: list[Violation]) -> list[Violation]:
    return sorted(violations, key=Violation.sort_key)


@dataclass(frozen=True)
class LayerShape:
    """One rectangle of metal or cut, attributed to its net and origin."""

    rect: Rect
    net: str | None  # None for obstructions
    source: str  # wire | via | pin | obs
    width: int = 0  # drawn width for wires; min dimension otherwise
    owner: str = ""  # instance name for pin/obs shapes, via name for via metal

    @property
    def lookup_width(self) -> int:
        if self.width:
            return self.width
        return min(self.rect.width, self.rect.height)


def collect_layer_shapes(design: Design) -> dict[str, list[LayerShape]]:
    """All physical shapes per layer: routing, via metal and cuts, pins,
    ports, and obstructions. Wires with unset width take the layer default."""
    tech = design.technology
    if tech is None:
        raise UnresolvedReference("technology", "shape collection")
    shapes: dict[str, list[LayerShape]] = {l.name: [] for l in tech.layers}

    def put(layer: str, shape: LayerShape):
        if layer not in shapes:
            raise UnresolvedReference(layer, "layer of a routed shape")
        shapes[layer].append(shape)

    for net in design.nets.values():
        for rs in net.routing:
            if rs.kind == "wire":
                width = rs.width or tech.layer(rs.layer).width
                r = rs.wire_rect() if rs.width else _default_wire_rect(rs, width)
                put(rs.layer, LayerShape(r, net.name, "wire", width))
            else:
                via = tech.vias.get(rs.via_name)
                if via is None:
                    raise UnresolvedReference(rs.via_name, f"via on net {net.name}")
                for lname, rects in via.shapes.items():
                    for r in rects:
                        put(lname, LayerShape(
                            r.translated(rs.start.x, rs.start.y),
                            net.name, "via", owner=rs.via_name))

    for inst in design.instances.values():
        if not inst.placed or inst.master is None:
            continue
        for pin_name in inst.master.pins:
            for lname, r in instance_pin_shapes(inst, pin_name):
                put(lname, LayerShape(r, _net_of_pin(design, inst.name, pin_name),
                                      "pin", owner=inst.name))
        for lname, r in instance_obstructions(inst):
            put(lname, LayerShape(r, None, "obs", owner=inst.name))

    for port in design.ports.values():
        if port.layer is None or port.shape is None or port.location is None:
            continue
        r = port.shape.translated(port.location.x, port.location.y)
        put(port.layer, LayerShape(r, port.net or port.name, "pin", owner=port.name))
    return shapes


def _default_wire_rect(rs, width: int) -> Rect:
    h = width // 2
    return Rect.of(
        min(rs.start.x, rs.end.x) - h, min(rs.start.y, rs.end.y) - h,
        max(rs.start.x, rs.end.x) + h, max(rs.start.y, rs.end.y) + h,
    )


def _pin_net_index(design: Design) -> dict[tuple[str, str], str]:
    index = {}
    for net in design.nets.values():
        for np in net.pins:
            if np.instance is not None:
                index[(np.instance, np.pin)] = net.name
    return index


_NET_INDEX_ATTR = "_pin_net_index_cache"


def _net_of_pin(design: Design, inst: str, pin: str) -> str | None:
    cache = getattr(design, _NET_INDEX_ATTR, None)
    if cache is None:
        cache = _pin_net_index(design)
        setattr(design, _NET_INDEX_ATTR, cache)
    return cache.get((inst, pin))


from .legality import check_legality  # noqa: E402,F401
from .connectivity import check_connectivity  # noqa: E402,F401
from .drc import check_min_area, check_shorts, check_spacing  # noqa: E402,F401
from .metrics import RouteMetrics, route_metrics  # noqa: E402,F401
from .congestion import CongestionMap, congestion_map  # noqa: E402,F401
