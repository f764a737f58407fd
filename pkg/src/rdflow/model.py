"""Central design database: technology, cell masters, netlist, placement, routing.

Every parser populates this model, every checker and stage reads it, and the
writers serialize it back out. Coordinates are integer DBU; the DBU scale
comes from the DEF UNITS statement and must agree with the LEF-derived one.

A Design is mutable while being built, then frozen. Checkers demand a frozen
design; stages work on unfrozen ones and the orchestrator freezes at the
boundaries where checks run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

from .errors import DesignError, FrozenDesign, Unplaced, UnresolvedReference
from .geom import ORIENTATIONS, Point, Rect, orient_rect


@dataclass
class SpacingTable:
    """LEF SPACINGTABLE PARALLELRUNLENGTH semantics.

    Row i applies to pairs whose max width is >= width[i]; column j applies
    when the parallel run length is >= prl[j]. Lookup takes the last
    applicable row/column, so both axes must be ascending and start at 0.
    """

    prl: list[int] = field(default_factory=lambda: [0])
    width: list[int] = field(default_factory=lambda: [0])
    spacing: list[list[int]] = field(default_factory=lambda: [[0]])

    @staticmethod
    def uniform(s: int) -> "SpacingTable":
        return SpacingTable(prl=[0], width=[0], spacing=[[s]])

    def lookup(self, max_width: int, prl: int) -> int:
        i = 0
        for k, w in enumerate(self.width):
            if max_width >= w:
                i = k
        j = 0
        for k, p in enumerate(self.prl):
            if prl >= p:
                j = k
        return self.spacing[i][j]

    def max_spacing(self) -> int:
        return max(max(row) for row in self.spacing)


@dataclass
class Layer:
    name: str
    kind: str  # "routing" | "cut"
    index: int  # 1-based position in the full stack
    direction: str = "horizontal"  # routing layers: preferred direction
    pitch: int = 0
    width: int = 0
    min_area: int = 0  # DBU^2
    spacing_prl: SpacingTable = field(default_factory=SpacingTable)
    # (eol_spacing, eol_width, eol_within); all zero when the layer has no EOL rule
    spacing_eol: tuple[int, int, int] = (0, 0, 0)
    cut_spacing: int = 0  # cut layers only

    @property
    def is_routing(self) -> bool:
        return self.kind == "routing"


@dataclass
class ViaMaster:
    """Fixed via from a LEF VIA statement: one cut between two routing layers."""

    name: str
    bottom_layer: str = ""
    cut_layer: str = ""
    top_layer: str = ""
    # rects in via-local coordinates keyed by layer name
    shapes: dict[str, list[Rect]] = field(default_factory=dict)


@dataclass
class Site:
    name: str
    width: int = 0
    height: int = 0


@dataclass
class MasterPin:
    name: str
    direction: str  # input | output | inout
    shapes: list[tuple[str, Rect]] = field(default_factory=list)  # (layer name, rect)


@dataclass
class CellMaster:
    name: str
    width: int = 0
    height: int = 0
    site_name: str = ""
    pins: dict[str, MasterPin] = field(default_factory=dict)
    obstructions: list[tuple[str, Rect]] = field(default_factory=list)

    def pin(self, name: str) -> MasterPin:
        try:
            return self.pins[name]
        except KeyError:
            raise UnresolvedReference(name, f"pin of master {self.name}") from None


@dataclass
class Technology:
    dbu_per_micron: int = 0
    layers: list[Layer] = field(default_factory=list)
    sites: dict[str, Site] = field(default_factory=dict)
    vias: dict[str, ViaMaster] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def layer(self, name: str) -> Layer:
        for l in self.layers:
            if l.name == name:
                return l
        raise UnresolvedReference(name, "layer")

    def has_layer(self, name: str) -> bool:
        return any(l.name == name for l in self.layers)

    @property
    def routing_layers(self) -> list[Layer]:
        return [l for l in self.layers if l.kind == "routing"]

    def routing_layer(self, ordinal: int) -> Layer:
        """Routing layer by 1-based ordinal (metal number)."""
        layers = self.routing_layers
        if not 1 <= ordinal <= len(layers):
            raise UnresolvedReference(str(ordinal), "routing layer ordinal")
        return layers[ordinal - 1]

    def routing_ordinal(self, name: str) -> int:
        for i, l in enumerate(self.routing_layers, start=1):
            if l.name == name:
                return i
        raise UnresolvedReference(name, "routing layer")

    def cut_between(self, lower_ord: int) -> Layer | None:
        """Cut layer between routing ordinals lower_ord and lower_ord+1."""
        lower = self.routing_layer(lower_ord)
        for l in self.layers:
            if l.kind == "cut" and l.index == lower.index + 1:
                return l
        return None

    def via_between(self, lower_ord: int) -> ViaMaster | None:
        lower = self.routing_layer(lower_ord)
        upper = self.routing_layer(lower_ord + 1)
        for v in self.vias.values():
            if v.bottom_layer == lower.name and v.top_layer == upper.name:
                return v
        return None


@dataclass
class Instance:
    name: str
    master_name: str
    master: CellMaster | None = None
    location: Point | None = None
    orientation: str = "N"
    status: str = "unplaced"  # unplaced | placed | fixed

    @property
    def placed(self) -> bool:
        return self.status in ("placed", "fixed") and self.location is not None


@dataclass
class RouteShape:
    """One routed element of a net: an axis-parallel wire or a via."""

    kind: str  # "wire" | "via"
    layer: str  # wire: routing layer; via: cut layer
    start: Point = Point(0, 0)
    end: Point = Point(0, 0)  # vias: end == start
    width: int = 0  # wires only; vias use the via master geometry
    via_name: str = ""  # vias only

    def wire_rect(self) -> Rect:
        """Metal footprint of a wire (centerline inflated by half width)."""
        h = self.width // 2
        return Rect.of(
            min(self.start.x, self.end.x) - h,
            min(self.start.y, self.end.y) - h,
            max(self.start.x, self.end.x) + h,
            max(self.start.y, self.end.y) + h,
        )

    def length(self) -> int:
        return abs(self.end.x - self.start.x) + abs(self.end.y - self.start.y)


@dataclass
class NetPin:
    """Connection point: an instance pin, or a top-level port (instance None)."""

    instance: str | None
    pin: str

    def key(self) -> str:
        return self.pin if self.instance is None else f"{self.instance}/{self.pin}"


@dataclass
class Net:
    name: str
    pins: list[NetPin] = field(default_factory=list)
    routing: list[RouteShape] = field(default_factory=list)
    guide: list[tuple[Rect, str]] | None = None


@dataclass
class Port:
    name: str
    direction: str  # input | output | inout
    net: str = ""  # the net this port drives or loads (defaults to its own name)
    location: Point | None = None
    layer: str | None = None
    shape: Rect | None = None  # pad geometry relative to location


@dataclass
class Row:
    name: str
    site_name: str
    origin: Point = Point(0, 0)
    num_sites: int = 1
    site_width: int = 0
    site_height: int = 0
    orientation: str = "N"

    def x_at(self, site: int) -> int:
        return self.origin.x + site * self.site_width

    @property
    def x_end(self) -> int:
        return self.origin.x + self.num_sites * self.site_width


@dataclass
class GCellGrid:
    """Global-routing grid: geometry plus per-layer directional capacities.

    Capacities are indexed by routing-layer ordinal (1-based). Adjustments
    override the capacity of individual edges; an edge is a pair of adjacent
    gcells on one layer, stored with endpoints in sorted order.
    """

    x_origin: int = 0
    y_origin: int = 0
    x_count: int = 1
    y_count: int = 1
    x_step: int = 1
    y_step: int = 1
    vertical_capacity: list[int] = field(default_factory=list)  # by layer ordinal-1
    horizontal_capacity: list[int] = field(default_factory=list)
    min_width: list[int] = field(default_factory=list)
    min_spacing: list[int] = field(default_factory=list)
    via_spacing: list[int] = field(default_factory=list)
    adjustments: dict[tuple, int] = field(default_factory=dict)

    @property
    def num_layers(self) -> int:
        return max(len(self.vertical_capacity), len(self.horizontal_capacity))

    def gcell_of(self, x: int, y: int) -> tuple[int, int]:
        """Gcell indices containing a DBU point (floor convention)."""
        return ((x - self.x_origin) // self.x_step, (y - self.y_origin) // self.y_step)

    def in_bounds(self, gx: int, gy: int) -> bool:
        return 0 <= gx < self.x_count and 0 <= gy < self.y_count

    def center_of(self, gx: int, gy: int) -> tuple[int, int]:
        return (
            self.x_origin + gx * self.x_step + self.x_step // 2,
            self.y_origin + gy * self.y_step + self.y_step // 2,
        )

    def gcell_rect(self, gx: int, gy: int) -> Rect:
        x = self.x_origin + gx * self.x_step
        y = self.y_origin + gy * self.y_step
        return Rect.of(x, y, x + self.x_step, y + self.y_step)

    @staticmethod
    def edge_key(gx1: int, gy1: int, l1: int, gx2: int, gy2: int, l2: int) -> tuple:
        a, b = (gx1, gy1, l1), (gx2, gy2, l2)
        return (a, b) if a <= b else (b, a)

    def base_capacity(self, gx1: int, gy1: int, gx2: int, gy2: int, layer: int) -> int:
        caps = self.horizontal_capacity if gy1 == gy2 else self.vertical_capacity
        if not 1 <= layer <= len(caps):
            return 0
        return caps[layer - 1]

    def edge_capacity(self, gx1: int, gy1: int, gx2: int, gy2: int, layer: int) -> int:
        key = self.edge_key(gx1, gy1, layer, gx2, gy2, layer)
        if key in self.adjustments:
            return self.adjustments[key]
        return self.base_capacity(gx1, gy1, gx2, gy2, layer)


@dataclass
class Constraints:
    clock_period: float | None = None  # ps
    clock_port: str | None = None
    input_drivers: dict[str, tuple[str, str]] = field(default_factory=dict)  # port -> (cell, pin)
    output_loads: dict[str, float] = field(default_factory=dict)  # port -> fF
    warnings: list[str] = field(default_factory=list)


class Design:
    """The in-memory design every stage reads and writes."""

    def __init__(self, name: str = "", dbu_per_micron: int = 0):
        self.name = name
        self.dbu_per_micron = dbu_per_micron
        self.die_area: Rect = Rect.of(0, 0, 0, 0)
        self.instances: dict[str, Instance] = {}
        self.nets: dict[str, Net] = {}
        self.ports: dict[str, Port] = {}
        self.rows: list[Row] = []
        self.tracks: list[tuple] = []  # (axis, start, count, step, layer name)
        self.technology: Technology | None = None
        self.gcell_grid: GCellGrid | None = None
        self.warnings: list[str] = []
        self._frozen = False

    # -- construction -------------------------------------------------

    def _check_mutable(self):
        if self._frozen:
            raise FrozenDesign("design is frozen")

    def add_instance(self, inst: Instance) -> Instance:
        self._check_mutable()
        if inst.name in self.instances:
            raise DesignError(f"duplicate instance '{inst.name}'")
        self.instances[inst.name] = inst
        return inst

    def add_net(self, net: Net) -> Net:
        self._check_mutable()
        if net.name in self.nets:
            raise DesignError(f"duplicate net '{net.name}'")
        self.nets[net.name] = net
        return net

    def add_port(self, port: Port) -> Port:
        self._check_mutable()
        self.ports[port.name] = port
        return port

    # -- freezing ------------------------------------------------------

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> "Design":
        """Validate cross-references and lock the design against mutation."""
        if not self._frozen:
            resolve_references(self)
            self._validate()
            self._frozen = True
        return self

    def unfreeze(self) -> "Design":
        self._frozen = False
        return self

    def require_frozen(self):
        if not self._frozen:
            raise DesignError("operation requires a frozen design")

    def _validate(self):
        if self.dbu_per_micron <= 0:
            raise DesignError("dbu_per_micron must be positive")
        for net in self.nets.values():
            drivers = 0
            for np in net.pins:
                if np.instance is None:
                    port = self.ports.get(np.pin)
                    if port is not None and port.direction == "input":
                        drivers += 1
                else:
                    inst = self.instances[np.instance]
                    if inst.master is not None:
                        mp = inst.master.pins.get(np.pin)
                        if mp is not None and mp.direction == "output":
                            drivers += 1
            if drivers > 1:
                raise DesignError(f"net '{net.name}' has {drivers} drivers")

    # -- geometry helpers ----------------------------------------------

    def row_height(self) -> int:
        if not self.rows:
            raise DesignError("design has no rows")
        return self.rows[0].site_height

    def pin_position(self, np: NetPin) -> Point:
        """Representative location of a net pin (shape center), in DBU."""
        if np.instance is None:
            port = self.ports.get(np.pin)
            if port is None:
                raise UnresolvedReference(np.pin, "port")
            if port.location is None:
                raise Unplaced(f"port '{np.pin}' has no location")
            return port.location
        inst = self.instances.get(np.instance)
        if inst is None:
            raise UnresolvedReference(np.instance, "instance")
        shapes = instance_pin_shapes(inst, np.pin)
        if shapes:
            return shapes[0][1].center()
        return instance_bbox(inst).center()

    def net_pin_positions(self, net: Net) -> list[Point]:
        return [self.pin_position(np) for np in net.pins]

    def hpwl(self) -> int:
        """Half-perimeter wirelength over all nets with >= 2 located pins."""
        total = 0
        for net in self.nets.values():
            pts = []
            for np in net.pins:
                try:
                    pts.append(self.pin_position(np))
                except (Unplaced, UnresolvedReference):
                    continue
            if len(pts) < 2:
                continue
            xs = [p.x for p in pts]
            ys = [p.y for p in pts]
            total += (max(xs) - min(xs)) + (max(ys) - min(ys))
        return total


# ---------------------------------------------------------------- operations


def resolve_references(design: Design) -> Design:
    """Link instance->master and net pin->instance/port by name.

    Idempotent; raises UnresolvedReference on the first dangling name.
    Masters are resolved only when a technology/master library is attached.
    """
    tech = design.technology
    if tech is not None:
        for row in design.rows:
            site = tech.sites.get(row.site_name)
            if site is None:
                continue
            if row.site_width == 0:
                row.site_width = site.width
            if row.site_height == 0:
                row.site_height = site.height
    masters = getattr(design, "masters", None)
    for inst in design.instances.values():
        if inst.master is None and masters is not None:
            master = masters.get(inst.master_name)
            if master is None:
                raise UnresolvedReference(inst.master_name, f"master of instance {inst.name}")
            inst.master = master
    for net in design.nets.values():
        for np in net.pins:
            if np.instance is None:
                if np.pin not in design.ports:
                    raise UnresolvedReference(np.pin, f"port pin of net {net.name}")
            else:
                inst = design.instances.get(np.instance)
                if inst is None:
                    raise UnresolvedReference(np.instance, f"instance pin of net {net.name}")
                if inst.master is not None and np.pin not in inst.master.pins:
                    raise UnresolvedReference(
                        np.pin, f"pin of master {inst.master.name} on net {net.name}"
                    )
    return design


def attach_masters(design: Design, masters: dict[str, CellMaster]) -> Design:
    design.masters = masters
    return design


def dbu_to_micron(v: int, design: Design) -> float:
    if design.dbu_per_micron <= 0:
        raise DesignError("dbu_per_micron not set")
    return v / design.dbu_per_micron


def micron_to_dbu(v, design: Design) -> int:
    """Convert microns to DBU; the value must land exactly on the DBU grid."""
    if design.dbu_per_micron <= 0:
        raise DesignError("dbu_per_micron not set")
    try:
        d = Decimal(str(v)) * design.dbu_per_micron
    except InvalidOperation:
        raise DesignError(f"bad micron value {v!r}") from None
    if d != d.to_integral_value():
        raise DesignError(f"{v} um does not land on the DBU grid")
    return int(d)


def instance_bbox(inst: Instance) -> Rect:
    """Oriented bounding box; N/S/FN/FS never swap width and height."""
    if not inst.placed:
        raise Unplaced(f"instance '{inst.name}' is not placed")
    if inst.master is None:
        raise UnresolvedReference(inst.master_name, f"master of instance {inst.name}")
    if inst.orientation not in ORIENTATIONS:
        raise DesignError(f"unsupported orientation '{inst.orientation}'")
    loc = inst.location
    return Rect.of(loc.x, loc.y, loc.x + inst.master.width, loc.y + inst.master.height)


def instance_pin_shapes(inst: Instance, pin_name: str) -> list[tuple[str, Rect]]:
    """Pin geometry in die coordinates, mirrored per the instance orientation."""
    if not inst.placed:
        raise Unplaced(f"instance '{inst.name}' is not placed")
    if inst.master is None:
        raise UnresolvedReference(inst.master_name, f"master of instance {inst.name}")
    mp = inst.master.pin(pin_name)
    out = []
    for layer, r in mp.shapes:
        o = orient_rect(r, inst.orientation, inst.master.width, inst.master.height)
        out.append((layer, o.translated(inst.location.x, inst.location.y)))
    return out


def instance_obstructions(inst: Instance) -> list[tuple[str, Rect]]:
    if not inst.placed or inst.master is None:
        return []
    out = []
    for layer, r in inst.master.obstructions:
        o = orient_rect(r, inst.orientation, inst.master.width, inst.master.height)
        out.append((layer, o.translated(inst.location.x, inst.location.y)))
    return out


def derive_gcell_grid(design: Design, tracks_per_gcell: int = 10) -> GCellGrid:
    """Build a gcell grid covering the die from the technology pitch.

    Capacity on each layer is the track count crossing a gcell boundary in
    the layer's preferred direction; the off direction gets zero.
    """
    tech = design.technology
    if tech is None or not tech.routing_layers:
        raise DesignError("cannot derive a gcell grid without routing layers")
    pitch = max(l.pitch for l in tech.routing_layers)
    step = pitch * tracks_per_gcell
    die = design.die_area
    x_count = max(1, -(-die.width // step))
    y_count = max(1, -(-die.height // step))
    grid = GCellGrid(
        x_origin=die.lo.x,
        y_origin=die.lo.y,
        x_count=x_count,
        y_count=y_count,
        x_step=step,
        y_step=step,
    )
    for l in tech.routing_layers:
        cap = step // l.pitch if l.pitch > 0 else 0
        if l.direction == "horizontal":
            grid.horizontal_capacity.append(cap)
            grid.vertical_capacity.append(0)
        else:
            grid.horizontal_capacity.append(0)
            grid.vertical_capacity.append(cap)
        grid.min_width.append(l.width)
        grid.min_spacing.append(l.width)
        grid.via_spacing.append(l.width)
    return grid


def derive_tracks(design: Design) -> dict[str, dict[str, tuple[int, int, int]]]:
    """Tracks per routing layer: layer -> axis ("X"|"Y") -> (start, count, step).

    Axis Y lists y positions for horizontal wires, axis X lists x positions
    for vertical wires. DEF TRACKS statements win; a layer without one gets
    tracks on its preferred axis from the pitch, offset half a pitch from
    the die origin.
    """
    tech = design.technology
    if tech is None:
        raise DesignError("tracks require a technology")
    out: dict[str, dict[str, tuple[int, int, int]]] = {}
    for axis, start, count, step, layer in design.tracks:
        out.setdefault(layer, {})[axis] = (start, count, step)
    die = design.die_area
    for l in tech.routing_layers:
        if l.name in out or l.pitch <= 0:
            continue
        if l.direction == "horizontal":
            start = die.lo.y + l.pitch // 2
            count = max(0, (die.hi.y - start) // l.pitch + 1)
            out[l.name] = {"Y": (start, count, l.pitch)}
        else:
            start = die.lo.x + l.pitch // 2
            count = max(0, (die.hi.x - start) // l.pitch + 1)
            out[l.name] = {"X": (start, count, l.pitch)}
    return out
