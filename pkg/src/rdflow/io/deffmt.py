"""DEF reader and writer.

Supported subset: VERSION, DESIGN, UNITS DISTANCE MICRONS, DIEAREA (two
corners), ROW (single-row stripes, BY 1), TRACKS, GCELLGRID, COMPONENTS,
PINS, NETS with optional ROUTED polylines. Everything is integer DBU.

GCELLGRID DO n counts grid lines, so n lines bound n-1 cells per axis.

Routed elements are polylines with an optional trailing via:
    + ROUTED M1 ( 400 200 ) ( 4000 * ) via1
      NEW M2 ( 4000 200 ) ( 4000 2600 )
`*` repeats the previous coordinate. A via mid-polyline is outside the
subset and rejected.

The writer emits sections sorted by entity name and is byte-deterministic
for equal designs.
"""

from __future__ import annotations

from ..errors import ParseError, UnitsMismatch
from ..geom import ORIENTATIONS, Point, Rect
from ..model import Design, GCellGrid, Instance, Net, NetPin, Port, Row, RouteShape
from .templates import TokenCursor, strip_comments, tokenize_with_lines

_SKIP_SECTIONS = {"VIAS", "SPECIALNETS", "PROPERTYDEFINITIONS", "BLOCKAGES",
                  "REGIONS", "GROUPS", "NONDEFAULTRULES", "FILLS"}


class _DefParser:
    def __init__(self, text: str, expected_dbu: int | None):
        # '-' and '+' act as markers only when whitespace-separated, which
        # also keeps negative coordinates and hyphenated names intact
        tokens = tokenize_with_lines(strip_comments(text, line_comment="#", block=False),
                                     punctuation=";()")
        self.cur = TokenCursor(tokens)
        self.design = Design()
        self.expected_dbu = expected_dbu
        self._gcell: dict[str, tuple[int, int, int]] = {}

    def warn(self, msg: str):
        self.design.warnings.append(msg)

    def skip_statement(self):
        while not self.cur.eof() and self.cur.next() != ";":
            pass

    def integer(self) -> int:
        tok = self.cur.next()
        try:
            return int(tok)
        except ValueError:
            raise ParseError(f"expected integer, got '{tok}'",
                             self.cur.tokens[self.cur.pos - 1][1]) from None

    def point(self) -> Point:
        self.cur.expect("(")
        x = self.integer()
        y = self.integer()
        self.cur.expect(")")
        return Point(x, y)

    def parse(self) -> Design:
        cur = self.cur
        seen_design = False
        while not cur.eof():
            tok = cur.next()
            if tok == ";":
                continue
            if tok in ("VERSION", "DIVIDERCHAR", "BUSBITCHARS", "TECHNOLOGY", "HISTORY"):
                self.skip_statement()
            elif tok == "DESIGN":
                self.design.name = cur.next()
                cur.expect(";")
                seen_design = True
            elif tok == "UNITS":
                cur.expect("DISTANCE")
                cur.expect("MICRONS")
                dbu = self.integer()
                if dbu <= 0:
                    raise ParseError("UNITS must be positive", cur.line)
                if self.expected_dbu is not None and dbu != self.expected_dbu:
                    raise UnitsMismatch(
                        f"DEF units {dbu} conflict with technology units {self.expected_dbu}",
                        cur.line)
                self.design.dbu_per_micron = dbu
                cur.expect(";")
            elif tok == "DIEAREA":
                p1 = self.point()
                p2 = self.point()
                if cur.peek() == "(":
                    raise ParseError("polygonal DIEAREA is not supported", cur.line)
                cur.expect(";")
                self.design.die_area = Rect.of(p1.x, p1.y, p2.x, p2.y)
            elif tok == "ROW":
                self.parse_row()
            elif tok == "TRACKS":
                self.parse_tracks()
            elif tok == "GCELLGRID":
                self.parse_gcellgrid()
            elif tok == "COMPONENTS":
                self.parse_components()
            elif tok == "PINS":
                self.parse_pins()
            elif tok == "NETS":
                self.parse_nets()
            elif tok in _SKIP_SECTIONS:
                self.warn(f"section {tok} skipped")
                self.skip_section(tok)
            elif tok == "END":
                nxt = cur.next()
                if nxt == "DESIGN":
                    if not seen_design:
                        raise ParseError("END DESIGN without DESIGN", cur.line)
                    self.finish()
                    return self.design
                raise ParseError(f"unexpected END {nxt}", cur.line)
            else:
                self.warn(f"unsupported statement '{tok}' (skipped)")
                self.skip_statement()
        raise ParseError("missing END DESIGN", cur.line)

    def skip_section(self, name: str):
        cur = self.cur
        while not cur.eof():
            if cur.next() == "END" and cur.peek() == name:
                cur.next()
                return
        raise ParseError(f"unterminated {name} section", cur.line)

    def finish(self):
        if self.design.dbu_per_micron == 0:
            raise ParseError("missing UNITS DISTANCE MICRONS", 1)
        gx = self._gcell.get("X")
        gy = self._gcell.get("Y")
        if gx and gy:
            self.design.gcell_grid = GCellGrid(
                x_origin=gx[0], y_origin=gy[0],
                x_count=gx[1] - 1, y_count=gy[1] - 1,
                x_step=gx[2], y_step=gy[2],
            )
        elif gx or gy:
            raise ParseError("GCELLGRID must define both axes", 1)

    def parse_row(self):
        cur = self.cur
        name = cur.next()
        site = cur.next()
        x = self.integer()
        y = self.integer()
        orient = cur.next()
        if orient not in ORIENTATIONS:
            raise ParseError(f"unsupported row orientation '{orient}'", cur.line)
        num_x, num_y, step_x = 1, 1, 0
        if cur.peek() == "DO":
            cur.next()
            num_x = self.integer()
            cur.expect("BY")
            num_y = self.integer()
            if cur.peek() == "STEP":
                cur.next()
                step_x = self.integer()
                self.integer()  # y step (unused for BY 1 rows)
        if num_y != 1:
            raise ParseError("only single-row stripes (BY 1) are supported", cur.line)
        if num_x <= 0:
            raise ParseError("row site count must be positive", cur.line)
        cur.expect(";")
        self.design.rows.append(Row(
            name=name, site_name=site, origin=Point(x, y),
            num_sites=num_x, site_width=step_x, orientation=orient,
        ))

    def parse_tracks(self):
        cur = self.cur
        axis = cur.next()
        if axis not in ("X", "Y"):
            raise ParseError(f"bad TRACKS axis '{axis}'", cur.line)
        start = self.integer()
        cur.expect("DO")
        count = self.integer()
        cur.expect("STEP")
        step = self.integer()
        cur.expect("LAYER")
        layer = cur.next()
        cur.expect(";")
        self.design.tracks.append((axis, start, count, step, layer))

    def parse_gcellgrid(self):
        cur = self.cur
        axis = cur.next()
        if axis not in ("X", "Y"):
            raise ParseError(f"bad GCELLGRID axis '{axis}'", cur.line)
        start = self.integer()
        cur.expect("DO")
        count = self.integer()
        cur.expect("STEP")
        step = self.integer()
        cur.expect(";")
        if count < 2 or step <= 0:
            raise ParseError("GCELLGRID needs at least two lines and positive step",
                             cur.line)
        self._gcell[axis] = (start, count, step)

    def parse_components(self):
        cur = self.cur
        want = self.integer()
        cur.expect(";")
        got = 0
        while True:
            tok = cur.next()
            if tok == "END":
                cur.expect("COMPONENTS")
                break
            if tok != "-":
                raise ParseError(f"expected '-', got '{tok}'", cur.line)
            name = cur.next()
            master = cur.next()
            inst = Instance(name=name, master_name=master)
            while cur.peek() == "+":
                cur.next()
                kw = cur.next()
                if kw in ("PLACED", "FIXED"):
                    inst.location = self.point()
                    orient = cur.next()
                    if orient not in ORIENTATIONS:
                        raise ParseError(f"unsupported orientation '{orient}'", cur.line)
                    inst.orientation = orient
                    inst.status = kw.lower()
                elif kw == "UNPLACED":
                    inst.status = "unplaced"
                elif kw in ("SOURCE", "WEIGHT", "PROPERTY"):
                    while cur.peek() not in ("+", ";", None):
                        cur.next()
                else:
                    raise ParseError(f"unsupported component clause '+ {kw}'", cur.line)
            cur.expect(";")
            try:
                self.design.add_instance(inst)
            except Exception as e:
                raise ParseError(str(e), cur.line) from None
            got += 1
        if got != want:
            raise ParseError(f"COMPONENTS header says {want}, section has {got}", cur.line)

    def parse_pins(self):
        cur = self.cur
        want = self.integer()
        cur.expect(";")
        got = 0
        while True:
            tok = cur.next()
            if tok == "END":
                cur.expect("PINS")
                break
            if tok != "-":
                raise ParseError(f"expected '-', got '{tok}'", cur.line)
            name = cur.next()
            port = Port(name=name, direction="input", net=name)
            while cur.peek() == "+":
                cur.next()
                kw = cur.next()
                if kw == "NET":
                    port.net = cur.next()
                elif kw == "DIRECTION":
                    d = cur.next().upper()
                    if d not in ("INPUT", "OUTPUT", "INOUT"):
                        raise ParseError(f"bad pin direction '{d}'", cur.line)
                    # DEF direction is from outside: INPUT pin drives the core
                    port.direction = d.lower()
                elif kw == "LAYER":
                    port.layer = cur.next()
                    p1 = self.point()
                    p2 = self.point()
                    port.shape = Rect.of(p1.x, p1.y, p2.x, p2.y)
                elif kw in ("PLACED", "FIXED"):
                    port.location = self.point()
                    orient = cur.next()
                    if orient not in ORIENTATIONS:
                        raise ParseError(f"unsupported orientation '{orient}'", cur.line)
                elif kw == "USE":
                    cur.next()
                else:
                    raise ParseError(f"unsupported pin clause '+ {kw}'", cur.line)
            cur.expect(";")
            if name in self.design.ports:
                raise ParseError(f"duplicate pin '{name}'", cur.line)
            self.design.add_port(port)
            got += 1
        if got != want:
            raise ParseError(f"PINS header says {want}, section has {got}", cur.line)

    def parse_nets(self):
        cur = self.cur
        want = self.integer()
        cur.expect(";")
        got = 0
        while True:
            tok = cur.next()
            if tok == "END":
                cur.expect("NETS")
                break
            if tok != "-":
                raise ParseError(f"expected '-', got '{tok}'", cur.line)
            name = cur.next()
            net = Net(name=name)
            while cur.peek() == "(":
                cur.next()
                a = cur.next()
                b = cur.next()
                cur.expect(")")
                if a == "PIN":
                    net.pins.append(NetPin(None, b))
                else:
                    net.pins.append(NetPin(a, b))
            while cur.peek() == "+":
                cur.next()
                kw = cur.next()
                if kw == "ROUTED":
                    self.parse_routed(net)
                elif kw in ("USE", "SOURCE", "WEIGHT"):
                    cur.next()
                else:
                    raise ParseError(f"unsupported net clause '+ {kw}'", cur.line)
            cur.expect(";")
            try:
                self.design.add_net(net)
            except Exception as e:
                raise ParseError(str(e), cur.line) from None
            got += 1
        if got != want:
            raise ParseError(f"NETS header says {want}, section has {got}", cur.line)

    def parse_routed(self, net: Net):
        cur = self.cur
        while True:
            layer = cur.next()
            pts: list[Point] = []
            via_name = ""
            self.cur.expect("(")
            x = self.integer()
            y = self.integer()
            cur.expect(")")
            pts.append(Point(x, y))
            while True:
                nxt = cur.peek()
                if nxt == "(":
                    cur.next()
                    xt = cur.next()
                    yt = cur.next()
                    cur.expect(")")
                    px, py = pts[-1].x, pts[-1].y
                    try:
                        nx = px if xt == "*" else int(xt)
                        ny = py if yt == "*" else int(yt)
                    except ValueError:
                        raise ParseError(f"bad route point ({xt} {yt})", cur.line) from None
                    pts.append(Point(nx, ny))
                elif nxt in ("NEW", ";", "+", None):
                    break
                else:
                    via_name = cur.next()
                    if cur.peek() == "(":
                        raise ParseError(
                            "via inside a polyline is not supported", cur.line)
                    break
            for a, b in zip(pts, pts[1:]):
                if a.x != b.x and a.y != b.y:
                    raise ParseError(
                        f"route segment ({a.x},{a.y})-({b.x},{b.y}) is not axis-parallel",
                        cur.line)
                net.routing.append(RouteShape(kind="wire", layer=layer, start=a, end=b))
            if via_name:
                net.routing.append(RouteShape(kind="via", layer=layer,
                                              start=pts[-1], end=pts[-1],
                                              via_name=via_name))
            if cur.peek() == "NEW":
                cur.next()
                continue
            return


def parse_def(text: str, expected_dbu: int | None = None) -> Design:
    """Parse DEF text into a geometry-populated Design.

    expected_dbu: DBU per micron already fixed by the technology; a
    conflicting DEF UNITS statement raises UnitsMismatch.
    """
    return _DefParser(text, expected_dbu).parse()


# ------------------------------------------------------------------ writer


def _orient_of(inst: Instance) -> str:
    return inst.orientation if inst.orientation else "N"


def write_def(design: Design) -> str:
    """Serialize a frozen design to DEF, deterministically."""
    design.require_frozen()
    out: list[str] = []
    w = out.append
    w("VERSION 5.8 ;")
    w('DIVIDERCHAR "/" ;')
    w('BUSBITCHARS "[]" ;')
    w(f"DESIGN {design.name} ;")
    w(f"UNITS DISTANCE MICRONS {design.dbu_per_micron} ;")
    d = design.die_area
    w(f"DIEAREA ( {d.lo.x} {d.lo.y} ) ( {d.hi.x} {d.hi.y} ) ;")
    for row in sorted(design.rows, key=lambda r: r.name):
        w(f"ROW {row.name} {row.site_name} {row.origin.x} {row.origin.y} "
          f"{row.orientation} DO {row.num_sites} BY 1 STEP {row.site_width} 0 ;")
    for axis, start, count, step, layer in sorted(design.tracks,
                                                  key=lambda t: (t[4], t[0])):
        w(f"TRACKS {axis} {start} DO {count} STEP {step} LAYER {layer} ;")
    g = design.gcell_grid
    if g is not None:
        w(f"GCELLGRID X {g.x_origin} DO {g.x_count + 1} STEP {g.x_step} ;")
        w(f"GCELLGRID Y {g.y_origin} DO {g.y_count + 1} STEP {g.y_step} ;")

    w(f"COMPONENTS {len(design.instances)} ;")
    for name in sorted(design.instances):
        inst = design.instances[name]
        if inst.status in ("placed", "fixed") and inst.location is not None:
            kw = "FIXED" if inst.status == "fixed" else "PLACED"
            w(f"- {name} {inst.master_name} + {kw} "
              f"( {inst.location.x} {inst.location.y} ) {_orient_of(inst)} ;")
        else:
            w(f"- {name} {inst.master_name} ;")
    w("END COMPONENTS")

    w(f"PINS {len(design.ports)} ;")
    for name in sorted(design.ports):
        port = design.ports[name]
        parts = [f"- {name} + NET {port.net or name}",
                 f"+ DIRECTION {port.direction.upper()}", "+ USE SIGNAL"]
        if port.layer is not None and port.shape is not None:
            s = port.shape
            parts.append(f"+ LAYER {port.layer} ( {s.lo.x} {s.lo.y} ) ( {s.hi.x} {s.hi.y} )")
        if port.location is not None:
            parts.append(f"+ PLACED ( {port.location.x} {port.location.y} ) N")
        w("  " + " ".join(parts) + " ;")
    w("END PINS")

    w(f"NETS {len(design.nets)} ;")
    for name in sorted(design.nets):
        net = design.nets[name]
        conns = " ".join(
            f"( PIN {p.pin} )" if p.instance is None else f"( {p.instance} {p.pin} )"
            for p in net.pins
        )
        line = f"- {name}" + (f" {conns}" if conns else "")
        if not net.routing:
            w(f"  {line} ;")
            continue
        w(f"  {line}")
        elems: list[str] = []
        for shape in net.routing:
            if shape.kind == "wire":
                elems.append(f"{shape.layer} ( {shape.start.x} {shape.start.y} ) "
                             f"( {shape.end.x} {shape.end.y} )")
            else:
                elems.append(f"{shape.layer} ( {shape.start.x} {shape.start.y} ) "
                             f"{shape.via_name}")
        w("    + ROUTED " + "\n      NEW ".join(elems))
        w("  ;")
    w("END NETS")
    w("END DESIGN")
    return "\n".join(out) + "\n"
