"""LEF technology/macro reader.

Supported subset: UNITS (DATABASE MICRONS), LAYER (ROUTING and CUT types
with DIRECTION, PITCH, WIDTH, SPACING, SPACINGTABLE PARALLELRUNLENGTH,
AREA, ENDOFLINE spacing), SITE, VIA, MACRO with PIN/PORT/OBS geometry.
Distances are micron literals and must land exactly on the DBU grid.

Statements outside the subset are skipped with a warning; geometry that
references an undeclared layer is an error.
"""

from __future__ import annotations

from decimal import Decimal, InvalidOperation

from ..errors import ParseError, UnknownLayerRef
from ..geom import Rect
from ..model import CellMaster, Layer, MasterPin, Site, SpacingTable, Technology, ViaMaster
from .templates import TokenCursor, strip_comments, tokenize_with_lines

_DEFAULT_DBU = 100  # LEF default DATABASE MICRONS


class _LefParser:
    def __init__(self, text: str):
        tokens = tokenize_with_lines(strip_comments(text, line_comment="#", block=False),
                                     punctuation=";")
        self.cur = TokenCursor(tokens)
        self.tech = Technology(dbu_per_micron=0)
        self.masters: dict[str, CellMaster] = {}
        self._layer_index = 0
        self._converted = False  # a micron literal was already scaled

    # -- small helpers ---------------------------------------------------

    def warn(self, msg: str):
        self.tech.warnings.append(msg)

    def skip_statement(self):
        while not self.cur.eof() and self.cur.next() != ";":
            pass

    @property
    def dbu(self) -> int:
        self._converted = True
        return self.tech.dbu_per_micron or _DEFAULT_DBU

    def to_dbu(self, tok: str) -> int:
        line = self.cur.tokens[self.cur.pos - 1][1] if self.cur.pos else 1
        try:
            d = Decimal(tok)
        except InvalidOperation:
            raise ParseError(f"bad number '{tok}'", line) from None
        v = d * self.dbu
        if v != v.to_integral_value():
            raise ParseError(f"{tok} um is not on the DBU grid (1/{self.dbu} um)", line)
        return int(v)

    def to_dbu_area(self, tok: str) -> int:
        line = self.cur.tokens[self.cur.pos - 1][1] if self.cur.pos else 1
        try:
            d = Decimal(tok)
        except InvalidOperation:
            raise ParseError(f"bad number '{tok}'", line) from None
        v = d * self.dbu * self.dbu
        if v != v.to_integral_value():
            raise ParseError(f"area {tok} um^2 is not on the DBU grid", line)
        return int(v)

    def rect(self) -> Rect:
        x1 = self.to_dbu(self.cur.next())
        y1 = self.to_dbu(self.cur.next())
        x2 = self.to_dbu(self.cur.next())
        y2 = self.to_dbu(self.cur.next())
        return Rect.of(x1, y1, x2, y2)

    def require_layer(self, name: str, context: str) -> Layer:
        for l in self.tech.layers:
            if l.name == name:
                return l
        raise UnknownLayerRef(f"undeclared layer '{name}' in {context}", self.cur.line)

    # -- sections ---------------------------------------------------------

    def parse(self) -> tuple[Technology, dict[str, CellMaster]]:
        cur = self.cur
        while not cur.eof():
            tok = cur.next()
            if tok == ";":
                continue
            if tok in ("VERSION", "BUSBITCHARS", "DIVIDERCHAR", "MANUFACTURINGGRID",
                       "CLEARANCEMEASURE", "USEMINSPACING", "NAMESCASESENSITIVE"):
                self.skip_statement()
            elif tok == "UNITS":
                self.parse_units()
            elif tok == "LAYER":
                self.parse_layer()
            elif tok == "SITE":
                self.parse_site()
            elif tok == "VIA":
                self.parse_via()
            elif tok == "MACRO":
                self.parse_macro()
            elif tok == "PROPERTYDEFINITIONS":
                while not cur.eof():
                    if cur.next() == "END" and cur.peek() == "PROPERTYDEFINITIONS":
                        cur.next()
                        break
            elif tok == "SPACING":
                # top-level (obsolete) spacing section
                while not cur.eof():
                    if cur.next() == "END" and cur.peek() == "SPACING":
                        cur.next()
                        break
            elif tok == "END":
                nxt = cur.peek()
                if nxt == "LIBRARY":
                    cur.next()
                    break
                raise ParseError(f"unexpected END {nxt}", cur.line)
            else:
                self.warn(f"unsupported statement '{tok}' (skipped)")
                self.skip_statement()
        if self.tech.dbu_per_micron == 0:
            self.tech.dbu_per_micron = _DEFAULT_DBU
        return self.tech, self.masters

    def parse_units(self):
        cur = self.cur
        while not cur.eof():
            tok = cur.next()
            if tok == "END":
                cur.expect("UNITS")
                return
            if tok == "DATABASE":
                cur.expect("MICRONS")
                val = cur.next()
                if self._converted:
                    raise ParseError("UNITS must precede micron-valued statements", cur.line)
                try:
                    self.tech.dbu_per_micron = int(val)
                except ValueError:
                    raise ParseError(f"bad DATABASE MICRONS '{val}'", cur.line) from None
                if self.tech.dbu_per_micron <= 0:
                    raise ParseError("DATABASE MICRONS must be positive", cur.line)
                cur.expect(";")
            else:
                self.skip_statement()
        raise ParseError("unterminated UNITS section", cur.line)

    def parse_layer(self):
        cur = self.cur
        name = cur.next()
        if self.tech.has_layer(name):
            raise ParseError(f"duplicate layer '{name}'", cur.line)
        self._layer_index += 1
        layer = Layer(name=name, kind="other", index=self._layer_index)
        table: SpacingTable | None = None
        plain_spacing: int | None = None
        while not cur.eof():
            tok = cur.next()
            if tok == "END":
                got = cur.next()
                if got != name:
                    raise ParseError(f"expected END {name}, got END {got}", cur.line)
                break
            if tok == "TYPE":
                t = cur.next().upper()
                layer.kind = {"ROUTING": "routing", "CUT": "cut"}.get(t, "other")
                cur.expect(";")
            elif tok == "DIRECTION":
                d = cur.next().upper()
                if d not in ("HORIZONTAL", "VERTICAL"):
                    raise ParseError(f"bad DIRECTION '{d}'", cur.line)
                layer.direction = d.lower()
                cur.expect(";")
            elif tok == "PITCH":
                layer.pitch = self.to_dbu(cur.next())
                if cur.peek() != ";":  # PITCH x y form: keep the first
                    self.to_dbu(cur.next())
                cur.expect(";")
            elif tok == "WIDTH":
                layer.width = self.to_dbu(cur.next())
                cur.expect(";")
            elif tok == "AREA":
                layer.min_area = self.to_dbu_area(cur.next())
                cur.expect(";")
            elif tok == "SPACING":
                s = self.to_dbu(cur.next())
                if cur.peek() == "ENDOFLINE":
                    cur.next()
                    eol_width = self.to_dbu(cur.next())
                    eol_within = 0
                    if cur.peek() == "WITHIN":
                        cur.next()
                        eol_within = self.to_dbu(cur.next())
                    layer.spacing_eol = (s, eol_width, eol_within)
                else:
                    plain_spacing = s
                while cur.peek() != ";":  # tolerate extra qualifiers
                    cur.next()
                cur.expect(";")
            elif tok == "SPACINGTABLE":
                table = self.parse_spacing_table()
            elif tok in ("OFFSET", "RESISTANCE", "CAPACITANCE", "EDGECAPACITANCE",
                         "THICKNESS", "HEIGHT", "MINWIDTH", "MAXWIDTH", "DENSITY",
                         "ANTENNAMODEL", "ANTENNADIFFAREARATIO", "ANTENNACUMDIFFAREARATIO"):
                self.skip_statement()
            elif tok == ";":
                continue
            else:
                self.warn(f"unsupported LAYER statement '{tok}' (skipped)")
                self.skip_statement()
        if layer.kind == "cut" and plain_spacing is not None:
            layer.cut_spacing = plain_spacing
        if layer.kind == "routing":
            if table is not None:
                layer.spacing_prl = table
            elif plain_spacing is not None:
                layer.spacing_prl = SpacingTable.uniform(plain_spacing)
        self.tech.layers.append(layer)

    def parse_spacing_table(self) -> SpacingTable:
        cur = self.cur
        cur.expect("PARALLELRUNLENGTH")
        prl: list[int] = []
        while cur.peek() not in ("WIDTH", ";", None):
            prl.append(self.to_dbu(cur.next()))
        if not prl:
            raise ParseError("SPACINGTABLE without PARALLELRUNLENGTH values", cur.line)
        widths: list[int] = []
        spacing: list[list[int]] = []
        while cur.peek() == "WIDTH":
            cur.next()
            widths.append(self.to_dbu(cur.next()))
            row = [self.to_dbu(cur.next()) for _ in prl]
            spacing.append(row)
        cur.expect(";")
        if not widths:
            raise ParseError("SPACINGTABLE without WIDTH rows", cur.line)
        if any(b <= a for a, b in zip(prl, prl[1:])) or any(
            b <= a for a, b in zip(widths, widths[1:])
        ):
            raise ParseError("SPACINGTABLE axes must be ascending", cur.line)
        return SpacingTable(prl=prl, width=widths, spacing=spacing)

    def parse_site(self):
        cur = self.cur
        name = cur.next()
        site = Site(name=name)
        while not cur.eof():
            tok = cur.next()
            if tok == "END":
                got = cur.next()
                if got != name:
                    raise ParseError(f"expected END {name}, got END {got}", cur.line)
                break
            if tok == "SIZE":
                site.width = self.to_dbu(cur.next())
                cur.expect("BY")
                site.height = self.to_dbu(cur.next())
                cur.expect(";")
            elif tok in ("CLASS", "SYMMETRY"):
                self.skip_statement()
            elif tok == ";":
                continue
            else:
                self.warn(f"unsupported SITE statement '{tok}' (skipped)")
                self.skip_statement()
        self.tech.sites[name] = site

    def parse_via(self):
        cur = self.cur
        name = cur.next()
        if cur.peek() == "DEFAULT":
            cur.next()
        via = ViaMaster(name=name)
        current_layer = ""
        while not cur.eof():
            tok = cur.next()
            if tok == "END":
                got = cur.next()
                if got != name:
                    raise ParseError(f"expected END {name}, got END {got}", cur.line)
                break
            if tok == "LAYER":
                current_layer = cur.next()
                self.require_layer(current_layer, f"VIA {name}")
                cur.expect(";")
                via.shapes.setdefault(current_layer, [])
            elif tok == "RECT":
                if not current_layer:
                    raise ParseError("RECT before LAYER in VIA", cur.line)
                via.shapes[current_layer].append(self.rect())
                cur.expect(";")
            elif tok == ";":
                continue
            else:
                self.warn(f"unsupported VIA statement '{tok}' (skipped)")
                self.skip_statement()
        layers = [self.tech.layer(l) for l in via.shapes]
        cuts = [l for l in layers if l.kind == "cut"]
        routings = sorted((l for l in layers if l.kind == "routing"), key=lambda l: l.index)
        if cuts:
            via.cut_layer = cuts[0].name
        if routings:
            via.bottom_layer = routings[0].name
            via.top_layer = routings[-1].name
        self.tech.vias[name] = via

    def parse_macro(self):
        cur = self.cur
        name = cur.next()
        if name in self.masters:
            raise ParseError(f"duplicate macro '{name}'", cur.line)
        master = CellMaster(name=name)
        ox = oy = 0
        while not cur.eof():
            tok = cur.next()
            if tok == "END":
                got = cur.next()
                if got != name:
                    raise ParseError(f"expected END {name}, got END {got}", cur.line)
                break
            if tok == "SIZE":
                master.width = self.to_dbu(cur.next())
                cur.expect("BY")
                master.height = self.to_dbu(cur.next())
                cur.expect(";")
            elif tok == "ORIGIN":
                ox = self.to_dbu(cur.next())
                oy = self.to_dbu(cur.next())
                cur.expect(";")
            elif tok == "SITE":
                master.site_name = cur.next()
                cur.expect(";")
            elif tok == "PIN":
                self.parse_pin(master, ox, oy)
            elif tok == "OBS":
                self.parse_obs(master, ox, oy)
            elif tok in ("CLASS", "FOREIGN", "SYMMETRY"):
                self.skip_statement()
            elif tok == ";":
                continue
            else:
                self.warn(f"unsupported MACRO statement '{tok}' (skipped)")
                self.skip_statement()
        self.masters[name] = master

    def parse_pin(self, master: CellMaster, ox: int, oy: int):
        cur = self.cur
        name = cur.next()
        if name in master.pins:
            raise ParseError(f"duplicate pin '{name}' in macro '{master.name}'", cur.line)
        pin = MasterPin(name=name, direction="input")
        while not cur.eof():
            tok = cur.next()
            if tok == "END":
                got = cur.next()
                if got != name:
                    raise ParseError(f"expected END {name}, got END {got}", cur.line)
                break
            if tok == "DIRECTION":
                d = cur.next().upper()
                if d not in ("INPUT", "OUTPUT", "INOUT"):
                    raise ParseError(f"bad pin DIRECTION '{d}'", cur.line)
                pin.direction = d.lower()
                cur.expect(";")
            elif tok == "PORT":
                current_layer = ""
                while not cur.eof():
                    t2 = cur.next()
                    if t2 == "END":
                        break
                    if t2 == "LAYER":
                        current_layer = cur.next()
                        self.require_layer(current_layer, f"pin {master.name}/{name}")
                        cur.expect(";")
                    elif t2 == "RECT":
                        if not current_layer:
                            raise ParseError("RECT before LAYER in PORT", cur.line)
                        pin.shapes.append((current_layer, self.rect().translated(ox, oy)))
                        cur.expect(";")
                    elif t2 == ";":
                        continue
                    else:
                        self.warn(f"unsupported PORT statement '{t2}' (skipped)")
                        self.skip_statement()
            elif tok in ("USE", "SHAPE", "ANTENNADIFFAREA", "ANTENNAGATEAREA"):
                self.skip_statement()
            elif tok == ";":
                continue
            else:
                self.warn(f"unsupported PIN statement '{tok}' (skipped)")
                self.skip_statement()
        master.pins[name] = pin

    def parse_obs(self, master: CellMaster, ox: int, oy: int):
        cur = self.cur
        current_layer = ""
        while not cur.eof():
            tok = cur.next()
            if tok == "END":
                return
            if tok == "LAYER":
                current_layer = cur.next()
                self.require_layer(current_layer, f"OBS of {master.name}")
                cur.expect(";")
            elif tok == "RECT":
                if not current_layer:
                    raise ParseError("RECT before LAYER in OBS", cur.line)
                master.obstructions.append((current_layer, self.rect().translated(ox, oy)))
                cur.expect(";")
            elif tok == ";":
                continue
            else:
                self.warn(f"unsupported OBS statement '{tok}' (skipped)")
                self.skip_statement()
        raise ParseError("unterminated OBS", cur.line)


def parse_lef(text: str) -> tuple[Technology, dict[str, CellMaster]]:
    """Parse LEF text into a Technology and its cell masters."""
    return _LefParser(text).parse()
