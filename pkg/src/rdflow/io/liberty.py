"""Liberty library reader (NLDM subset).

Reads lu_table templates, cells, pins, and timing groups into a
TimingLibrary. Power tables, when-conditions, and constraint arcs
(setup/hold) are skipped. Attributes outside the subset are skipped and
counted once per attribute name in the library warnings.

Internally everything is normalized to picoseconds and femtofarads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import MissingTemplate, ParseError, TimingError
from ..timinglib import LibCell, LibPin, LookupTable, TimingArc, TimingLibrary
from .templates import strip_comments


@dataclass
class Group:
    kind: str
    args: list[str]
    line: int
    attrs: dict[str, str] = field(default_factory=dict)
    complex_attrs: list[tuple[str, list[str]]] = field(default_factory=list)
    groups: list["Group"] = field(default_factory=list)

    def subgroups(self, kind: str) -> list["Group"]:
        return [g for g in self.groups if g.kind == kind]

    def first(self, kind: str) -> "Group | None":
        for g in self.groups:
            if g.kind == kind:
                return g
        return None


def _lex(text: str) -> list[tuple[str, int]]:
    text = strip_comments(text)
    tokens: list[tuple[str, int]] = []
    line = 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
        elif c == "\\" and i + 1 < n and text[i + 1] == "\n":
            line += 1
            i += 2
        elif c.isspace():
            i += 1
        elif c == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n and text[j + 1] == "\n":
                    j += 2
                    line += 1
                    continue
                if text[j] == "\n":
                    line += 1
                buf.append(text[j])
                j += 1
            if j >= n:
                raise ParseError("unterminated string", line)
            tokens.append(('"' + "".join(buf), line))
            i = j + 1
        elif c in "{}():;,":
            tokens.append((c, line))
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '{}():;,"':
                j += 1
            tokens.append((text[i:j], line))
            i = j
    return tokens


def _parse_group_body(tokens, pos, group):
    """Parse statements until the closing brace; returns position after it."""
    n = len(tokens)
    while pos < n:
        tok, line = tokens[pos]
        if tok == "}":
            pos += 1
            if pos < n and tokens[pos][0] == ";":
                pos += 1
            return pos
        if tok in "{}():;,":
            raise ParseError(f"unexpected '{tok}'", line)
        name = tok
        pos += 1
        if pos >= n:
            raise ParseError("unexpected end of input", line)
        tok2, line2 = tokens[pos]
        if tok2 == ":":
            pos += 1
            if pos >= n:
                raise ParseError("missing attribute value", line2)
            val, _ = tokens[pos]
            pos += 1
            # units like "1ns" may lex as one word; values may be quoted
            group.attrs[name] = val.lstrip('"')
            if pos < n and tokens[pos][0] == ";":
                pos += 1
        elif tok2 == "(":
            pos += 1
            args = []
            while pos < n and tokens[pos][0] != ")":
                t, tl = tokens[pos]
                if t == ",":
                    pos += 1
                    continue
                if t in "{}(:;":
                    raise ParseError(f"unexpected '{t}' in argument list", tl)
                args.append(t.lstrip('"'))
                pos += 1
            if pos >= n:
                raise ParseError("unterminated argument list", line2)
            pos += 1  # ')'
            if pos < n and tokens[pos][0] == "{":
                sub = Group(kind=name, args=args, line=line)
                pos = _parse_group_body(tokens, pos + 1, sub)
                group.groups.append(sub)
            else:
                if pos < n and tokens[pos][0] == ";":
                    pos += 1
                group.complex_attrs.append((name, args))
        else:
            raise ParseError(f"expected ':' or '(' after '{name}'", line2)
    raise ParseError("missing '}'", tokens[-1][1] if tokens else 1)


def parse_group_tree(text: str) -> Group:
    tokens = _lex(text)
    if not tokens:
        raise ParseError("empty library", 1)
    pos = 0
    tok, line = tokens[pos]
    if tok in "{}():;,":
        raise ParseError(f"unexpected '{tok}'", line)
    name = tok
    pos += 1
    if pos >= len(tokens) or tokens[pos][0] != "(":
        raise ParseError("expected '(' after group name", line)
    pos += 1
    args = []
    while pos < len(tokens) and tokens[pos][0] != ")":
        t, _ = tokens[pos]
        if t != ",":
            args.append(t.lstrip('"'))
        pos += 1
    if pos >= len(tokens):
        raise ParseError("unterminated group header", line)
    pos += 1
    if pos >= len(tokens) or tokens[pos][0] != "{":
        raise ParseError("expected '{'", line)
    root = Group(kind=name, args=args, line=line)
    pos = _parse_group_body(tokens, pos + 1, root)
    if pos != len(tokens):
        raise ParseError("trailing input after library group", tokens[pos][1])
    return root


# -------------------------------------------------------- unit handling

_TIME_UNITS = {"ps": 1.0, "ns": 1000.0, "us": 1e6}
_CAP_UNITS = {"ff": 1.0, "pf": 1000.0, "nf": 1e6}


def _parse_time_unit(s: str, line: int) -> float:
    s = s.strip().lower()
    for suffix, mult in _TIME_UNITS.items():
        if s.endswith(suffix):
            num = s[: -len(suffix)] or "1"
            try:
                return float(num) * mult
            except ValueError:
                break
    raise ParseError(f"unsupported time_unit '{s}'", line)


def _floats(s: str, line: int) -> list[float]:
    out = []
    for piece in s.replace(",", " ").split():
        try:
            out.append(float(piece))
        except ValueError:
            raise ParseError(f"bad number '{piece}'", line) from None
    return out


# ------------------------------------------------------ table extraction

_SLEW_VARS = {"input_net_transition", "input_transition_time"}
_LOAD_VARS = {"total_output_net_capacitance", "output_net_capacitance"}


@dataclass
class _Template:
    name: str
    slew_index: list[float]
    load_index: list[float]
    transposed: bool  # True when variable_1 is the load axis


def _parse_template(g: Group) -> _Template:
    v1 = g.attrs.get("variable_1", "input_net_transition")
    v2 = g.attrs.get("variable_2", "")
    idx = {name: _floats(args[0], g.line) for name, args in g.complex_attrs
           if name in ("index_1", "index_2") and args}
    i1 = idx.get("index_1", [0.0])
    i2 = idx.get("index_2", [])
    if not v2 and not i2:  # 1-D or scalar template: treat as slew-only
        return _Template(g.args[0] if g.args else "", i1, [0.0], False)
    if not v2 and i2:  # axes given without variable names: assume standard order
        v2 = "total_output_net_capacitance"
    if v1 in _SLEW_VARS and v2 in _LOAD_VARS:
        return _Template(g.args[0] if g.args else "", i1, i2 or [0.0], False)
    if v1 in _LOAD_VARS and v2 in _SLEW_VARS:
        return _Template(g.args[0] if g.args else "", i2 or [0.0], i1, True)
    raise ParseError(f"unsupported template variables ({v1}, {v2})", g.line)


def _table_from_group(g: Group, templates: dict[str, _Template],
                      time_ps: float, cap_ff: float, value_scale: float) -> LookupTable:
    """Build a LookupTable from cell_rise/rise_transition style groups."""
    if not g.args:
        raise MissingTemplate("table group without a template name", g.line)
    tname = g.args[0]
    if tname == "scalar":
        tpl = _Template("scalar", [0.0], [0.0], False)
    elif tname in templates:
        tpl = templates[tname]
    else:
        raise MissingTemplate(f"undefined lu_table_template '{tname}'", g.line)

    slew_axis = list(tpl.slew_index)
    load_axis = list(tpl.load_index)
    transposed = tpl.transposed
    values_rows: list[list[float]] | None = None
    for name, args in g.complex_attrs:
        if name == "index_1" and args:
            axis = _floats(args[0], g.line)
            if transposed:
                load_axis = axis
            else:
                slew_axis = axis
        elif name == "index_2" and args:
            axis = _floats(args[0], g.line)
            if transposed:
                slew_axis = axis
            else:
                load_axis = axis
        elif name == "values":
            values_rows = [_floats(a, g.line) for a in args]
    if values_rows is None:
        raise ParseError("table group without values", g.line)
    # a single quoted row may actually hold the whole flattened table
    if len(values_rows) == 1 and len(values_rows[0]) != (
        len(load_axis) if not transposed else len(slew_axis)
    ):
        flat = values_rows[0]
        cols = len(load_axis) if not transposed else len(slew_axis)
        if cols and len(flat) % cols == 0:
            values_rows = [flat[i: i + cols] for i in range(0, len(flat), cols)]
    if transposed:
        rows = len(load_axis)
        if len(values_rows) != rows or any(len(r) != len(slew_axis) for r in values_rows):
            raise ParseError("values shape does not match template axes", g.line)
        values = [[values_rows[j][i] for j in range(rows)] for i in range(len(slew_axis))]
    else:
        if len(values_rows) != len(slew_axis) or any(
            len(r) != len(load_axis) for r in values_rows
        ):
            raise ParseError("values shape does not match template axes", g.line)
        values = values_rows
    try:
        return LookupTable(
            [s * time_ps for s in slew_axis],
            [c * cap_ff for c in load_axis],
            [[v * value_scale for v in row] for row in values],
        )
    except TimingError as e:
        raise ParseError(str(e), g.line) from None


_DELAY_KINDS = ("cell_rise", "cell_fall")
_SLEW_KINDS = ("rise_transition", "fall_transition")
_CONSTRAINT_TYPES = (
    "setup_rising", "setup_falling", "hold_rising", "hold_falling",
    "recovery_rising", "recovery_falling", "removal_rising", "removal_falling",
    "min_pulse_width", "minimum_period",
)

_SENSE_MAP = {
    "positive_unate": "positive",
    "negative_unate": "negative",
    "non_unate": "non",
}

_KNOWN_ATTRS = {
    "library": {"time_unit", "capacitive_load_unit", "voltage_unit", "current_unit",
                "pulling_resistance_unit", "leakage_power_unit", "delay_model",
                "date", "revision", "comment", "technology", "nom_process",
                "nom_temperature", "nom_voltage"},
    "cell": {"area", "cell_leakage_power", "dont_use", "dont_touch", "cell_footprint"},
    "pin": {"direction", "capacitance", "max_capacitance", "function", "clock",
            "min_capacitance", "max_transition", "rise_capacitance", "fall_capacitance"},
    "timing": {"related_pin", "timing_sense", "timing_type", "when", "sdf_cond"},
    "ff": {"clocked_on", "next_state", "clear", "preset", "clear_preset_var1",
           "clear_preset_var2"},
    "latch": {"enable", "data_in", "clear", "preset"},
}


def _first_identifier(expr: str) -> str:
    word = []
    for c in expr:
        if c.isalnum() or c == "_":
            word.append(c)
        elif word:
            break
    return "".join(word)


def parse_liberty(text: str) -> TimingLibrary:
    root = parse_group_tree(text)
    if root.kind != "library":
        raise ParseError(f"expected a library group, got '{root.kind}'", root.line)
    lib = TimingLibrary(name=root.args[0] if root.args else "")
    warned: set[str] = set()

    def warn(msg: str):
        if msg not in warned:
            warned.add(msg)
            lib.warnings.append(msg)

    def note_unknown(scope: str, g: Group):
        known = _KNOWN_ATTRS.get(scope, set())
        for a in g.attrs:
            if a not in known:
                warn(f"unknown {scope} attribute '{a}' (skipped)")

    time_ps = 1000.0  # default 1ns
    cap_ff = 1000.0  # default 1pf
    if "time_unit" in root.attrs:
        time_ps = _parse_time_unit(root.attrs["time_unit"], root.line)
    for name, args in root.complex_attrs:
        if name == "capacitive_load_unit" and len(args) >= 2:
            unit = args[1].strip().lower()
            if unit not in _CAP_UNITS:
                raise ParseError(f"unsupported capacitance unit '{unit}'", root.line)
            try:
                cap_ff = float(args[0]) * _CAP_UNITS[unit]
            except ValueError:
                raise ParseError(f"bad capacitive_load_unit '{args[0]}'", root.line) from None
    note_unknown("library", root)

    templates: dict[str, _Template] = {}
    for g in root.subgroups("lu_table_template"):
        tpl = _parse_template(g)
        if tpl.name:
            templates[tpl.name] = tpl

    for g in root.groups:
        if g.kind == "lu_table_template":
            continue
        if g.kind != "cell":
            warn(f"unknown library group '{g.kind}' (skipped)")
            continue
        if not g.args:
            raise ParseError("cell group without a name", g.line)
        cell = LibCell(name=g.args[0])
        try:
            cell.area = float(g.attrs.get("area", "0"))
        except ValueError:
            raise ParseError(f"bad area '{g.attrs['area']}'", g.line) from None
        try:
            cell.leakage_power = float(g.attrs.get("cell_leakage_power", "0"))
        except ValueError:
            raise ParseError("bad cell_leakage_power", g.line) from None
        note_unknown("cell", g)

        ff = g.first("ff") or g.first("latch")
        if ff is not None:
            cell.is_sequential = True
            note_unknown("ff" if ff.kind == "ff" else "latch", ff)
            clocked = ff.attrs.get("clocked_on", ff.attrs.get("enable", ""))
            nstate = ff.attrs.get("next_state", ff.attrs.get("data_in", ""))
            cell.clock_pin = _first_identifier(clocked)
            data = _first_identifier(nstate)
            cell.data_pins = (data,) if data else ()

        arcs: list[TimingArc] = []
        for pg in g.subgroups("pin"):
            if not pg.args:
                raise ParseError("pin group without a name", pg.line)
            pin = LibPin(name=pg.args[0],
                         direction=pg.attrs.get("direction", "input"))
            if pin.direction not in ("input", "output", "inout"):
                raise ParseError(f"bad pin direction '{pin.direction}'", pg.line)
            try:
                pin.capacitance = float(pg.attrs.get("capacitance", "0")) * cap_ff
                pin.max_capacitance = float(pg.attrs.get("max_capacitance", "0")) * cap_ff
            except ValueError:
                raise ParseError(f"bad capacitance on pin '{pin.name}'", pg.line) from None
            pin.is_clock = pg.attrs.get("clock", "false").lower() == "true"
            note_unknown("pin", pg)
            cell.pins[pin.name] = pin

            for tg in pg.subgroups("timing"):
                note_unknown("timing", tg)
                ttype = tg.attrs.get("timing_type", "combinational")
                if ttype in _CONSTRAINT_TYPES:
                    continue  # constraint arcs are out of scope
                related = tg.attrs.get("related_pin", "").split()
                if not related:
                    raise ParseError("timing group without related_pin", tg.line)
                delay = None
                slew = None
                try:
                    for kind in _DELAY_KINDS:
                        sub = tg.first(kind)
                        if sub is None:
                            continue
                        t = _table_from_group(sub, templates, time_ps, cap_ff, time_ps)
                        delay = t if delay is None else delay.maxed_with(t)
                    for kind in _SLEW_KINDS:
                        sub = tg.first(kind)
                        if sub is None:
                            continue
                        t = _table_from_group(sub, templates, time_ps, cap_ff, time_ps)
                        slew = t if slew is None else slew.maxed_with(t)
                except TimingError as e:
                    raise ParseError(str(e), tg.line) from None
                if delay is None:
                    continue  # power-only or unsupported group
                if slew is None:
                    slew = LookupTable.constant(0.0)
                sense = _SENSE_MAP.get(tg.attrs.get("timing_sense", ""), "non")
                for rp in related:
                    arcs.append(TimingArc(
                        from_pin=rp, to_pin=pin.name, delay=delay, out_slew=slew,
                        timing_sense=sense, timing_type=ttype,
                    ))

        for arc in arcs:
            if arc.from_pin not in cell.pins or arc.to_pin not in cell.pins:
                raise ParseError(
                    f"arc {arc.from_pin}->{arc.to_pin} references unknown pin "
                    f"in cell '{cell.name}'", g.line)
        cell.arcs = arcs
        if cell.name in lib.cells:
            raise ParseError(f"duplicate cell '{cell.name}'", g.line)
        lib.cells[cell.name] = cell
    return lib
