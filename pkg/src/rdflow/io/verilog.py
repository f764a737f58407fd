"""Structural (gate-level) Verilog reader and writer.

The accepted subset is a single module with scalar ports, wire/input/output
declarations, and named-port instantiations:

    module top (a, b, y);
      input a, b;
      output y;
      wire n1;
      NAND2_X1 u1 ( .A(a), .B(b), .Y(n1) );
      INV_X1   u2 ( .A(n1), .Y(y) );
    endmodule

Anything behavioral (always, initial, assign) is rejected, and in strict
mode every net appearing in a connection must be declared beforehand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import BehavioralConstruct, ParseError
from .templates import TokenCursor, strip_comments, tokenize_with_lines

_KEYWORDS = {
    "module", "endmodule", "input", "output", "inout", "wire",
    "assign", "always", "initial", "reg",
}

_BEHAVIORAL = {"assign", "always", "initial", "reg"}


@dataclass
class NetlistInstance:
    name: str
    master: str
    connections: list[tuple[str, str]] = field(default_factory=list)  # (pin, net)


@dataclass
class Netlist:
    """One structural module: ports, declared nets, gate instances."""

    name: str = ""
    ports: list[tuple[str, str]] = field(default_factory=list)  # (name, direction)
    wires: list[str] = field(default_factory=list)
    instances: list[NetlistInstance] = field(default_factory=list)

    def port_names(self) -> list[str]:
        return [n for n, _ in self.ports]

    def net_names(self) -> list[str]:
        return self.port_names() + self.wires


def _ident(cur: TokenCursor) -> str:
    tok = cur.next()
    line = cur.tokens[cur.pos - 1][1]
    if tok in _KEYWORDS or not tok or not (tok[0].isalpha() or tok[0] in "_\\"):
        raise ParseError(f"expected identifier, got '{tok}'", line)
    return tok


def parse_verilog(text: str, strict: bool = True) -> Netlist:
    """Parse one structural module.

    strict: reject connections to nets that were never declared instead of
    creating implicit one-bit wires.
    """
    cur = TokenCursor(tokenize_with_lines(strip_comments(text)))
    netlist = Netlist()

    while not cur.eof() and cur.peek() != "module":
        tok = cur.next()
        if tok in _BEHAVIORAL:
            raise BehavioralConstruct(f"'{tok}' outside a module", cur.tokens[cur.pos - 1][1])
        raise ParseError(f"expected 'module', got '{tok}'", cur.tokens[cur.pos - 1][1])
    if cur.eof():
        raise ParseError("no module found", cur.line)
    cur.expect("module")
    netlist.name = _ident(cur)

    # header port list: plain names, or ANSI declarations with directions
    header_order: list[str] = []
    directions: dict[str, str] = {}
    if cur.peek() == "(":
        cur.next()
        direction = None
        while cur.peek() != ")":
            tok = cur.peek()
            if tok in ("input", "output", "inout"):
                direction = cur.next()
                continue
            if tok == "wire":  # ANSI style allows 'output wire y'
                cur.next()
                continue
            name = _ident(cur)
            header_order.append(name)
            if direction is not None:
                directions[name] = direction
            if cur.peek() == ",":
                cur.next()
        cur.expect(")")
    cur.expect(";")

    declared: set[str] = set()
    header_set = set(header_order)

    def declare_port(name: str, direction: str, line: int):
        if any(p == name for p, _ in netlist.ports):
            raise ParseError(f"port '{name}' declared twice", line)
        if header_set and name not in header_set:
            raise ParseError(f"port '{name}' not in module header", line)
        netlist.ports.append((name, direction))
        declared.add(name)

    for name in header_order:
        if name in directions:
            declare_port(name, directions[name], 1)

    instance_names: set[str] = set()

    while True:
        tok = cur.peek()
        if tok is None:
            raise ParseError("missing 'endmodule'", cur.line)
        line = cur.line
        if tok == "endmodule":
            cur.next()
            break
        if tok in _BEHAVIORAL:
            raise BehavioralConstruct(f"behavioral construct '{tok}'", line)
        if tok in ("input", "output", "inout"):
            direction = cur.next()
            while True:
                name = _ident(cur)
                declare_port(name, direction, line)
                if cur.peek() == ",":
                    cur.next()
                    continue
                break
            cur.expect(";")
            continue
        if tok == "wire":
            cur.next()
            while True:
                name = _ident(cur)
                if name in declared:
                    raise ParseError(f"net '{name}' declared twice", line)
                netlist.wires.append(name)
                declared.add(name)
                if cur.peek() == ",":
                    cur.next()
                    continue
                break
            cur.expect(";")
            continue

        # instantiation: MASTER instname ( .pin(net), ... );
        master = _ident(cur)
        inst_name = _ident(cur)
        if inst_name in instance_names:
            raise ParseError(f"instance '{inst_name}' declared twice", line)
        instance_names.add(inst_name)
        inst = NetlistInstance(name=inst_name, master=master)
        cur.expect("(")
        seen_pins: set[str] = set()
        while cur.peek() != ")":
            cur.expect(".")
            pin = _ident(cur)
            if pin in seen_pins:
                raise ParseError(f"pin '{pin}' connected twice on '{inst_name}'", cur.line)
            seen_pins.add(pin)
            cur.expect("(")
            if cur.peek() == ")":  # unconnected pin: .A()
                cur.next()
                if cur.peek() == ",":
                    cur.next()
                continue
            net = _ident(cur)
            net_line = cur.tokens[cur.pos - 1][1]
            cur.expect(")")
            if net not in declared:
                if strict:
                    raise ParseError(f"net '{net}' used but never declared", net_line)
                netlist.wires.append(net)
                declared.add(net)
            inst.connections.append((pin, net))
            if cur.peek() == ",":
                cur.next()
        cur.expect(")")
        cur.expect(";")
        netlist.instances.append(inst)

    while not cur.eof():
        tok = cur.next()
        raise ParseError(f"unexpected '{tok}' after endmodule", cur.tokens[cur.pos - 1][1])

    missing = [n for n in header_order if not any(p == n for p, _ in netlist.ports)]
    if missing:
        raise ParseError(f"header port '{missing[0]}' has no direction declaration", 1)
    return netlist


def write_verilog(netlist: Netlist) -> str:
    """Serialize a netlist back to the structural subset, deterministically."""
    lines = [f"module {netlist.name} ({', '.join(netlist.port_names())});"]
    for direction in ("input", "output", "inout"):
        names = [n for n, d in netlist.ports if d == direction]
        for n in names:
            lines.append(f"  {direction} {n};")
    for w in netlist.wires:
        lines.append(f"  wire {w};")
    for inst in netlist.instances:
        conns = ", ".join(f".{p}({n})" for p, n in inst.connections)
        lines.append(f"  {inst.master} {inst.name} ( {conns} );")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"
