"""SDC constraint reader.

Supported commands: create_clock, set_driving_cell, set_load. Periods are
nanoseconds (stored as picoseconds); loads follow the library capacitance
unit (stored as femtofarads). Unsupported commands become warnings so a
constraint file from a richer flow still loads.
"""

from __future__ import annotations

from ..errors import ParseError
from ..model import Constraints


def _split_commands(text: str) -> list[tuple[list[str], int]]:
    """Tokenized commands with their starting line numbers.

    Handles # comments, backslash continuations, [bracket] groups kept as
    single tokens, and {braced} lists kept as single tokens.
    """
    commands: list[tuple[list[str], int]] = []
    tokens: list[str] = []
    start_line = 1
    line = 1
    i = 0
    n = len(text)
    word: list[str] = []
    depth_tok: list[str] = []

    def flush_word():
        if word:
            tokens.append("".join(word))
            word.clear()

    def flush_command():
        nonlocal start_line
        flush_word()
        if tokens:
            commands.append((list(tokens), start_line))
            tokens.clear()

    while i < n:
        c = text[i]
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "\\" and i + 1 < n and text[i + 1] == "\n":
            i += 2
            line += 1
            continue
        if c == "\n" or c == ";":
            flush_command()
            if c == "\n":
                line += 1
            start_line = line
            i += 1
            continue
        if c.isspace():
            flush_word()
            i += 1
            continue
        if c in "[{":
            close = "]" if c == "[" else "}"
            depth = 1
            j = i + 1
            while j < n and depth:
                if text[j] == c:
                    depth += 1
                elif text[j] == close:
                    depth -= 1
                elif text[j] == "\n":
                    line += 1
                j += 1
            if depth:
                raise ParseError(f"unbalanced '{c}'", line)
            flush_word()
            tokens.append(text[i:j])
            i = j
            continue
        if not word and not tokens:
            start_line = line
        word.append(c)
        i += 1
    flush_command()
    return commands


def _ports_of(tok: str, line: int) -> list[str]:
    """Resolve a target token: [get_ports x], [get_ports {a b}], or bare name."""
    t = tok.strip()
    if t.startswith("[") and t.endswith("]"):
        inner = t[1:-1].strip()
        parts = inner.split(None, 1)
        if not parts or parts[0] not in ("get_ports", "get_port"):
            raise ParseError(f"unsupported object query '{t}'", line)
        if len(parts) == 1:
            raise ParseError("get_ports without a name", line)
        arg = parts[1].strip()
        if arg.startswith("{") and arg.endswith("}"):
            names = arg[1:-1].split()
        else:
            names = [arg]
        if not names:
            raise ParseError("get_ports with an empty list", line)
        return names
    if t.startswith("{") and t.endswith("}"):
        return t[1:-1].split()
    return [t]


def _float_arg(tokens: list[str], i: int, line: int, what: str) -> float:
    if i >= len(tokens):
        raise ParseError(f"missing value for {what}", line)
    try:
        return float(tokens[i])
    except ValueError:
        raise ParseError(f"bad {what} '{tokens[i]}'", line) from None


def parse_sdc(text: str, cap_unit_ff: float = 1.0) -> Constraints:
    """Parse SDC text.

    cap_unit_ff: femtofarads per library capacitance unit, used to scale
    set_load values into fF.
    """
    cons = Constraints()
    for tokens, line in _split_commands(text):
        cmd = tokens[0]
        if cmd == "create_clock":
            period = None
            name = None
            targets: list[str] = []
            i = 1
            while i < len(tokens):
                t = tokens[i]
                if t == "-period":
                    period = _float_arg(tokens, i + 1, line, "-period")
                    i += 2
                elif t == "-name":
                    if i + 1 >= len(tokens):
                        raise ParseError("missing value for -name", line)
                    name = tokens[i + 1]
                    i += 2
                elif t == "-waveform":
                    i += 2  # ignored
                elif t.startswith("-"):
                    raise ParseError(f"unsupported create_clock option '{t}'", line)
                else:
                    targets.extend(_ports_of(t, line))
                    i += 1
            if period is None:
                raise ParseError("create_clock without -period", line)
            if period <= 0:
                raise ParseError("clock period must be positive", line)
            cons.clock_period = period * 1000.0  # ns -> ps
            if len(targets) > 1:
                raise ParseError("create_clock with multiple ports", line)
            cons.clock_port = targets[0] if targets else name
        elif cmd == "set_driving_cell":
            cell = None
            pin = None
            targets = []
            i = 1
            while i < len(tokens):
                t = tokens[i]
                if t == "-lib_cell":
                    if i + 1 >= len(tokens):
                        raise ParseError("missing value for -lib_cell", line)
                    cell = tokens[i + 1]
                    i += 2
                elif t == "-pin":
                    if i + 1 >= len(tokens):
                        raise ParseError("missing value for -pin", line)
                    pin = tokens[i + 1]
                    i += 2
                elif t in ("-library", "-input_transition_rise", "-input_transition_fall"):
                    i += 2
                elif t.startswith("-"):
                    raise ParseError(f"unsupported set_driving_cell option '{t}'", line)
                else:
                    targets.extend(_ports_of(t, line))
                    i += 1
            if cell is None:
                raise ParseError("set_driving_cell without -lib_cell", line)
            if not targets:
                raise ParseError("set_driving_cell without target ports", line)
            for p in targets:
                cons.input_drivers[p] = (cell, pin or "")
        elif cmd == "set_load":
            value = None
            targets = []
            i = 1
            while i < len(tokens):
                t = tokens[i]
                if t in ("-pin_load", "-wire_load", "-max", "-min"):
                    i += 1
                elif t.startswith("-"):
                    raise ParseError(f"unsupported set_load option '{t}'", line)
                elif value is None:
                    value = _float_arg(tokens, i, line, "load value")
                    i += 1
                else:
                    targets.extend(_ports_of(t, line))
                    i += 1
            if value is None:
                raise ParseError("set_load without a value", line)
            if not targets:
                raise ParseError("set_load without target ports", line)
            for p in targets:
                cons.output_loads[p] = value * cap_unit_ff
        else:
            cons.warnings.append(f"unsupported command '{cmd}' (ignored)")
    return cons
