"""Synthetic benchmark generator.

Produces a matched input set for the full flow: technology and cell
geometry in LEF, cell timing in Liberty, a gate-level netlist in
structural Verilog, a floorplan DEF with unplaced components, and an
SDC file. Everything parses back through this package's own readers,
and a fixed seed reproduces the files byte for byte.

Geometry is built on one grid: 2000 DBU per micron, 400 DBU sites and
track pitch, 2400 DBU rows, pin squares of 200 DBU centered on track
crossings. Every Liberty delay is a multiple of 5 ps.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from pathlib import Path

DBU = 2000
SITE_W = 400
ROW_H = 2400
PITCH = 400
WIRE_W = 200
PIN_HALF = 100
GCELL = 4000

# name, width, input pins (the output pin is Y)
_COMB = (
    ("INV_X1", 800, ("A",)),
    ("BUF_X1", 800, ("A",)),
    ("NAND2_X1", 1200, ("A", "B")),
    ("NOR2_X1", 1200, ("A", "B")),
)
# name, width, height; pins are D, CK -> Q
_FLOPS = (("DFF_X1", 2000, ROW_H), ("DFFH_X2", 1200, 2 * ROW_H))

_SENSE = {"INV_X1": "negative_unate", "BUF_X1": "positive_unate",
          "NAND2_X1": "negative_unate", "NOR2_X1": "negative_unate"}


@dataclass
class Benchmark:
    """The five generated input files, as text."""

    name: str
    lef: str
    liberty: str
    verilog: str
    floorplan_def: str
    sdc: str

    def write_to(self, directory) -> dict[str, Path]:
        base = Path(directory)
        base.mkdir(parents=True, exist_ok=True)
        paths = {
            "lef": base / f"{self.name}.lef",
            "liberty": base / f"{self.name}.lib",
            "verilog": base / f"{self.name}.v",
            "def": base / f"{self.name}.def",
            "sdc": base / f"{self.name}.sdc",
        }
        texts = {"lef": self.lef, "liberty": self.liberty,
                 "verilog": self.verilog, "def": self.floorplan_def,
                 "sdc": self.sdc}
        for key, path in paths.items():
            path.write_text(texts[key])
        return paths


def _um(v: int) -> str:
    return f"{v / DBU:g}"


def _pin_sites(width: int, height: int, count: int):
    """First `count` track crossings inside the cell, plus the last one.

    Crossings walk columns left to right; the output pin takes the far
    corner so input and output shapes never collide.
    """
    xs = list(range(PITCH // 2, width, PITCH))
    ys = list(range(PITCH // 2, height, PITCH))
    sites = [(x, y) for x in xs for y in ys]
    if count + 1 > len(sites):
        raise ValueError(f"cell {width}x{height} has room for "
                         f"{len(sites) - 1} input pins, need {count}")
    return sites[:count], sites[-1]


def _master_pins():
    """name -> (width, height, [(pin, direction, (x, y))])."""
    out = {}
    for name, width, inputs in _COMB:
        ins, last = _pin_sites(width, ROW_H, len(inputs))
        pins = [(p, "INPUT", xy) for p, xy in zip(inputs, ins)]
        pins.append(("Y", "OUTPUT", last))
        out[name] = (width, ROW_H, pins)
    for name, width, height in _FLOPS:
        ins, last = _pin_sites(width, height, 2)
        pins = [("D", "INPUT", ins[0]), ("CK", "INPUT", ins[1]),
                ("Q", "OUTPUT", last)]
        out[name] = (width, height, pins)
    return out


def _render_lef(num_layers: int, masters) -> str:
    w = []
    w.append("VERSION 5.8 ;")
    w.append("UNITS")
    w.append(f"  DATABASE MICRONS {DBU} ;")
    w.append("END UNITS")
    w.append("")
    for i in range(1, num_layers + 1):
        direction = "HORIZONTAL" if i % 2 == 1 else "VERTICAL"
        w.append(f"LAYER M{i}")
        w.append("  TYPE ROUTING ;")
        w.append(f"  DIRECTION {direction} ;")
        w.append(f"  PITCH {_um(PITCH)} ;")
        w.append(f"  WIDTH {_um(WIRE_W)} ;")
        w.append("  AREA 0.01 ;")
        w.append("  SPACINGTABLE")
        w.append("    PARALLELRUNLENGTH 0.0")
        w.append(f"    WIDTH 0.0 {_um(WIRE_W)} ;")
        w.append(f"END M{i}")
        w.append("")
        if i < num_layers:
            w.append(f"LAYER V{i}")
            w.append("  TYPE CUT ;")
            w.append("  SPACING 0.125 ;")
            w.append(f"END V{i}")
            w.append("")
    w.append("SITE core")
    w.append("  CLASS CORE ;")
    w.append(f"  SIZE {_um(SITE_W)} BY {_um(ROW_H)} ;")
    w.append("END core")
    w.append("")
    for i in range(1, num_layers):
        w.append(f"VIA via{i} DEFAULT")
        w.append(f"  LAYER M{i} ;")
        w.append("    RECT -0.05 -0.05 0.05 0.05 ;")
        w.append(f"  LAYER V{i} ;")
        w.append("    RECT -0.025 -0.025 0.025 0.025 ;")
        w.append(f"  LAYER M{i + 1} ;")
        w.append("    RECT -0.05 -0.05 0.05 0.05 ;")
        w.append(f"END via{i}")
        w.append("")
    for name, (width, height, pins) in masters.items():
        w.append(f"MACRO {name}")
        w.append("  CLASS CORE ;")
        w.append("  ORIGIN 0 0 ;")
        w.append(f"  SIZE {_um(width)} BY {_um(height)} ;")
        w.append("  SITE core ;")
        for pin, direction, (x, y) in pins:
            w.append(f"  PIN {pin}")
            w.append(f"    DIRECTION {direction} ;")
            w.append("    USE SIGNAL ;")
            w.append("    PORT")
            w.append("      LAYER M1 ;")
            w.append(f"        RECT {_um(x - PIN_HALF)} {_um(y - PIN_HALF)}"
                     f" {_um(x + PIN_HALF)} {_um(y + PIN_HALF)} ;")
            w.append("    END")
            w.append(f"  END {pin}")
        w.append(f"END {name}")
        w.append("")
    w.append("END LIBRARY")
    return "\n".join(w) + "\n"


def _render_liberty(lib_name: str, masters, delays) -> str:
    w = []
    w.append(f"library ({lib_name}) {{")
    w.append('  time_unit : "1ps";')
    w.append("  capacitive_load_unit (1, ff);")
    w.append("  lu_table_template (t2x2) {")
    w.append("    variable_1 : input_net_transition;")
    w.append("    variable_2 : total_output_net_capacitance;")
    w.append('    index_1 ("0, 100");')
    w.append('    index_2 ("0, 200");')
    w.append("  }")
    flops = {n for n, _, _ in _FLOPS}
    for name, (width, height, pins) in masters.items():
        area = (width / DBU) * (height / DBU)
        w.append(f"  cell ({name}) {{")
        w.append(f"    area : {area:g};")
        sequential = name in flops
        if sequential:
            w.append('    ff (IQ, IQN) { clocked_on : "CK";'
                     ' next_state : "D"; }')
        out_pin = pins[-1][0]
        for pin, direction, _ in pins:
            if direction == "INPUT":
                extra = " clock : true;" if sequential and pin == "CK" else ""
                w.append(f"    pin ({pin}) {{ direction : input;"
                         f" capacitance : 1.0;{extra} }}")
        w.append(f"    pin ({out_pin}) {{")
        w.append("      direction : output;")
        w.append("      max_capacitance : 200.0;")
        related = ["CK"] if sequential else \
            [p for p, d, _ in pins if d == "INPUT"]
        for rel in related:
            delay, slew = delays[(name, rel)]
            w.append("      timing () {")
            w.append(f'        related_pin : "{rel}";')
            if sequential:
                w.append("        timing_type : rising_edge;")
            else:
                w.append(f"        timing_sense : {_SENSE[name]};")
            table = f'{{ values ("{delay}, {delay}", "{delay}, {delay}"); }}'
            slews = f'{{ values ("{slew}, {slew}", "{slew}, {slew}"); }}'
            w.append(f"        cell_rise (t2x2) {table}")
            w.append(f"        cell_fall (t2x2) {table}")
            w.append(f"        rise_transition (t2x2) {slews}")
            w.append(f"        fall_transition (t2x2) {slews}")
            w.append("      }")
        w.append("    }")
        w.append("  }")
    w.append("}")
    return "\n".join(w) + "\n"


def _render_verilog(name, inputs, outputs, wires, gates) -> str:
    w = []
    w.append(f"// {name}: generated gate-level benchmark")
    ports = ", ".join(inputs + outputs)
    w.append(f"module {name} ({ports});")
    for p in inputs:
        w.append(f"  input {p};")
    for p in outputs:
        w.append(f"  output {p};")
    for net in wires:
        w.append(f"  wire {net};")
    w.append("")
    for inst, master, conns in gates:
        pin_list = ", ".join(f".{pin}({net})" for pin, net in conns)
        w.append(f"  {master} {inst} ( {pin_list} );")
    w.append("endmodule")
    return "\n".join(w) + "\n"


def _render_def(name, die_w, die_h, num_layers, gates, ports, nets) -> str:
    w = []
    w.append("VERSION 5.8 ;")
    w.append('DIVIDERCHAR "/" ;')
    w.append('BUSBITCHARS "[]" ;')
    w.append(f"DESIGN {name} ;")
    w.append(f"UNITS DISTANCE MICRONS {DBU} ;")
    w.append(f"DIEAREA ( 0 0 ) ( {die_w} {die_h} ) ;")
    sites = die_w // SITE_W
    for r in range(die_h // ROW_H):
        orient = "N" if r % 2 == 0 else "FS"
        w.append(f"ROW ROW_{r} core 0 {r * ROW_H} {orient}"
                 f" DO {sites} BY 1 STEP {SITE_W} 0 ;")
    half = PITCH // 2
    for i in range(1, num_layers + 1):
        w.append(f"TRACKS X {half} DO {die_w // PITCH} STEP {PITCH}"
                 f" LAYER M{i} ;")
        w.append(f"TRACKS Y {half} DO {die_h // PITCH} STEP {PITCH}"
                 f" LAYER M{i} ;")
    w.append(f"GCELLGRID X 0 DO {die_w // GCELL + 1} STEP {GCELL} ;")
    w.append(f"GCELLGRID Y 0 DO {die_h // GCELL + 1} STEP {GCELL} ;")
    w.append(f"COMPONENTS {len(gates)} ;")
    for inst, master, _ in gates:
        w.append(f"- {inst} {master} ;")
    w.append("END COMPONENTS")
    w.append(f"PINS {len(ports)} ;")
    for pname, direction, x, y in ports:
        w.append(f"- {pname} + NET {pname} + DIRECTION {direction}"
                 " + USE SIGNAL")
        w.append(f"  + LAYER M1 ( -{PIN_HALF} -{PIN_HALF} )"
                 f" ( {PIN_HALF} {PIN_HALF} ) + PLACED ( {x} {y} ) N ;")
    w.append("END PINS")
    w.append(f"NETS {len(nets)} ;")
    for net, conns in nets:
        refs = " ".join(f"( {a} {b} )" for a, b in conns)
        w.append(f"- {net} {refs} ;")
    w.append("END NETS")
    w.append("END DESIGN")
    return "\n".join(w) + "\n"


def _render_sdc(inputs, outputs, clock_period_ps, has_clock) -> str:
    w = ["# generated boundary conditions"]
    if clock_period_ps is not None and has_clock:
        w.append(f"create_clock -period {clock_period_ps / 1000:g}"
                 " -name clk [get_ports clk]")
    data_ins = [p for p in inputs if p != "clk"]
    if data_ins:
        w.append("set_driving_cell -lib_cell BUF_X1 -pin Y"
                 f" [get_ports {{{' '.join(data_ins)}}}]")
    if outputs:
        w.append(f"set_load 4.0 [get_ports {{{' '.join(outputs)}}}]")
    return "\n".join(w) + "\n"


def generate(name: str = "bench", seed: int = 1, num_cells: int = 500,
             utilization: float = 0.35, num_layers: int = 6,
             ff_fraction: float = 0.15, double_height_fraction: float = 0.25,
             clock_period_ps: float | None = None) -> Benchmark:
    """Build one coherent benchmark.

    num_cells gates are wired as a DAG fed from the input ports; a
    ff_fraction share of them are flops (double_height_fraction of those
    double height) clocked from a dedicated clk port. The die is sized so
    cell area over core area approximates the requested utilization.
    """
    if num_cells < 1:
        raise ValueError("num_cells must be at least 1")
    if not 0.05 <= utilization <= 0.9:
        raise ValueError("utilization must be within [0.05, 0.9]")
    if not 2 <= num_layers <= 9:
        raise ValueError("num_layers must be within [2, 9]")
    for frac in (ff_fraction, double_height_fraction):
        if not 0.0 <= frac <= 1.0:
            raise ValueError("fractions must be within [0, 1]")

    rng = random.Random(seed)
    masters = _master_pins()
    delays = {}
    for mname, (_, _, pins) in masters.items():
        related = ["CK"] if mname in {n for n, _, _ in _FLOPS} else \
            [p for p, d, _ in pins if d == "INPUT"]
        for rel in related:
            delays[(mname, rel)] = (5 * rng.randint(2, 12),
                                    5 * rng.randint(1, 4))

    num_in = max(2, num_cells // 12)
    num_out = min(num_cells, max(1, num_cells // 12))
    data_inputs = [f"in{i}" for i in range(num_in)]

    # gates draw inputs only from earlier outputs, so the netlist is a DAG
    gates = []
    sources = list(data_inputs)
    out_names = {num_cells - num_out + k: f"out{k}" for k in range(num_out)}
    has_clock = False
    for i in range(num_cells):
        out_net = out_names.get(i, f"n{i}")
        if rng.random() < ff_fraction:
            mname = _FLOPS[1][0] if rng.random() < double_height_fraction \
                else _FLOPS[0][0]
            conns = [("D", rng.choice(sources)), ("CK", "clk"),
                     ("Q", out_net)]
            has_clock = True
        else:
            mname, _, in_pins = _COMB[rng.randrange(len(_COMB))]
            conns = [(p, rng.choice(sources)) for p in in_pins]
            conns.append(("Y", out_net))
        gates.append((f"g{i}", mname, conns))
        sources.append(out_net)

    inputs = (["clk"] if has_clock else []) + data_inputs
    outputs = [out_names[i] for i in sorted(out_names)]
    wires = [f"n{i}" for i in range(num_cells) if i not in out_names]

    # die sizing: near-square, whole rows, even row count, ports must fit
    total_area = sum(masters[m][0] * masters[m][1] for _, m, _ in gates)
    target = total_area / utilization
    side = math.sqrt(target)
    rows = max(2, math.ceil(side / ROW_H))
    port_rows = math.ceil((max(len(inputs), len(outputs)) * 2 * PITCH
                           + PITCH) / ROW_H)
    rows = max(rows, port_rows)
    if rows % 2:
        rows += 1
    die_h = rows * ROW_H
    die_w = max(2 * GCELL, GCELL * math.ceil(target / die_h / GCELL))

    half = PITCH // 2
    ports = []
    for i, p in enumerate(inputs):
        ports.append((p, "INPUT", half, half + i * 2 * PITCH))
    for i, p in enumerate(outputs):
        ports.append((p, "OUTPUT", die_w - half, half + i * 2 * PITCH))

    net_conns: dict[str, list[tuple[str, str]]] = {}
    for p in inputs + outputs:
        net_conns[p] = [("PIN", p)]
    for net in wires:
        net_conns[net] = []
    for inst, _, conns in gates:
        for pin, net in conns:
            net_conns[net].append((inst, pin))
    nets = [(n, c) for n, c in net_conns.items() if c]

    lib_name = f"{name}_lib"
    return Benchmark(
        name=name,
        lef=_render_lef(num_layers, masters),
        liberty=_render_liberty(lib_name, masters, delays),
        verilog=_render_verilog(name, inputs, outputs, wires, gates),
        floorplan_def=_render_def(name, die_w, die_h, num_layers, gates,
                                  ports, nets),
        sdc=_render_sdc(inputs, outputs, clock_period_ps, has_clock),
    )
