"""Benchmark generator: outputs parse, agree with each other, reproduce."""

import random

from rdflow.gen import generate
from rdflow.io.deffmt import parse_def
from rdflow.io.lef import parse_lef
from rdflow.io.liberty import parse_liberty
from rdflow.io.sdc import parse_sdc
from rdflow.io.verilog import parse_verilog
from rdflow.model import attach_masters


def test_outputs_parse_and_cross_reference():
    b = generate(name="t40", seed=3, num_cells=40)
    tech, masters = parse_lef(b.lef)
    lib = parse_liberty(b.liberty)
    netlist = parse_verilog(b.verilog)
    design = parse_def(b.floorplan_def)
    cons = parse_sdc(b.sdc)

    assert set(masters) == set(lib.cells)
    assert len(design.instances) == 40 == len(netlist.instances)
    assert tech.dbu_per_micron == design.dbu_per_micron == 2000
    assert len(tech.routing_layers) == 6
    assert len([l for l in tech.layers if l.kind == "cut"]) == 5
    for o in range(1, 6):
        assert tech.via_between(o) is not None

    # freezing cross-checks every DEF net pin against the LEF masters
    attach_masters(design, masters)
    design.technology = tech
    design.freeze()

    data_ins = [p for p, d in netlist.ports if d == "input" and p != "clk"]
    outs = [p for p, d in netlist.ports if d == "output"]
    assert set(cons.input_drivers) == set(data_ins)
    assert all(v == ("BUF_X1", "Y") for v in cons.input_drivers.values())
    assert cons.output_loads == {p: 4.0 for p in outs}


def test_every_pin_lands_on_a_track_crossing():
    b = generate(name="g", seed=9, num_cells=25)
    tech, masters = parse_lef(b.lef)
    for m in masters.values():
        for pin in m.pins.values():
            for _, rect in pin.shapes:
                c = rect.center()
                assert c.x % 400 == 200 and c.y % 400 == 200
    design = parse_def(b.floorplan_def)
    for port in design.ports.values():
        assert port.location.x in (200, design.die_area.hi.x - 200)
        assert port.location.y % 400 == 200


def test_delays_are_constant_tables_in_multiples_of_five():
    b = generate(name="g", seed=11, num_cells=1)
    lib = parse_liberty(b.liberty)
    for cell in lib.cells.values():
        for arc in cell.arcs:
            flat = [v for row in arc.delay.values for v in row]
            assert len(set(flat)) == 1
            assert flat[0] % 5 == 0 and flat[0] > 0


def test_same_seed_reproduces_bytes():
    a = generate(name="g", seed=21, num_cells=30)
    b = generate(name="g", seed=21, num_cells=30)
    assert (a.lef, a.liberty, a.verilog, a.floorplan_def, a.sdc) == \
           (b.lef, b.liberty, b.verilog, b.floorplan_def, b.sdc)
    c = generate(name="g", seed=22, num_cells=30)
    assert c.liberty != a.liberty or c.verilog != a.verilog


def test_die_respects_requested_utilization():
    rng = random.Random(5)
    for _ in range(5):
        util = rng.uniform(0.2, 0.6)
        n = rng.randint(20, 200)
        b = generate(name="g", seed=rng.randint(0, 999), num_cells=n,
                     utilization=util)
        tech, masters = parse_lef(b.lef)
        design = parse_def(b.floorplan_def)
        attach_masters(design, masters)
        design.freeze()
        total = sum(i.master.width * i.master.height
                    for i in design.instances.values())
        die = design.die_area
        area = (die.hi.x - die.lo.x) * (die.hi.y - die.lo.y)
        assert total / area <= util + 1e-9


def test_flop_mix_and_clock_wiring():
    b = generate(name="g", seed=4, num_cells=60, ff_fraction=0.5,
                 double_height_fraction=0.5, clock_period_ps=2000.0)
    netlist = parse_verilog(b.verilog)
    kinds = [i.master for i in netlist.instances]
    assert "DFF_X1" in kinds and "DFFH_X2" in kinds
    for inst in netlist.instances:
        if inst.master.startswith("DFF"):
            assert ("CK", "clk") in inst.connections
    cons = parse_sdc(b.sdc)
    assert cons.clock_period == 2000.0 and cons.clock_port == "clk"


def test_write_to_creates_the_five_files(tmp_path):
    b = generate(name="disk", seed=1, num_cells=5)
    paths = b.write_to(tmp_path)
    assert sorted(paths) == ["def", "lef", "liberty", "sdc", "verilog"]
    for p in paths.values():
        assert p.exists() and p.stat().st_size > 0
    assert paths["verilog"].name == "disk.v"
