"""Global placement: median optimality, improvement, determinism."""

import random

import pytest

from rdflow.errors import DesignError, InsufficientArea
from rdflow.geom import Point, Rect
from rdflow.model import (CellMaster, Design, Instance, MasterPin, Net,
                          NetPin, Port, Row)
from rdflow.stages import apply_placement, place_global

SITE_W = 200
ROW_H = 2400


def empty_design(die=(0, 0, 40000, 24000)):
    d = Design("t", 2000)
    d.die_area = Rect.of(*die)
    n_rows = (die[3] - die[1]) // ROW_H
    for i in range(n_rows):
        d.rows.append(Row(
            name=f"ROW_{i}", site_name="core", origin=Point(die[0], die[1] + i * ROW_H),
            num_sites=(die[2] - die[0]) // SITE_W,
            site_width=SITE_W, site_height=ROW_H))
    return d


def make_master(name, w=400, h=ROW_H, pins=("A", "Y")):
    m = CellMaster(name=name, width=w, height=h)
    for p in pins:
        direction = "output" if p == "Y" else "input"
        m.pins[p] = MasterPin(name=p, direction=direction)
    return m


def add_cell(d, name, master, x=None, y=None, status="unplaced"):
    loc = None if x is None else Point(x, y)
    return d.add_instance(Instance(
        name=name, master_name=master.name, master=master,
        location=loc, status=status))


def add_pad(d, name, x, y, direction="input"):
    d.add_port(Port(name=name, direction=direction, location=Point(x, y)))


def connect(d, net_name, *pins):
    net = Net(name=net_name)
    for p in pins:
        if isinstance(p, tuple):
            net.pins.append(NetPin(p[0], p[1]))
        else:
            net.pins.append(NetPin(None, p))
    d.add_net(net)


def test_single_cell_three_pads_lands_at_median():
    d = empty_design()
    m = make_master("M1")
    add_cell(d, "u1", m)
    add_pad(d, "p1", 2000, 2200)
    add_pad(d, "p2", 14000, 6200)
    add_pad(d, "p3", 30000, 22200)
    connect(d, "n1", "p1", ("u1", "A"))
    connect(d, "n2", "p2", ("u1", "A"))
    connect(d, "n3", "p3", ("u1", "A"))
    d.freeze()
    r = place_global(d, iterations=10, seed=3)
    # pin offset defaults to the master center (200, 1200)
    assert r.locations["u1"] == Point(14000 - 200, 6200 - 1200)
    assert r.hpwl == (30000 - 2000) + (22200 - 2200)


def test_single_cell_two_pads_sits_between_them():
    d = empty_design()
    m = make_master("M1")
    add_cell(d, "u1", m)
    add_pad(d, "p1", 4000, 4000)
    add_pad(d, "p2", 20000, 12000)
    connect(d, "n1", "p1", ("u1", "A"))
    connect(d, "n2", "p2", ("u1", "A"))
    d.freeze()
    r = place_global(d, seed=9)
    px = r.locations["u1"].x + 200
    py = r.locations["u1"].y + 1200
    assert 4000 <= px <= 20000 and 4000 <= py <= 12000
    assert r.hpwl == (20000 - 4000) + (12000 - 4000)


def test_zero_movable_cells_is_identity():
    d = empty_design()
    m = make_master("M1")
    add_cell(d, "u1", m, 800, 0, status="fixed")
    add_cell(d, "u2", m, 5000, ROW_H, status="fixed")
    connect(d, "n1", ("u1", "Y"), ("u2", "A"))
    d.freeze()
    r = place_global(d)
    assert r.locations["u1"] == Point(800, 0)
    assert r.locations["u2"] == Point(5000, ROW_H)
    # both pins fall at master centers
    assert r.hpwl == (5200 - 1000) + (ROW_H + 1200 - 1200)


def test_insufficient_area():
    d = Design("t", 2000)
    d.die_area = Rect.of(0, 0, 2000, ROW_H)
    d.rows.append(Row(name="R0", site_name="core", origin=Point(0, 0),
                      num_sites=5, site_width=SITE_W, site_height=ROW_H))
    m = make_master("BIG", w=1200)
    add_cell(d, "u1", m)
    add_cell(d, "u2", m)
    d.freeze()
    with pytest.raises(InsufficientArea):
        place_global(d)


def test_requires_rows():
    d = Design("t", 2000)
    d.die_area = Rect.of(0, 0, 10000, 10000)
    add_cell(d, "u1", make_master("M1"))
    d.freeze()
    with pytest.raises(DesignError):
        place_global(d)


def random_placed_design(rng, n_cells):
    d = empty_design(die=(0, 0, 60000, 36000))
    masters = [make_master("INVX1", 400), make_master("NANDX1", 1200),
               make_master("BUFX2", 800)]
    for i in range(n_cells):
        add_cell(d, f"u{i}", masters[rng.randrange(3)])
    for p in range(4):
        add_pad(d, f"p{p}", rng.randrange(0, 60001, 200),
                rng.randrange(0, 36001, 200), direction="output")
    nid = 0
    for i in range(n_cells):
        # each cell's output fans out to a couple of sinks
        sinks = [(f"u{rng.randrange(n_cells)}", "A")
                 for _ in range(rng.randint(1, 3))]
        sinks = [s for s in sinks if s[0] != f"u{i}"]
        if not sinks:
            continue
        net = Net(name=f"n{nid}")
        net.pins.append(NetPin(f"u{i}", "Y"))
        for s in sinks:
            net.pins.append(NetPin(s[0], s[1]))
        if rng.random() < 0.3:
            net.pins.append(NetPin(None, f"p{rng.randrange(4)}"))
        d.add_net(net)
        nid += 1
    d.freeze()
    return d


def oracle_hpwl(design, positions):
    """Total half-perimeter from scratch, pins at shape or master centers."""
    total = 0
    for net in design.nets.values():
        xs, ys = [], []
        for np in net.pins:
            if np.instance is None:
                port = design.ports[np.pin]
                xs.append(port.location.x)
                ys.append(port.location.y)
            else:
                inst = design.instances[np.instance]
                x, y = positions[np.instance]
                xs.append(x + inst.master.width // 2)
                ys.append(y + inst.master.height // 2)
        if len(xs) >= 2:
            total += (max(xs) - min(xs)) + (max(ys) - min(ys))
    return total


def test_optimization_never_worse_than_spread():
    rng = random.Random(77)
    for _ in range(50):
        d = random_placed_design(rng, rng.randint(3, 14))
        seed = rng.randrange(10000)
        before = place_global(d, iterations=0, seed=seed)
        after = place_global(d, iterations=15, seed=seed)
        assert after.hpwl <= before.hpwl
        die = d.die_area
        for name, inst in d.instances.items():
            loc = after.locations[name]
            assert die.lo.x <= loc.x <= die.hi.x - inst.master.width
            assert die.lo.y <= loc.y <= die.hi.y - inst.master.height


def test_converged_result_is_single_cell_optimal():
    rng = random.Random(5)
    for trial in range(12):
        d = random_placed_design(rng, 8)
        r = place_global(d, iterations=200, seed=trial)
        positions = {n: (p.x, p.y) for n, p in r.locations.items()}
        base = oracle_hpwl(d, positions)
        assert base == r.hpwl
        die = d.die_area
        for name in sorted(d.instances):
            inst = d.instances[name]
            xmax = die.hi.x - inst.master.width
            ymax = die.hi.y - inst.master.height
            for _ in range(20):
                alt = dict(positions)
                alt[name] = (rng.randint(0, xmax), rng.randint(0, ymax))
                assert oracle_hpwl(d, alt) >= base


def test_same_seed_same_result():
    rng = random.Random(123)
    d = random_placed_design(rng, 10)
    a = place_global(d, iterations=8, seed=42)
    b = place_global(d, iterations=8, seed=42)
    assert a.locations == b.locations
    assert a.hpwl == b.hpwl


def test_apply_placement_sets_status():
    d = empty_design()
    m = make_master("M1")
    add_cell(d, "u1", m)
    add_cell(d, "u2", m, 1000, 0, status="fixed")
    add_pad(d, "p1", 200, 200)
    connect(d, "n1", "p1", ("u1", "A"))
    d.freeze()
    r = place_global(d, seed=1)
    apply_placement(d, r)
    assert d.instances["u1"].status == "placed"
    assert d.instances["u1"].location == r.locations["u1"]
    assert d.instances["u2"].location == Point(1000, 0)
