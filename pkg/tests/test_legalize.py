"""Legalization: fixed points, displacement bounds, zero-violation output."""

import random

import pytest

from rdflow.check import check_legality
from rdflow.errors import CannotLegalize, Unplaced
from rdflow.geom import Point, Rect
from rdflow.model import CellMaster, Design, Instance, Row
from rdflow.stages import apply_placement, legalize

SITE_W = 200
ROW_H = 2400


def make_design(die=(0, 0, 40000, 24000), rows=None):
    d = Design("t", 2000)
    d.die_area = Rect.of(*die)
    n_rows = (die[3] - die[1]) // ROW_H if rows is None else rows
    for i in range(n_rows):
        d.rows.append(Row(
            name=f"ROW_{i}", site_name="core",
            origin=Point(die[0], die[1] + i * ROW_H),
            num_sites=(die[2] - die[0]) // SITE_W,
            site_width=SITE_W, site_height=ROW_H))
    return d


def add_cell(d, name, x, y, w=400, h=ROW_H, status="placed"):
    master = CellMaster(name=f"M_{name}", width=w, height=h)
    loc = None if x is None else Point(x, y)
    d.add_instance(Instance(
        name=name, master_name=master.name, master=master,
        location=loc, status=status))


def test_already_legal_is_fixed_point():
    d = make_design()
    add_cell(d, "a", 0, 0)
    add_cell(d, "b", 400, 0)
    add_cell(d, "c", 2000, ROW_H, w=1200)
    d.freeze()
    r = legalize(d)
    assert r.locations["a"] == Point(0, 0)
    assert r.locations["b"] == Point(400, 0)
    assert r.locations["c"] == Point(2000, ROW_H)


def test_second_cell_at_same_site_shifts():
    d = make_design()
    add_cell(d, "a", 800, 0)
    add_cell(d, "b", 800, 0)
    d.freeze()
    r = legalize(d)
    pa, pb = r.locations["a"], r.locations["b"]
    assert pa != pb
    assert abs(pa.x - pb.x) >= 400 or pa.y != pb.y
    apply_placement(d, r)
    assert check_legality(d) == []


def test_off_grid_cell_snaps():
    d = make_design()
    add_cell(d, "a", 333, 97)
    d.freeze()
    r = legalize(d)
    assert r.locations["a"] == Point(400, 0)
    apply_placement(d, r)
    assert check_legality(d) == []


def test_fixed_instances_are_obstacles():
    d = make_design()
    add_cell(d, "blk", 800, 0, w=1200, status="fixed")
    add_cell(d, "a", 1000, 0)
    d.freeze()
    r = legalize(d)
    assert r.locations["blk"] == Point(800, 0)
    a = r.locations["a"]
    assert not (a.y == 0 and 800 - 400 < a.x < 2000)
    apply_placement(d, r)
    assert check_legality(d) == []


def test_unplaced_movable_raises():
    d = make_design()
    add_cell(d, "a", None, None, status="unplaced")
    d.freeze()
    with pytest.raises(Unplaced):
        legalize(d)


def test_cannot_legalize_when_row_is_too_small():
    d = make_design(die=(0, 0, 800, ROW_H), rows=1)
    add_cell(d, "a", 0, 0, w=600)
    add_cell(d, "b", 0, 0, w=600)
    d.freeze()
    with pytest.raises(CannotLegalize):
        legalize(d)


def test_double_height_cell_lands_on_even_row():
    d = make_design()
    # target y sits on row 1; the cell must move to an even row index
    add_cell(d, "dh", 4000, ROW_H, w=1200, h=2 * ROW_H)
    add_cell(d, "a", 4000, ROW_H)
    d.freeze()
    r = legalize(d)
    y = r.locations["dh"].y
    row_ys = sorted(row.origin.y for row in d.rows)
    assert y in row_ys
    assert row_ys.index(y) % 2 == 0
    apply_placement(d, r)
    assert check_legality(d) == []


def single_row_dp_oracle(targets, width_sites, num_sites):
    """Min total |x - target| over order-preserving site assignments."""
    order = sorted(range(len(targets)), key=lambda i: (targets[i], i))
    ts = [targets[i] for i in order]
    n = len(ts)
    INF = float("inf")
    # f[i][s]: cells 0..i-1 placed, cell i-1 ends at site < s
    prev = [0.0] * (num_sites + 1)
    for i in range(n):
        cur = [INF] * (num_sites + 1)
        best = INF
        for s in range(num_sites + 1):
            if s >= width_sites * (i + 1):
                start = s - width_sites
                cand = prev[start] + abs(start * SITE_W - ts[i])
                best = min(best, cand)
            cur[s] = best
        prev = cur
    return prev[num_sites]


def test_displacement_matches_dp_oracle_on_single_rows():
    rng = random.Random(41)
    for _ in range(20):
        n_sites = 120
        d = make_design(die=(0, 0, n_sites * SITE_W, ROW_H), rows=1)
        targets = []
        for i in range(20):
            x = rng.randrange(0, n_sites * SITE_W - 400)
            targets.append(x)
            add_cell(d, f"c{i:02d}", x, 0)
        d.freeze()
        r = legalize(d)
        disp = sum(abs(r.locations[f"c{i:02d}"].x - targets[i])
                   for i in range(20))
        assert disp <= single_row_dp_oracle(targets, 2, n_sites)
        apply_placement(d, r)
        assert check_legality(d) == []


def test_random_designs_legalize_clean():
    rng = random.Random(97)
    for trial in range(40):
        die_w = rng.choice([20000, 30000, 40000])
        n_rows = rng.choice([6, 8, 10])
        d = make_design(die=(0, 0, die_w, n_rows * ROW_H), rows=n_rows)
        n = rng.randint(5, 40)
        fixed_rects = []
        for i in range(n):
            if rng.random() < 0.2:
                w, h = 1200, 2 * ROW_H
            else:
                w, h = rng.choice([400, 800, 1200]), ROW_H
            x = rng.randrange(0, die_w - w)
            y = rng.randrange(0, n_rows * ROW_H - h)
            status = "fixed" if rng.random() < 0.1 else "placed"
            if status == "fixed":
                # fixed cells must already be legal and mutually disjoint
                x = (x // SITE_W) * SITE_W
                row = min(y // ROW_H, n_rows - h // ROW_H)
                if h > ROW_H:
                    row -= row % 2
                y = row * ROW_H
                box = (x, y, x + w, y + h)
                if any(b[0] < box[2] and box[0] < b[2]
                       and b[1] < box[3] and box[1] < b[3] for b in fixed_rects):
                    status = "placed"
                else:
                    fixed_rects.append(box)
            add_cell(d, f"c{i:03d}", x, y, w=w, h=h, status=status)
        d.freeze()
        r = legalize(d)
        apply_placement(d, r)
        assert check_legality(d) == [], f"trial {trial}"


def test_same_input_same_output():
    rng = random.Random(7)
    d = make_design()
    for i in range(25):
        add_cell(d, f"c{i}", rng.randrange(0, 39000), rng.randrange(0, 21000))
    d.freeze()
    a = legalize(d)
    b = legalize(d)
    assert a.locations == b.locations
