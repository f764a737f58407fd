"""Routing preference metrics and congestion matrices."""

import random

import numpy as np
import pytest

from rdflow.check import congestion_map, route_metrics
from rdflow.errors import SegmentOffGrid
from rdflow.geom import Point, Rect
from rdflow.io.guides import RouteGuideSet
from rdflow.io.ispd08 import GlobalRouteSolution, GRRoute
from rdflow.model import (
    Design, GCellGrid, Layer, Net, RouteShape, SpacingTable, Technology,
    ViaMaster,
)

W = 200


def make_design():
    d = Design("t", 2000)
    d.die_area = Rect.of(0, 0, 20000, 20000)
    d.technology = Technology(dbu_per_micron=2000, layers=[
        Layer("M1", "routing", 1, direction="horizontal", pitch=400, width=W,
              spacing_prl=SpacingTable.uniform(200)),
        Layer("V12", "cut", 2, cut_spacing=250),
        Layer("M2", "routing", 3, direction="vertical", pitch=400, width=W,
              spacing_prl=SpacingTable.uniform(200)),
    ], vias={"via1": ViaMaster("via1", "M1", "V12", "M2", shapes={
        "M1": [Rect.of(-150, -150, 150, 150)],
        "V12": [Rect.of(-100, -100, 100, 100)],
        "M2": [Rect.of(-150, -150, 150, 150)],
    })})
    return d


def wire(layer, x1, y1, x2, y2):
    return RouteShape("wire", layer, Point(x1, y1), Point(x2, y2), width=W)


def via(x, y):
    return RouteShape("via", "V12", Point(x, y), Point(x, y), via_name="via1")


# derived tracks: y = 200 + k*400 on M1, x = 200 + k*400 on M2


def test_clean_routing_scores_perfectly():
    d = make_design()
    guides = RouteGuideSet({"n": [(Rect.of(0, 0, 4000, 4000), "M1")]})
    d.add_net(Net("n", routing=[wire("M1", 200, 600, 3000, 600)]))
    d.freeze()
    m = route_metrics(d, guides)
    assert m.wrong_way_length == 0
    assert m.off_track_length == 0
    assert m.guide_coverage == 1.0
    assert m.total_wirelength == 2800
    assert m.via_count == 0


def test_vertical_on_horizontal_layer_is_wrong_way():
    d = make_design()
    d.add_net(Net("n", routing=[wire("M1", 600, 200, 600, 3400)]))
    d.freeze()
    m = route_metrics(d)
    assert m.wrong_way_length == 3200
    assert m.total_wirelength == 3200


def test_off_track_centerline():
    d = make_design()
    d.add_net(Net("n", routing=[wire("M1", 0, 300, 2000, 300)]))
    d.freeze()
    assert route_metrics(d).off_track_length == 2000


def test_def_tracks_override_derived_ones():
    d = make_design()
    d.tracks.append(("Y", 300, 50, 400, "M1"))
    d.add_net(Net("n", routing=[wire("M1", 0, 300, 2000, 300)]))
    d.freeze()
    assert route_metrics(d).off_track_length == 0


def test_via_count_and_empty_wirelength():
    d = make_design()
    d.add_net(Net("n", routing=[via(600, 600), via(1000, 600)]))
    d.freeze()
    m = route_metrics(d)
    assert m.via_count == 2
    assert m.total_wirelength == 0
    assert m.guide_coverage == 1.0


def test_partial_guide_coverage():
    d = make_design()
    guides = RouteGuideSet({"n": [(Rect.of(0, 0, 1000, 4000), "M1")]})
    d.add_net(Net("n", routing=[wire("M1", 0, 600, 2000, 600)]))
    d.freeze()
    assert route_metrics(d, guides).guide_coverage == 0.5


def test_guide_on_wrong_layer_does_not_cover():
    d = make_design()
    guides = RouteGuideSet({"n": [(Rect.of(0, 0, 4000, 4000), "M2")]})
    d.add_net(Net("n", routing=[wire("M1", 0, 600, 2000, 600)]))
    d.freeze()
    assert route_metrics(d, guides).guide_coverage == 0.0


def test_net_guide_attribute_is_fallback():
    d = make_design()
    net = Net("n", routing=[wire("M1", 0, 600, 2000, 600)])
    net.guide = [(Rect.of(0, 0, 4000, 4000), "M1")]
    d.add_net(net)
    d.freeze()
    assert route_metrics(d).guide_coverage == 1.0


def coverage_oracle(wires, guides_by_layer):
    """Unit-step walk: count steps whose midpoint is inside the guide union."""
    covered = 0
    total = 0
    for layer, x1, y1, x2, y2 in wires:
        rects = guides_by_layer.get(layer, [])
        n = abs(x2 - x1) + abs(y2 - y1)
        total += n
        for k in range(n):
            t = (k + 0.5) / n
            mx = x1 + (x2 - x1) * t
            my = y1 + (y2 - y1) * t
            if any(r.lo.x <= mx <= r.hi.x and r.lo.y <= my <= r.hi.y
                   for r in rects):
                covered += 1
    return covered, total


def test_coverage_matches_unit_step_oracle():
    rng = random.Random(41)
    for _ in range(20):
        d = make_design()
        guides = RouteGuideSet({"n": []})
        wires = []
        for _ in range(rng.randrange(1, 8)):
            layer = rng.choice(("M1", "M2"))
            gx = rng.randrange(0, 16) * 1000
            gy = rng.randrange(0, 16) * 1000
            guides.per_net["n"].append(
                (Rect.of(gx, gy, gx + rng.randrange(1, 5) * 1000,
                         gy + rng.randrange(1, 5) * 1000), layer))
        routing = []
        for _ in range(rng.randrange(1, 20)):
            layer = rng.choice(("M1", "M2"))
            x = rng.randrange(0, 1600) * 10
            y = rng.randrange(0, 1600) * 10
            length = rng.randrange(1, 80) * 10
            if rng.random() < 0.5:
                routing.append(wire(layer, x, y, x + length, y))
                wires.append((layer, x, y, x + length, y))
            else:
                routing.append(wire(layer, x, y, x, y + length))
                wires.append((layer, x, y, x, y + length))
        d.add_net(Net("n", routing=routing))
        d.freeze()
        m = route_metrics(d, guides)
        by_layer = {}
        for r, lname in guides.per_net["n"]:
            by_layer.setdefault(lname, []).append(r)
        covered, total = coverage_oracle(wires, by_layer)
        assert m.total_wirelength == total
        assert m.guide_coverage == pytest.approx(covered / total)


def test_wrong_way_partitions_wirelength():
    rng = random.Random(43)
    for _ in range(50):
        d = make_design()
        routing = []
        preferred = 0
        for _ in range(rng.randrange(1, 15)):
            layer = rng.choice(("M1", "M2"))
            x = rng.randrange(0, 1000) * 10
            y = rng.randrange(0, 1000) * 10
            length = rng.randrange(0, 200) * 10
            horizontal = rng.random() < 0.5
            if horizontal:
                routing.append(wire(layer, x, y, x + length, y))
            else:
                routing.append(wire(layer, x, y, x, y + length))
            if length and horizontal == (layer == "M1"):
                preferred += length
        d.add_net(Net("n", routing=routing))
        d.freeze()
        m = route_metrics(d)
        assert m.wrong_way_length + preferred == m.total_wirelength


# ---------------------------------------------------------------- congestion


def make_grid():
    return GCellGrid(
        x_origin=0, y_origin=0, x_count=8, y_count=8, x_step=100, y_step=100,
        horizontal_capacity=[10, 0], vertical_capacity=[0, 10])


def seg(grid, g1, g2, l1, l2):
    (x1, y1), (x2, y2) = grid.center_of(*g1), grid.center_of(*g2)
    return ((x1, y1, l1), (x2, y2, l2))


def test_empty_solution_is_all_zero():
    cm = congestion_map(GlobalRouteSolution(), make_grid())
    assert cm.total_usage() == 0
    assert cm.total_overflow() == 0
    assert cm.horizontal_usage[0].shape == (7, 8)
    assert cm.vertical_usage[0].shape == (8, 7)


def test_single_net_crossing_three_edges():
    grid = make_grid()
    sol = GlobalRouteSolution({"n": GRRoute("n", 0, [
        seg(grid, (0, 2), (3, 2), 1, 1)])})
    cm = congestion_map(sol, grid)
    assert cm.total_usage() == 3
    for gx in range(3):
        assert cm.horizontal_usage[0][gx, 2] == 1
    assert cm.total_overflow() == 0


def test_net_counted_once_per_edge():
    grid = make_grid()
    sol = GlobalRouteSolution({"n": GRRoute("n", 0, [
        seg(grid, (0, 2), (3, 2), 1, 1),
        seg(grid, (3, 2), (0, 2), 1, 1)])})
    assert congestion_map(sol, grid).total_usage() == 3


def test_via_segment_uses_no_edges():
    grid = make_grid()
    sol = GlobalRouteSolution({"n": GRRoute("n", 0, [
        seg(grid, (2, 2), (2, 2), 1, 2)])})
    assert congestion_map(sol, grid).total_usage() == 0


def test_overflow_against_adjusted_capacity():
    grid = make_grid()
    key = GCellGrid.edge_key(1, 2, 1, 2, 2, 1)
    grid.adjustments[key] = 0
    sol = GlobalRouteSolution({"n": GRRoute("n", 0, [
        seg(grid, (0, 2), (3, 2), 1, 1)])})
    cm = congestion_map(sol, grid)
    assert cm.horizontal_capacity[0][1, 2] == 0
    assert cm.total_overflow() == 1
    assert cm.overflowed_edges() == 1


def test_off_grid_segment_raises():
    grid = make_grid()
    sol = GlobalRouteSolution({"n": GRRoute("n", 0, [
        ((-50, 250, 1), (250, 250, 1))])})
    with pytest.raises(SegmentOffGrid):
        congestion_map(sol, grid)


def test_bad_layer_raises():
    grid = make_grid()
    sol = GlobalRouteSolution({"n": GRRoute("n", 0, [
        seg(grid, (0, 0), (1, 0), 3, 3)])})
    with pytest.raises(SegmentOffGrid):
        congestion_map(sol, grid)


def crossings_oracle(route, grid):
    """Edge set per route by boundary enumeration in DBU coordinates."""
    edges = set()
    for (x1, y1, l1), (x2, y2, l2) in route.segments:
        if l1 != l2:
            continue
        if y1 == y2:
            lo, hi = sorted((x1, x2))
            b = grid.x_origin
            while b <= hi:
                if lo < b:
                    gx = (b - grid.x_origin) // grid.x_step
                    edges.add(("h", l1, gx - 1, (y1 - grid.y_origin) // grid.y_step))
                b += grid.x_step
        else:
            lo, hi = sorted((y1, y2))
            b = grid.y_origin
            while b <= hi:
                if lo < b:
                    gy = (b - grid.y_origin) // grid.y_step
                    edges.add(("v", l1, (x1 - grid.x_origin) // grid.x_step, gy - 1))
                b += grid.y_step
    return edges


def random_solution(rng, grid):
    sol = GlobalRouteSolution()
    for i in range(rng.randrange(1, 12)):
        segs = []
        gx, gy = rng.randrange(8), rng.randrange(8)
        for _ in range(rng.randrange(1, 5)):
            layer = rng.randrange(1, 3)
            if rng.random() < 0.5:
                nx = rng.randrange(8)
                segs.append(seg(grid, (gx, gy), (nx, gy), layer, layer))
                gx = nx
            else:
                ny = rng.randrange(8)
                segs.append(seg(grid, (gx, gy), (gx, ny), layer, layer))
                gy = ny
        sol.nets[f"n{i}"] = GRRoute(f"n{i}", i, segs)
    return sol


def test_usage_conserves_per_net_crossings():
    rng = random.Random(59)
    grid = make_grid()
    for _ in range(100):
        sol = random_solution(rng, grid)
        cm = congestion_map(sol, grid)
        expect = sum(len(crossings_oracle(r, grid)) for r in sol.nets.values())
        assert cm.total_usage() == expect
        # per-edge equality, not just the totals
        counts = {}
        for r in sol.nets.values():
            for e in crossings_oracle(r, grid):
                counts[e] = counts.get(e, 0) + 1
        for (kind, layer, gx, gy), n in counts.items():
            mat = cm.horizontal_usage if kind == "h" else cm.vertical_usage
            assert mat[layer - 1][gx, gy] == n


def test_removing_a_net_never_increases_usage():
    rng = random.Random(61)
    grid = make_grid()
    for _ in range(30):
        sol = random_solution(rng, grid)
        cm = congestion_map(sol, grid)
        victim = rng.choice(sorted(sol.nets))
        smaller = GlobalRouteSolution(
            {k: v for k, v in sol.nets.items() if k != victim})
        cm2 = congestion_map(smaller, grid)
        for a, b in zip(cm2.horizontal_usage, cm.horizontal_usage):
            assert np.all(a <= b)
        for a, b in zip(cm2.vertical_usage, cm.vertical_usage):
            assert np.all(a <= b)
