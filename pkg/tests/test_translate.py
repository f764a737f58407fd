"""Guide-translator tests with a brute-force rasterizer oracle."""

import random

import pytest

from rdflow.errors import SegmentOffGrid, UnknownNet
from rdflow.geom import Point, Rect
from rdflow.io.guides import write_guides
from rdflow.io.ispd08 import GlobalRouteSolution, GRRoute
from rdflow.model import (
    CellMaster,
    Design,
    GCellGrid,
    Instance,
    MasterPin,
    Net,
    NetPin,
)
from rdflow.translate import (
    GCellSet,
    expand_guides,
    gcells_to_rects,
    segments_to_gcells,
    translate,
)


def make_grid(nx=8, ny=8, layers=3, step=40, origin=(0, 0)):
    return GCellGrid(
        x_origin=origin[0], y_origin=origin[1], x_count=nx, y_count=ny,
        x_step=step, y_step=step,
        vertical_capacity=[0, 8, 0][:layers] + [8] * max(0, layers - 3),
        horizontal_capacity=[8, 0, 8][:layers] + [0] * max(0, layers - 3),
    )


def solution(*nets):
    sol = GlobalRouteSolution()
    for i, (name, segs) in enumerate(nets):
        sol.nets[name] = GRRoute(name=name, id=i, segments=list(segs))
    return sol


def brute_rasterize(route, grid):
    """Unit-step walk over every segment."""
    cells = {}
    for (x1, y1, l1), (x2, y2, l2) in route.segments:
        if l1 != l2:
            gx, gy = grid.gcell_of(x1, y1)
            for l in range(min(l1, l2), max(l1, l2) + 1):
                cells.setdefault(l, set()).add((gx, gy))
        else:
            steps = max(abs(x2 - x1), abs(y2 - y1))
            sx = (x2 > x1) - (x2 < x1)
            sy = (y2 > y1) - (y2 < y1)
            for t in range(steps + 1):
                cells.setdefault(l1, set()).add(grid.gcell_of(x1 + sx * t, y1 + sy * t))
    return cells


def covered_cells(rects, grid):
    """Gcell set covered by DBU rects (rects are exact gcell unions)."""
    out = {}
    for rect, layer in rects:
        gx1 = (rect.lo.x - grid.x_origin) // grid.x_step
        gx2 = (rect.hi.x - grid.x_origin) // grid.x_step
        gy1 = (rect.lo.y - grid.y_origin) // grid.y_step
        gy2 = (rect.hi.y - grid.y_origin) // grid.y_step
        for gx in range(gx1, gx2):
            for gy in range(gy1, gy2):
                out.setdefault(layer, set()).add((gx, gy))
    return out


def test_horizontal_segment_marks_four_gcells():
    grid = make_grid()
    # centers of gcells (0,0) and (3,0)
    sol = solution(("n", [((20, 20, 2), (140, 20, 2))]))
    cells = segments_to_gcells(sol, grid)["n"]
    assert cells.per_layer == {2: {(0, 0), (1, 0), (2, 0), (3, 0)}}


def test_via_marks_all_layers_between():
    grid = make_grid(step=1)
    sol = solution(("n", [((1, 1, 1), (1, 1, 3))]))
    cells = segments_to_gcells(sol, grid)["n"]
    assert cells.per_layer == {1: {(1, 1)}, 2: {(1, 1)}, 3: {(1, 1)}}


def test_off_grid_segment():
    grid = make_grid()
    with pytest.raises(SegmentOffGrid):
        segments_to_gcells(solution(("n", [((20, 20, 1), (9999, 20, 1))])), grid)
    with pytest.raises(SegmentOffGrid):
        segments_to_gcells(solution(("n", [((20, 20, 9), (20, 60, 9))])), grid)


def random_solution(rng, grid, n_nets=3, segs=8):
    nets = []
    for i in range(rng.randint(1, n_nets)):
        gx = rng.randrange(grid.x_count)
        gy = rng.randrange(grid.y_count)
        l = rng.randint(1, grid.num_layers)
        segments = []
        for _ in range(rng.randint(1, segs)):
            cx, cy = grid.center_of(gx, gy)
            kind = rng.randrange(3)
            if kind == 0:
                ngx = rng.randrange(grid.x_count)
                nx, _ = grid.center_of(ngx, gy)
                if ngx != gx:
                    segments.append(((cx, cy, l), (nx, cy, l)))
                    gx = ngx
            elif kind == 1:
                ngy = rng.randrange(grid.y_count)
                _, ny = grid.center_of(gx, ngy)
                if ngy != gy:
                    segments.append(((cx, cy, l), (cx, ny, l)))
                    gy = ngy
            else:
                nl = rng.randint(1, grid.num_layers)
                if nl != l:
                    segments.append(((cx, cy, l), (cx, cy, nl)))
                    l = nl
        if segments:
            nets.append((f"net{i}", segments))
    return solution(*nets)


def test_rasterizer_matches_brute_force():
    rng = random.Random(303)
    for _ in range(200):
        grid = make_grid(nx=rng.randint(2, 12), ny=rng.randint(2, 12),
                         layers=rng.randint(1, 4), step=rng.choice([7, 40, 100]))
        sol = random_solution(rng, grid)
        cells = segments_to_gcells(sol, grid)
        for name, route in sol.nets.items():
            assert cells[name].per_layer == brute_rasterize(route, grid)


def test_straight_run_is_one_rect():
    grid = make_grid(step=4000)
    cells = GCellSet({1: {(0, 0), (1, 0), (2, 0), (3, 0)}})
    rects = gcells_to_rects(cells, grid)
    assert rects == [(Rect.of(0, 0, 16000, 4000), 1)]


def test_l_shape_two_rects_exact_cover():
    grid = make_grid()
    cells = GCellSet({2: {(0, 0), (1, 0), (1, 1), (1, 2)}})
    rects = gcells_to_rects(cells, grid)
    assert len(rects) == 2
    assert covered_cells(rects, grid) == {2: cells.per_layer[2]}


def test_single_gcell_rect_arithmetic():
    grid = make_grid(step=4000)
    rects = gcells_to_rects(GCellSet({1: {(3, 2)}}), grid)
    assert rects == [(Rect.of(12000, 8000, 16000, 12000), 1)]


def test_cover_exactness_random():
    rng = random.Random(307)
    for _ in range(300):
        grid = make_grid(nx=rng.randint(1, 10), ny=rng.randint(1, 10))
        cells = GCellSet()
        for _ in range(rng.randint(1, 30)):
            cells.add(rng.randint(1, 3), rng.randrange(grid.x_count),
                      rng.randrange(grid.y_count))
        rects = gcells_to_rects(cells, grid)
        want = {l: set(s) for l, s in cells.per_layer.items() if s}
        assert covered_cells(rects, grid) == want
        # no two rects of the same layer overlap (exact cover, no double cover)
        per_layer_area = {}
        for r, l in rects:
            per_layer_area[l] = per_layer_area.get(l, 0) + r.area
        for l, s in want.items():
            assert per_layer_area[l] == len(s) * grid.x_step * grid.y_step


def test_run_coalescing_bound_single_path():
    # a single snaking path occupies each row in one run, so the cover has
    # at most one rect per occupied row
    grid = make_grid(nx=10, ny=10)
    path = [(x, 0) for x in range(5)] + [(4, y) for y in range(1, 4)]
    cells = GCellSet({1: set(path)})
    rects = gcells_to_rects(cells, grid)
    occupied_rows = len({gy for _, gy in path})
    assert len(rects) <= occupied_rows


def make_design(grid):
    d = Design("t", dbu_per_micron=1000)
    d.die_area = Rect.of(grid.x_origin, grid.y_origin,
                         grid.x_origin + grid.x_count * grid.x_step,
                         grid.y_origin + grid.y_count * grid.y_step)
    m = CellMaster("INV", width=20, height=20)
    m.pins["A"] = MasterPin("A", "input", [("M1", Rect.of(8, 8, 12, 12))])
    m.pins["Y"] = MasterPin("Y", "output", [("M1", Rect.of(8, 8, 12, 12))])
    d.masters = {"INV": m}
    return d


def place_net(design, grid, name, gcells):
    net = Net(name)
    for i, (gx, gy) in enumerate(gcells):
        cx, cy = grid.center_of(gx, gy)
        inst = Instance(f"{name}_u{i}", "INV", master=design.masters["INV"],
                        location=Point(cx - 10, cy - 10), status="placed")
        design.add_instance(inst)
        net.pins.append(NetPin(inst.name, "Y" if i == 0 else "A"))
    design.add_net(net)
    return net


def test_translate_one_net():
    grid = make_grid()
    d = make_design(grid)
    place_net(d, grid, "n0", [(0, 0), (3, 0)])
    sol = solution(("n0", [((20, 20, 2), (140, 20, 2))]))
    guides = translate(sol, grid, d)
    assert list(guides.per_net) == ["n0"]
    assert guides.per_net["n0"] == [(Rect.of(0, 0, 160, 40), "M2")]


def test_translate_unknown_net():
    grid = make_grid()
    d = make_design(grid)
    sol = solution(("ghost", [((20, 20, 1), (60, 20, 1))]))
    with pytest.raises(UnknownNet, match="ghost"):
        translate(sol, grid, d)


def test_translate_fallback_bbox_guide():
    grid = make_grid()
    d = make_design(grid)
    place_net(d, grid, "unrouted", [(1, 1), (3, 2)])
    guides = translate(solution(), grid, d)
    want_bbox = Rect.of(40, 40, 160, 120)
    assert guides.per_net["unrouted"] == [(want_bbox, "M1"), (want_bbox, "M2")]


def test_translate_coverage_equals_rasterization():
    rng = random.Random(311)
    for _ in range(50):
        grid = make_grid(nx=rng.randint(2, 16), ny=rng.randint(2, 16),
                         layers=rng.randint(1, 6))
        d = make_design(grid)
        sol = random_solution(rng, grid, n_nets=4)
        for name in sol.nets:
            place_net(d, grid, name, [(0, 0), (grid.x_count - 1, grid.y_count - 1)])
        guides = translate(sol, grid, d)
        cells = segments_to_gcells(sol, grid)
        for name, route in sol.nets.items():
            got = covered_cells(
                [(r, int(l[1:])) for r, l in guides.per_net[name]], grid)
            assert got == cells[name].per_layer


def test_expand_identity_and_clipping():
    grid = make_grid(nx=4, ny=4)
    d = make_design(grid)
    place_net(d, grid, "n0", [(1, 1), (1, 1)])
    sol = solution(("n0", [((60, 60, 1), (60, 60, 3))]))
    g0 = translate(sol, grid, d, radius=0)
    assert g0.per_net["n0"][0][0] == Rect.of(40, 40, 80, 80)
    g1 = translate(sol, grid, d, radius=1)
    # interior gcell grows to 3x3
    assert g1.per_net["n0"][0][0] == Rect.of(0, 0, 120, 120)
    # corner gcell clipped to 2x2
    sol2 = solution(("n0", [((20, 20, 1), (20, 20, 3))]))
    g2 = translate(sol2, grid, d, radius=1)
    assert g2.per_net["n0"][0][0] == Rect.of(0, 0, 80, 80)


def test_expand_monotone():
    rng = random.Random(331)
    for _ in range(40):
        grid = make_grid(nx=rng.randint(2, 10), ny=rng.randint(2, 10))
        d = make_design(grid)
        sol = random_solution(rng, grid, n_nets=2)
        for name in sol.nets:
            place_net(d, grid, name, [(0, 0), (grid.x_count - 1, 0)])
        r1, r2 = sorted((rng.randint(0, 3), rng.randint(0, 3)))
        g1 = translate(sol, grid, d, radius=r1)
        g2 = translate(sol, grid, d, radius=r2)
        for name in g1.per_net:
            c1 = covered_cells([(r, int(l[1:])) for r, l in g1.per_net[name]], grid)
            c2 = covered_cells([(r, int(l[1:])) for r, l in g2.per_net[name]], grid)
            for layer, cells in c1.items():
                assert cells <= c2.get(layer, set())


def test_translate_deterministic_bytes():
    grid = make_grid()
    d1 = make_design(grid)
    d2 = make_design(grid)
    segs = [((20, 20, 1), (140, 20, 1)), ((140, 20, 1), (140, 20, 2))]
    for d in (d1, d2):
        place_net(d, grid, "n0", [(0, 0), (3, 0)])
        place_net(d, grid, "zz", [(0, 1), (2, 2)])
    t1 = write_guides(translate(solution(("n0", segs)), grid, d1, radius=1))
    t2 = write_guides(translate(solution(("n0", segs)), grid, d2, radius=1))
    assert t1 == t2
