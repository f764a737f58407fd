"""Global routing over the gcell grid.

Each net is decomposed into 2-pin connections by a minimum spanning tree
over its pin gcells (Manhattan distance, Prim). Every connection runs a
3D Dijkstra where a planar step costs 1 + penalty * max(0, usage+1-cap)
and a via step costs 1. Overflow is allowed, never fatal: zero-capacity
edges are merely expensive. Nets route in increasing gcell-HPWL order so
short nets claim their straight shots first.
"""

from __future__ import annotations

import heapq

from ..errors import DesignError, UnreachablePin
from ..model import Design, GCellGrid, derive_gcell_grid
from ..io.ispd08 import GlobalRouteSolution, GRNet, GRRoute

VIA_COST = 1.0


def _pin_ordinal(design: Design, npin) -> int:
    """1-based routing layer of a net pin, defaulting to the lowest."""
    tech = design.technology
    if tech is None:
        return 1
    layer_name = None
    if npin.instance is None:
        port = design.ports.get(npin.pin)
        if port is not None:
            layer_name = port.layer
    else:
        inst = design.instances.get(npin.instance)
        if inst is not None and inst.master is not None:
            mp = inst.master.pins.get(npin.pin)
            if mp is not None and mp.shapes:
                layer_name = mp.shapes[0][0]
    if layer_name is not None and tech.has_layer(layer_name):
        layer = tech.layer(layer_name)
        if layer.is_routing:
            return tech.routing_ordinal(layer_name)
    return 1


def gr_nets_from_design(design: Design, grid: GCellGrid) -> list[GRNet]:
    """Nets with >= 2 locatable pins, as benchmark-format net records."""
    design.require_frozen()
    out = []
    nid = 0
    num_layers = max(1, grid.num_layers)
    for name in sorted(design.nets):
        net = design.nets[name]
        pins = []
        for npin in net.pins:
            try:
                p = design.pin_position(npin)
            except Exception:
                continue
            layer = min(_pin_ordinal(design, npin), num_layers)
            pins.append((p.x, p.y, layer))
        if len(pins) < 2:
            continue
        out.append(GRNet(name=name, id=nid, pins=pins))
        nid += 1
    return out


def _terminals(grid: GCellGrid, net: GRNet) -> list[tuple[int, int, int]]:
    seen = {}
    for x, y, layer in net.pins:
        gx, gy = grid.gcell_of(x, y)
        if not grid.in_bounds(gx, gy):
            raise UnreachablePin(net.name, f"({x},{y},{layer})")
        seen.setdefault((gx, gy), layer)
    return [(gx, gy, l) for (gx, gy), l in sorted(seen.items())]


def _mst_edges(terms: list[tuple[int, int, int]]) -> list[tuple[int, int]]:
    """Prim, Manhattan distance on gcell coordinates. Returns index pairs."""
    n = len(terms)
    in_tree = [False] * n
    dist = [0] * n
    parent = [0] * n
    for i in range(1, n):
        dist[i] = abs(terms[i][0] - terms[0][0]) + abs(terms[i][1] - terms[0][1])
    in_tree[0] = True
    edges = []
    for _ in range(n - 1):
        best = min((dist[i], i) for i in range(n) if not in_tree[i])[1]
        in_tree[best] = True
        edges.append((parent[best], best))
        for i in range(n):
            if not in_tree[i]:
                d = abs(terms[i][0] - terms[best][0]) + abs(terms[i][1] - terms[best][1])
                if d < dist[i]:
                    dist[i] = d
                    parent[i] = best
    return edges


def _dijkstra(grid: GCellGrid, usage: dict, penalty: float,
              src: tuple[int, int, int],
              dst: tuple[int, int, int]) -> list[tuple[int, int, int]]:
    """Node path from src to dst over the 3D gcell graph."""
    L = max(1, grid.num_layers)
    dist = {src: 0.0}
    prev: dict[tuple, tuple] = {}
    heap = [(0.0, src)]
    seen = set()
    while heap:
        d, node = heapq.heappop(heap)
        if node in seen:
            continue
        seen.add(node)
        if node == dst:
            break
        gx, gy, l = node
        steps = []
        for nx, ny in ((gx - 1, gy), (gx + 1, gy), (gx, gy - 1), (gx, gy + 1)):
            if grid.in_bounds(nx, ny):
                cap = grid.edge_capacity(gx, gy, nx, ny, l)
                key = grid.edge_key(gx, gy, l, nx, ny, l)
                used = usage.get(key, 0)
                cost = 1.0 + penalty * max(0, used + 1 - cap)
                steps.append(((nx, ny, l), cost))
        if l > 1:
            steps.append(((gx, gy, l - 1), VIA_COST))
        if l < L:
            steps.append(((gx, gy, l + 1), VIA_COST))
        for nxt, cost in steps:
            nd = d + cost
            if nd < dist.get(nxt, float("inf")):
                dist[nxt] = nd
                prev[nxt] = node
                heapq.heappush(heap, (nd, nxt))
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def _path_edges(path: list[tuple[int, int, int]]) -> tuple[set, set]:
    planar = set()
    vias = set()
    for a, b in zip(path, path[1:]):
        if a[2] == b[2]:
            planar.add(GCellGrid.edge_key(*a, *b))
        else:
            lo, hi = sorted((a, b), key=lambda t: t[2])
            vias.add((lo[0], lo[1], lo[2], hi[2]))
    return planar, vias


def _segments(grid: GCellGrid, planar: set, vias: set):
    """Merge an edge set into maximal straight solution segments."""
    segs = []
    hor: dict[tuple[int, int], list[int]] = {}
    ver: dict[tuple[int, int], list[int]] = {}
    for (a, b) in sorted(planar):
        (x1, y1, l), (x2, y2, _) = a, b
        if y1 == y2:
            hor.setdefault((l, y1), []).append(min(x1, x2))
        else:
            ver.setdefault((l, x1), []).append(min(y1, y2))
    for (l, y), xs in sorted(hor.items()):
        for x0, x1 in _runs(xs):
            ax, ay = grid.center_of(x0, y)
            bx, by = grid.center_of(x1 + 1, y)
            segs.append(((ax, ay, l), (bx, by, l)))
    for (l, x), ys in sorted(ver.items()):
        for y0, y1 in _runs(ys):
            ax, ay = grid.center_of(x, y0)
            bx, by = grid.center_of(x, y1 + 1)
            segs.append(((ax, ay, l), (bx, by, l)))
    stacks: dict[tuple[int, int], list[int]] = {}
    for gx, gy, lo, hi in sorted(vias):
        stacks.setdefault((gx, gy), []).extend(range(lo, hi))
    for (gx, gy), lows in sorted(stacks.items()):
        x, y = grid.center_of(gx, gy)
        for l0, l1 in _runs(sorted(set(lows))):
            segs.append(((x, y, l0), (x, y, l1 + 1)))
    return segs


def _runs(values: list[int]) -> list[tuple[int, int]]:
    """Maximal runs of consecutive integers as (first, last) pairs."""
    out = []
    vals = sorted(set(values))
    i = 0
    while i < len(vals):
        j = i
        while j + 1 < len(vals) and vals[j + 1] == vals[j] + 1:
            j += 1
        out.append((vals[i], vals[j]))
        i = j + 1
    return out


def route_gr_nets(grid: GCellGrid, nets: list[GRNet],
                  penalty: float = 4.0) -> GlobalRouteSolution:
    """Route benchmark-format nets; the core the design wrapper defers to."""
    L = max(1, grid.num_layers)
    usage: dict[tuple, int] = {}
    order = []
    for net in nets:
        terms = _terminals(grid, net)
        xs = [t[0] for t in terms]
        ys = [t[1] for t in terms]
        hp = (max(xs) - min(xs)) + (max(ys) - min(ys))
        order.append((hp, net.name, net, terms))
    order.sort(key=lambda t: (t[0], t[1]))

    sol = GlobalRouteSolution()
    for _, _, net, terms in order:
        planar: set = set()
        vias: set = set()
        if len(terms) == 1:
            gx, gy, _ = terms[0]
            pin_layers = sorted({min(pl, L) for _, _, pl in net.pins})
            if len(pin_layers) > 1:
                vias.add((gx, gy, pin_layers[0], pin_layers[-1]))
            elif L > 1:
                l0 = min(pin_layers[0], L - 1)
                vias.add((gx, gy, l0, l0 + 1))
        else:
            for ia, ib in _mst_edges(terms):
                path = _dijkstra(grid, usage, penalty, terms[ia], terms[ib])
                p, v = _path_edges(path)
                planar |= p
                vias |= v
        for key in planar:
            usage[key] = usage.get(key, 0) + 1
        sol.nets[net.name] = GRRoute(name=net.name, id=net.id,
                                     segments=_segments(grid, planar, vias))
    return sol


def route_global(design: Design, grid: GCellGrid | None = None,
                 penalty: float = 4.0) -> GlobalRouteSolution:
    """Route every multi-pin net of a placed design over its gcell grid."""
    design.require_frozen()
    if grid is None:
        grid = design.gcell_grid or derive_gcell_grid(design)
    if grid is None:
        raise DesignError("global routing requires a gcell grid")
    return route_gr_nets(grid, gr_nets_from_design(design, grid))
