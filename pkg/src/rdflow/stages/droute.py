"""Track-level detailed routing under route guides.

The routing graph is the per-layer track lattice: a node is a crossing
(x, y, layer) of the layer's x and y track lines, so every wire is
on-track by construction. A layer missing one axis borrows it from the
nearest layer that defines it. Nets route one by one in name order; each
pin connects to the net's grown tree by multi-source Dijkstra restricted
to the net's guide rects plus a one-gcell halo plus its pin regions,
retried without the restriction when that fails. A step along the
preferred direction costs its length, a wrong-way step four times that,
a via a fixed hop. Nodes inside other nets' committed routes or pin
shapes are soft-blocked by a huge penalty, never hard-blocked, so a
connection always completes when the lattice allows one.

A pin is reachable on its shape's own layer or one layer above or below;
reaching it off-layer adds the bridging via. Shorts that remain trigger
rip-up-and-reroute of the offending nets for a bounded number of rounds,
and the best state seen is kept.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left, bisect_right

from ..check.drc import check_shorts
from ..errors import DesignError, NoAccessPoint
from ..geom import Point, Rect
from ..io.guides import RouteGuideSet
from ..model import (Design, RouteShape, derive_gcell_grid, derive_tracks,
                     instance_pin_shapes)

WRONG_WAY = 4.0
FOREIGN = 1e9


class _Lattice:
    """Track coordinates per routing layer, 1-based by ordinal."""

    def __init__(self, design: Design, tracks):
        tech = design.technology
        if tech is None or not tech.routing_layers:
            raise DesignError("detailed routing requires routing layers")
        self.tech = tech
        self.num = len(tech.routing_layers)
        self.pref = [""] + [l.direction for l in tech.routing_layers]
        self.width = [0] + [l.width for l in tech.routing_layers]
        self.names = [""] + [l.name for l in tech.routing_layers]
        xs: list[list[int] | None] = [None] * (self.num + 1)
        ys: list[list[int] | None] = [None] * (self.num + 1)
        for o, layer in enumerate(tech.routing_layers, start=1):
            t = tracks.get(layer.name, {})
            if "X" in t:
                s, c, st = t["X"]
                xs[o] = [s + i * st for i in range(c)]
            if "Y" in t:
                s, c, st = t["Y"]
                ys[o] = [s + i * st for i in range(c)]
        self.xs = [_borrowed(xs, o) for o in range(self.num + 1)]
        self.ys = [_borrowed(ys, o) for o in range(self.num + 1)]
        die = design.die_area
        pitch = max((l.pitch for l in tech.routing_layers if l.pitch > 0),
                    default=1)
        for o in range(1, self.num + 1):
            if self.xs[o] is None:
                self.xs[o] = list(range(die.lo.x + pitch // 2, die.hi.x, pitch))
            if self.ys[o] is None:
                self.ys[o] = list(range(die.lo.y + pitch // 2, die.hi.y, pitch))
            if not self.xs[o] or not self.ys[o]:
                raise DesignError(f"layer {self.names[o]} has an empty track set")
        self.xset = [set(v) if v else set() for v in self.xs]
        self.yset = [set(v) if v else set() for v in self.ys]

    def neighbors(self, node):
        """(next node, move cost) pairs, in a fixed order."""
        x, y, l = node
        out = []
        xs, ys = self.xs[l], self.ys[l]
        horiz = self.pref[l] == "horizontal"
        i = bisect_left(xs, x)
        if i > 0:
            out.append(((xs[i - 1], y, l),
                        (x - xs[i - 1]) * (1.0 if horiz else WRONG_WAY)))
        if i + 1 < len(xs):
            out.append(((xs[i + 1], y, l),
                        (xs[i + 1] - x) * (1.0 if horiz else WRONG_WAY)))
        j = bisect_left(ys, y)
        if j > 0:
            out.append(((x, ys[j - 1], l),
                        (y - ys[j - 1]) * (WRONG_WAY if horiz else 1.0)))
        if j + 1 < len(ys):
            out.append(((x, ys[j + 1], l),
                        (ys[j + 1] - y) * (WRONG_WAY if horiz else 1.0)))
        via = 2.0 * max(xs[1] - xs[0] if len(xs) > 1 else 1,
                        ys[1] - ys[0] if len(ys) > 1 else 1)
        for nl in (l - 1, l + 1):
            if 1 <= nl <= self.num and x in self.xset[nl] and y in self.yset[nl]:
                out.append(((x, y, nl), via))
        return out

    def nodes_in(self, rect: Rect, l: int):
        xs, ys = self.xs[l], self.ys[l]
        xi0 = bisect_left(xs, rect.lo.x)
        xi1 = bisect_right(xs, rect.hi.x)
        yi0 = bisect_left(ys, rect.lo.y)
        yi1 = bisect_right(ys, rect.hi.y)
        for xi in range(xi0, xi1):
            for yi in range(yi0, yi1):
                yield (xs[xi], ys[yi], l)


def _borrowed(arrays, o):
    if o == 0:
        return None
    if arrays[o] is not None:
        return list(arrays[o])
    for d in range(1, len(arrays)):
        for cand in (o - d, o + d):
            if 1 <= cand < len(arrays) and arrays[cand] is not None:
                return list(arrays[cand])
    return None


def _pin_rects(design: Design, net) -> list[tuple[str, list[tuple[int, Rect]]]]:
    """Per pin: key plus its shapes as (routing ordinal, rect)."""
    tech = design.technology
    out = []
    for npin in net.pins:
        rects = []
        if npin.instance is None:
            port = design.ports.get(npin.pin)
            if port is not None and port.location is not None \
                    and port.layer is not None and tech.has_layer(port.layer) \
                    and tech.layer(port.layer).is_routing:
                o = tech.routing_ordinal(port.layer)
                shape = port.shape or Rect.of(0, 0, 0, 0)
                rects.append((o, shape.translated(port.location.x,
                                                  port.location.y)))
        else:
            inst = design.instances[npin.instance]
            for lname, r in instance_pin_shapes(inst, npin.pin):
                if tech.has_layer(lname) and tech.layer(lname).is_routing:
                    rects.append((tech.routing_ordinal(lname), r))
        out.append((npin.key(), rects))
    return out


def _access(lat: _Lattice, rects: list[tuple[int, Rect]]) -> dict[tuple, int]:
    """Access node -> pin ordinal. Own-layer nodes win over via access."""
    out: dict[tuple, int] = {}
    for o, rect in rects:
        for node in lat.nodes_in(rect, o):
            out[node] = o
    for o, rect in rects:
        for nl in (o - 1, o + 1):
            if 1 <= nl <= lat.num:
                for node in lat.nodes_in(rect, nl):
                    out.setdefault(node, o)
    return out


def _connect(lat, sources, targets, admitted, occ, net_name):
    """Multi-source Dijkstra; returns the node path or None."""
    dist = dict.fromkeys(sources, 0.0)
    prev: dict[tuple, tuple | None] = dict.fromkeys(sources, None)
    heap = [(0.0, s) for s in sorted(sources)]
    heapq.heapify(heap)
    seen = set()
    goal = None
    while heap:
        d, node = heapq.heappop(heap)
        if node in seen:
            continue
        seen.add(node)
        if node in targets:
            goal = node
            break
        for nxt, cost in lat.neighbors(node):
            if admitted is not None and nxt not in admitted:
                continue
            owner = occ.get(nxt)
            if owner is not None and owner != net_name:
                cost += FOREIGN
            nd = d + cost
            if nd < dist.get(nxt, float("inf")):
                dist[nxt] = nd
                prev[nxt] = node
                heapq.heappush(heap, (nd, nxt))
    if goal is None:
        return None
    path = [goal]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def _admission(lat: _Lattice, design, guides, net_name, pin_rects, halo):
    tech = design.technology
    nodes = set()
    rects_by_layer: dict[int, list[Rect]] = {}
    for rect, lname in guides.per_net.get(net_name, []):
        if not (tech.has_layer(lname) and tech.layer(lname).is_routing):
            continue
        o = tech.routing_ordinal(lname)
        grown = Rect.of(rect.lo.x - halo[0], rect.lo.y - halo[1],
                        rect.hi.x + halo[0], rect.hi.y + halo[1])
        rects_by_layer.setdefault(o, []).append(grown)
    for _, rects in pin_rects:
        for o, r in rects:
            for nl in (o - 1, o, o + 1):
                if 1 <= nl <= lat.num:
                    rects_by_layer.setdefault(nl, []).append(r)
    for o, rects in rects_by_layer.items():
        for r in rects:
            nodes.update(lat.nodes_in(r, o))
    return nodes


def _emit_shapes(lat: _Lattice, paths, access_vias):
    """Merge path edges into wires and vias, deduplicated per net."""
    tech = lat.tech
    hedges: dict[tuple[int, int], set[int]] = {}  # (layer, y) -> lower x index
    vedges: dict[tuple[int, int], set[int]] = {}
    via_pts: set[tuple[int, int, int]] = set(access_vias)  # (x, y, lower ord)
    for path in paths:
        for a, b in zip(path, path[1:]):
            if a[2] != b[2]:
                via_pts.add((a[0], a[1], min(a[2], b[2])))
            elif a[1] == b[1]:
                xs = lat.xs[a[2]]
                i0 = bisect_left(xs, min(a[0], b[0]))
                i1 = bisect_left(xs, max(a[0], b[0]))
                hedges.setdefault((a[2], a[1]), set()).update(range(i0, i1))
            else:
                ys = lat.ys[a[2]]
                j0 = bisect_left(ys, min(a[1], b[1]))
                j1 = bisect_left(ys, max(a[1], b[1]))
                vedges.setdefault((a[2], a[0]), set()).update(range(j0, j1))

    shapes: list[RouteShape] = []
    for (l, y), idxs in sorted(hedges.items()):
        xs = lat.xs[l]
        for i0, i1 in _runs(idxs):
            shapes.append(RouteShape(
                kind="wire", layer=lat.names[l], width=lat.width[l],
                start=Point(xs[i0], y), end=Point(xs[i1 + 1], y)))
    for (l, x), idxs in sorted(vedges.items()):
        ys = lat.ys[l]
        for j0, j1 in _runs(idxs):
            shapes.append(RouteShape(
                kind="wire", layer=lat.names[l], width=lat.width[l],
                start=Point(x, ys[j0]), end=Point(x, ys[j1 + 1])))
    for x, y, lo in sorted(via_pts):
        via = tech.via_between(lo)
        if via is None:
            raise DesignError(
                f"no via master between {lat.names[lo]} and {lat.names[lo + 1]}")
        cut = tech.cut_between(lo)
        shapes.append(RouteShape(
            kind="via", layer=cut.name if cut is not None else lat.names[lo],
            start=Point(x, y), end=Point(x, y), via_name=via.name))
    return shapes


def _runs(idxs: set[int]):
    vals = sorted(idxs)
    out = []
    i = 0
    while i < len(vals):
        j = i
        while j + 1 < len(vals) and vals[j + 1] == vals[j] + 1:
            j += 1
        out.append((vals[i], vals[j]))
        i = j + 1
    return out


def _route_net(design, lat, guides, net, occ, occ_by_net, halo) -> bool:
    """Route one net; commits shapes and occupancy only on full success."""
    pin_rects = _pin_rects(design, net)
    access = []
    for key, rects in pin_rects:
        a = _access(lat, rects) if rects else {}
        if not a:
            raise NoAccessPoint(net.name, key)
        access.append(a)

    admitted = _admission(lat, design, guides, net.name, pin_rects, halo)
    tree: set[tuple] = set(access[0])
    paths: list[list[tuple]] = []
    # node -> ordinal of the pin metal it lands on, when off that layer
    pending_vias: dict[tuple, int] = {}
    for i in range(1, len(access)):
        targets = set(access[i])
        hit = tree & targets
        if hit:
            end = min(hit)
        else:
            path = _connect(lat, tree, targets, admitted, occ, net.name)
            if path is None:
                path = _connect(lat, tree, targets, None, occ, net.name)
            if path is None:
                return False
            paths.append(path)
            tree.update(path)
            end = path[-1]
        o = access[i][end]
        if o != end[2]:
            pending_vias[end] = o

    used: set[tuple] = set()
    for path in paths:
        used.update(path)
    if paths:
        first = paths[0][0]
        o = access[0].get(first)
        if o is not None and o != first[2]:
            pending_vias[first] = o
        # later paths may grow from a different access node of pin 0
        for path in paths[1:]:
            o = access[0].get(path[0])
            if o is not None and o != path[0][2]:
                pending_vias[path[0]] = o

    access_vias = []
    for node, o in sorted(pending_vias.items()):
        lo, hi = sorted((o, node[2]))
        for l in range(lo, hi):
            access_vias.append((node[0], node[1], l))
            used.add((node[0], node[1], l))
            used.add((node[0], node[1], l + 1))

    net.routing = _emit_shapes(lat, paths, access_vias)
    occ_by_net[net.name] = used
    for n in used:
        occ[n] = net.name
    return True


def _mark_pins(design, lat, names, occ):
    for name in names:
        net = design.nets[name]
        for _, rects in _pin_rects(design, net):
            for o, r in rects:
                for node in lat.nodes_in(r, o):
                    occ.setdefault(node, name)


def route_detailed(design: Design, guides: RouteGuideSet,
                   tracks=None, rounds: int = 3) -> Design:
    """Route every multi-pin net; only fully connected nets keep shapes."""
    design.require_frozen()
    if tracks is None:
        tracks = derive_tracks(design)
    lat = _Lattice(design, tracks)
    grid = design.gcell_grid
    if grid is None:
        try:
            grid = derive_gcell_grid(design)
        except DesignError:
            grid = None
    if grid is not None:
        halo = (grid.x_step, grid.y_step)
    else:
        pitch = max(l.pitch for l in design.technology.routing_layers)
        halo = (3 * pitch, 3 * pitch)

    names = sorted(n for n, net in design.nets.items() if len(net.pins) >= 2)
    occ: dict[tuple, str] = {}
    occ_by_net: dict[str, set] = {}
    _mark_pins(design, lat, names, occ)

    routed: set[str] = set()
    for name in names:
        net = design.nets[name]
        net.routing = []
        if _route_net(design, lat, guides, net, occ, occ_by_net, halo):
            routed.add(name)

    best_count = None
    best_state = None
    for round_no in range(max(0, rounds) + 1):
        shorts = check_shorts(design)
        count = len(shorts)
        if best_count is None or count < best_count:
            best_count = count
            best_state = {n: list(design.nets[n].routing) for n in names}
        if count == 0 or round_no == rounds:
            break
        offenders = sorted({n for v in shorts for n in v.nets if n in routed})
        if not offenders:
            break
        for name in offenders:
            design.nets[name].routing = []
            for node in occ_by_net.pop(name, ()):
                if occ.get(node) == name:
                    del occ[node]
        _mark_pins(design, lat, names, occ)
        for name in offenders:
            if not _route_net(design, lat, guides, design.nets[name],
                              occ, occ_by_net, halo):
                routed.discard(name)
    if best_state is not None:
        for n, shapes in best_state.items():
            design.nets[n].routing = shapes
    return design
