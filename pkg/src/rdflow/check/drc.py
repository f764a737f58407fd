"""Geometric design rules: shorts, spacing (PRL, EOL, cut), minimum area."""

from __future__ import annotations

import math

from ..errors import MissingRule
from ..geom import Rect, gap_between
from ..model import Design
from . import LayerShape, Violation, collect_layer_shapes, sorted_violations


def _sweep_pairs(shapes: list[LayerShape], window: int):
    """Pairs whose x gap is < window (0 means only overlapping/touching in x).

    Yields index pairs; callers re-check exact geometry.
    """
    order = sorted(range(len(shapes)), key=lambda i: shapes[i].rect.lo.x)
    active: list[int] = []
    for i in order:
        lo_x = shapes[i].rect.lo.x
        active = [j for j in active if shapes[j].rect.hi.x + window > lo_x]
        for j in active:
            yield (j, i) if j < i else (i, j)
        active.append(i)


def _different_nets(a: LayerShape, b: LayerShape) -> bool:
    if a.net is None and b.net is None:
        return False
    return a.net != b.net


def check_shorts(design: Design) -> list[Violation]:
    """Positive-area same-layer intersections between different nets, or
    between a net and an obstruction. Touching shapes are not shorts."""
    design.require_frozen()
    violations = []
    for layer, shapes in collect_layer_shapes(design).items():
        for i, j in _sweep_pairs(shapes, 0):
            a, b = shapes[i], shapes[j]
            if not _different_nets(a, b):
                continue
            inter = a.rect.intersection(b.rect)
            if inter is None or inter.area == 0:
                continue
            nets = tuple(sorted(s.net for s in (a, b) if s.net is not None))
            owners = tuple(sorted(
                s.owner for s in (a, b) if s.net is None and s.owner))
            violations.append(Violation(
                kind="short", location=inter, layer=layer,
                nets=nets, instances=owners))
    return sorted_violations(violations)


def _pair_distance(a: Rect, b: Rect) -> tuple[int, int]:
    """(edge distance, parallel run length) between two rects.

    Corner-to-corner pairs measure Euclidean distance (floored) with zero
    run length; overlapping rects measure distance 0.
    """
    gx, gy = gap_between(a, b)
    if gx > 0 and gy > 0:
        return math.isqrt(gx * gx + gy * gy), 0
    if gx > 0:
        return gx, -gy
    if gy > 0:
        return gy, -gx
    return 0, max(-gx, -gy, 0)


def check_spacing(design: Design) -> list[Violation]:
    """PRL table spacing and end-of-line spacing on routing layers, plus
    cut-to-cut spacing on cut layers.

    Only wire and via shapes are checked, and only between different nets.
    A routing layer with candidate pairs but an all-zero spacing table, or
    a cut layer with candidate pairs but no cut spacing value, raises
    MissingRule. Layers without an end-of-line rule simply skip that check.
    """
    design.require_frozen()
    tech = design.technology
    violations: set[Violation] = set()
    for layer_name, all_shapes in collect_layer_shapes(design).items():
        layer = tech.layer(layer_name)
        shapes = [s for s in all_shapes if s.source in ("wire", "via")]
        if len(shapes) < 2:
            continue
        if layer.kind == "cut":
            _check_cut_layer(layer, shapes, violations)
        elif layer.kind == "routing":
            _check_routing_layer(layer, shapes, violations)
    return sorted_violations(list(violations))


def _nets_present(shapes: list[LayerShape]) -> set[str]:
    return {s.net for s in shapes if s.net is not None}


def _check_cut_layer(layer, shapes: list[LayerShape], out: set[Violation]):
    required = layer.cut_spacing
    if required <= 0:
        if len(_nets_present(shapes)) >= 2:
            raise MissingRule(layer.name)
        return
    for i, j in _sweep_pairs(shapes, required):
        a, b = shapes[i], shapes[j]
        if not _different_nets(a, b):
            continue
        measured, _prl = _pair_distance(a.rect, b.rect)
        if measured < required:
            out.add(Violation(
                kind="cutSpacing", location=a.rect.union(b.rect),
                layer=layer.name, nets=tuple(sorted({a.net, b.net})),
                measured=measured, required=required))


def _check_routing_layer(layer, shapes: list[LayerShape], out: set[Violation]):
    table = layer.spacing_prl
    max_prl = table.max_spacing()
    if max_prl <= 0:
        if len(_nets_present(shapes)) >= 2:
            raise MissingRule(layer.name)
        return
    eol_s, eol_w, eol_within = layer.spacing_eol
    window = max(max_prl, eol_s + eol_within)
    for i, j in _sweep_pairs(shapes, window):
        a, b = shapes[i], shapes[j]
        if not _different_nets(a, b):
            continue
        inter = a.rect.intersection(b.rect)
        if inter is not None and inter.area > 0:
            continue  # overlapping shapes are shorts, not spacing issues
        measured, prl = _pair_distance(a.rect, b.rect)
        required = table.lookup(max(a.lookup_width, b.lookup_width), prl)
        if measured < required:
            out.add(Violation(
                kind="prlSpacing", location=a.rect.union(b.rect),
                layer=layer.name, nets=tuple(sorted({a.net, b.net})),
                measured=measured, required=required))
        if eol_s > 0:
            for first, second in ((a, b), (b, a)):
                for measured_eol, region in _eol_incursions(
                        first.rect, second.rect, eol_s, eol_w, eol_within):
                    out.add(Violation(
                        kind="eolSpacing", location=region, layer=layer.name,
                        nets=tuple(sorted({a.net, b.net})),
                        measured=measured_eol, required=eol_s))


def _eol_incursions(a: Rect, b: Rect, s: int, w: int, within: int):
    """Incursions of b into the end-of-line regions of a's short edges.

    An edge of a shorter than w projects a region extending s beyond the
    edge and within sideways; any positive-area overlap of b with that
    region violates, measured as b's clearance from the edge plane.
    """
    found = []

    def probe(region: Rect, clearance: int):
        inter = region.intersection(b)
        if inter is not None and inter.area > 0:
            found.append((max(clearance, 0), inter))

    if a.height < w:
        probe(Rect.of(a.hi.x, a.lo.y - within, a.hi.x + s, a.hi.y + within),
              b.lo.x - a.hi.x)
        probe(Rect.of(a.lo.x - s, a.lo.y - within, a.lo.x, a.hi.y + within),
              a.lo.x - b.hi.x)
    if a.width < w:
        probe(Rect.of(a.lo.x - within, a.hi.y, a.hi.x + within, a.hi.y + s),
              b.lo.y - a.hi.y)
        probe(Rect.of(a.lo.x - within, a.lo.y - s, a.hi.x + within, a.lo.y),
              a.lo.y - b.hi.y)
    return found


def _merge_touching(rects: list[Rect]) -> list[list[Rect]]:
    """Group rects into connected components under touch-or-overlap."""
    n = len(rects)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    order = sorted(range(n), key=lambda i: rects[i].lo.x)
    active: list[int] = []
    for i in order:
        active = [j for j in active if rects[j].hi.x >= rects[i].lo.x]
        for j in active:
            if rects[i].touches(rects[j]):
                parent[find(i)] = find(j)
        active.append(i)
    groups: dict[int, list[Rect]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(rects[i])
    return list(groups.values())


def _union_area(rects: list[Rect]) -> int:
    """Area of the union of rects by x-interval scanline."""
    xs = sorted({r.lo.x for r in rects} | {r.hi.x for r in rects})
    total = 0
    for x1, x2 in zip(xs, xs[1:]):
        spans = sorted((r.lo.y, r.hi.y) for r in rects
                       if r.lo.x <= x1 and r.hi.x >= x2)
        covered = 0
        cur_lo = cur_hi = None
        for lo, hi in spans:
            if cur_hi is None or lo > cur_hi:
                if cur_hi is not None:
                    covered += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        if cur_hi is not None:
            covered += cur_hi - cur_lo
        total += (x2 - x1) * covered
    return total


def check_min_area(design: Design) -> list[Violation]:
    """Per net per layer, merge touching shapes; merged area below the
    layer minimum is a violation located at the polygon bbox."""
    design.require_frozen()
    tech = design.technology
    violations = []
    for layer_name, all_shapes in collect_layer_shapes(design).items():
        layer = tech.layer(layer_name)
        if layer.kind != "routing" or layer.min_area <= 0:
            continue
        by_net: dict[str, list[Rect]] = {}
        for s in all_shapes:
            if s.net is not None and s.source in ("wire", "via"):
                by_net.setdefault(s.net, []).append(s.rect)
        for net, rects in sorted(by_net.items()):
            for group in _merge_touching(rects):
                area = _union_area(group)
                if area < layer.min_area:
                    bbox = group[0]
                    for r in group[1:]:
                        bbox = bbox.union(r)
                    violations.append(Violation(
                        kind="minArea", location=bbox, layer=layer_name,
                        nets=(net,), measured=area, required=layer.min_area))
    return sorted_violations(violations)
