"""Routing preference metrics: wrong-way, off-track, guide honoring."""

from __future__ import annotations

from dataclasses import dataclass

from ..geom import Rect
from ..io.guides import RouteGuideSet
from ..model import Design, derive_tracks


@dataclass(frozen=True)
class RouteMetrics:
    wrong_way_length: int = 0
    off_track_length: int = 0
    guide_coverage: float = 1.0
    total_wirelength: int = 0
    via_count: int = 0


def _on_track(layer_tracks: dict[str, tuple[int, int, int]] | None,
              axis: str, coord: int) -> bool:
    """Whether a centerline coordinate lies on a defined track line."""
    spec = layer_tracks.get(axis) if layer_tracks else None
    if spec is None:
        return False
    start, count, step = spec
    if count <= 0:
        return False
    if step <= 0:
        return coord == start
    k, rem = divmod(coord - start, step)
    return rem == 0 and 0 <= k < count


def _interval_union(intervals: list[tuple[int, int]]) -> int:
    total = 0
    cur_lo = cur_hi = None
    for lo, hi in sorted(intervals):
        if cur_hi is None or lo > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


def _covered_length(rects: list[Rect], horizontal: bool,
                    fixed: int, lo: int, hi: int) -> int:
    """Length of the centerline span [lo, hi] at cross-coordinate `fixed`
    inside the union of the rects. Boundaries count as inside."""
    intervals = []
    for r in rects:
        if horizontal:
            if r.lo.y <= fixed <= r.hi.y:
                a, b = max(lo, r.lo.x), min(hi, r.hi.x)
                if a < b:
                    intervals.append((a, b))
        else:
            if r.lo.x <= fixed <= r.hi.x:
                a, b = max(lo, r.lo.y), min(hi, r.hi.y)
                if a < b:
                    intervals.append((a, b))
    return _interval_union(intervals)


def route_metrics(design: Design, guides: RouteGuideSet | None = None,
                  tracks: dict[str, dict[str, tuple[int, int, int]]] | None = None,
                  ) -> RouteMetrics:
    """Wire-quality metrics over all routed nets.

    Wrong-way length sums segments orthogonal to their layer's preferred
    direction. Off-track length sums segments whose centerline is not on a
    track line of the same axis. Guide coverage is the fraction of
    wirelength inside the owning net's guide rects on the wire's layer;
    with no wirelength at all it is 1.0.
    """
    design.require_frozen()
    tech = design.technology
    if tracks is None:
        tracks = derive_tracks(design)

    wrong_way = 0
    off_track = 0
    total = 0
    covered = 0
    via_count = 0
    for net in design.nets.values():
        guide_rects: dict[str, list[Rect]] = {}
        if guides is not None:
            for rect, lname in guides.per_net.get(net.name, []):
                guide_rects.setdefault(lname, []).append(rect)
        elif net.guide:
            for rect, lname in net.guide:
                guide_rects.setdefault(lname, []).append(rect)
        for rs in net.routing:
            if rs.kind == "via":
                via_count += 1
                continue
            length = rs.length()
            if length == 0:
                continue
            total += length
            layer = tech.layer(rs.layer)
            horizontal = rs.start.y == rs.end.y
            if horizontal != (layer.direction == "horizontal"):
                wrong_way += length
            layer_tracks = tracks.get(rs.layer)
            if horizontal:
                if not _on_track(layer_tracks, "Y", rs.start.y):
                    off_track += length
                covered += _covered_length(
                    guide_rects.get(rs.layer, []), True, rs.start.y,
                    min(rs.start.x, rs.end.x), max(rs.start.x, rs.end.x))
            else:
                if not _on_track(layer_tracks, "X", rs.start.x):
                    off_track += length
                covered += _covered_length(
                    guide_rects.get(rs.layer, []), False, rs.start.x,
                    min(rs.start.y, rs.end.y), max(rs.start.y, rs.end.y))

    coverage = covered / total if total > 0 else 1.0
    return RouteMetrics(
        wrong_way_length=wrong_way,
        off_track_length=off_track,
        guide_coverage=coverage,
        total_wirelength=total,
        via_count=via_count,
    )
