"""Integer geometric primitives on the database-unit (DBU) grid.

All coordinates are integers. Rectangles are closed axis-aligned boxes
with lo <= hi on both axes; a degenerate rect (zero width or height) is
legal and has zero area.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Point:
    x: int
    y: int

    def translated(self, dx: int, dy: int) -> "Point":
        return Point(self.x + dx, self.y + dy)


@dataclass(frozen=True, order=True)
class Rect:
    lo: Point
    hi: Point

    def __post_init__(self):
        if self.lo.x > self.hi.x or self.lo.y > self.hi.y:
            raise ValueError(f"malformed rect {self}")

    @staticmethod
    def of(x1: int, y1: int, x2: int, y2: int) -> "Rect":
        """Build from corner coordinates in any order."""
        return Rect(Point(min(x1, x2), min(y1, y2)), Point(max(x1, x2), max(y1, y2)))

    @property
    def width(self) -> int:
        return self.hi.x - self.lo.x

    @property
    def height(self) -> int:
        return self.hi.y - self.lo.y

    @property
    def area(self) -> int:
        return self.width * self.height

    def coords(self) -> tuple[int, int, int, int]:
        return (self.lo.x, self.lo.y, self.hi.x, self.hi.y)

    def translated(self, dx: int, dy: int) -> "Rect":
        return Rect(self.lo.translated(dx, dy), self.hi.translated(dx, dy))

    def dilated(self, d: int) -> "Rect":
        return Rect.of(self.lo.x - d, self.lo.y - d, self.hi.x + d, self.hi.y + d)

    def intersection(self, other: "Rect") -> "Rect | None":
        """Overlap region, or None when the rects are disjoint (touching counts)."""
        x1 = max(self.lo.x, other.lo.x)
        y1 = max(self.lo.y, other.lo.y)
        x2 = min(self.hi.x, other.hi.x)
        y2 = min(self.hi.y, other.hi.y)
        if x1 > x2 or y1 > y2:
            return None
        return Rect(Point(x1, y1), Point(x2, y2))

    def overlaps(self, other: "Rect") -> bool:
        """True when the shared region has positive area."""
        return (
            max(self.lo.x, other.lo.x) < min(self.hi.x, other.hi.x)
            and max(self.lo.y, other.lo.y) < min(self.hi.y, other.hi.y)
        )

    def touches(self, other: "Rect") -> bool:
        """True when the rects overlap or share boundary (zero-area contact)."""
        return (
            self.lo.x <= other.hi.x
            and other.lo.x <= self.hi.x
            and self.lo.y <= other.hi.y
            and other.lo.y <= self.hi.y
        )

    def contains_point(self, x: int, y: int) -> bool:
        return self.lo.x <= x <= self.hi.x and self.lo.y <= y <= self.hi.y

    def contains_rect(self, other: "Rect") -> bool:
        return (
            self.lo.x <= other.lo.x
            and self.lo.y <= other.lo.y
            and self.hi.x >= other.hi.x
            and self.hi.y >= other.hi.y
        )

    def union(self, other: "Rect") -> "Rect":
        return Rect(
            Point(min(self.lo.x, other.lo.x), min(self.lo.y, other.lo.y)),
            Point(max(self.hi.x, other.hi.x), max(self.hi.y, other.hi.y)),
        )

    def clipped(self, bounds: "Rect") -> "Rect | None":
        return self.intersection(bounds)

    def center(self) -> Point:
        return Point((self.lo.x + self.hi.x) // 2, (self.lo.y + self.hi.y) // 2)


def gap_between(a: Rect, b: Rect) -> tuple[int, int]:
    """Per-axis gaps between two rects.

    A positive value is clear distance on that axis; a negative value is
    the extent of overlap. Both gaps negative means the rects overlap.
    """
    gx = max(a.lo.x - b.hi.x, b.lo.x - a.hi.x)
    gy = max(a.lo.y - b.hi.y, b.lo.y - a.hi.y)
    return gx, gy


# DEF placement orientations for standard-cell rows. The location of an
# instance is the lower-left corner of its oriented bounding box, so the
# bbox never changes with orientation; only pin geometry mirrors.
ORIENTATIONS = ("N", "S", "FN", "FS")


def orient_rect(r: Rect, orient: str, master_w: int, master_h: int) -> Rect:
    """Map a rect from master coordinates into the oriented cell frame."""
    if orient == "N":
        return r
    if orient == "S":
        return Rect.of(master_w - r.hi.x, master_h - r.hi.y, master_w - r.lo.x, master_h - r.lo.y)
    if orient == "FN":
        return Rect.of(master_w - r.hi.x, r.lo.y, master_w - r.lo.x, r.hi.y)
    if orient == "FS":
        return Rect.of(r.lo.x, master_h - r.hi.y, r.hi.x, master_h - r.lo.y)
    raise ValueError(f"unsupported orientation '{orient}'")
