"""Geometry primitive tests, checked against brute-force point sampling."""

import random

import pytest

from rdflow.geom import ORIENTATIONS, Point, Rect, gap_between, orient_rect


def test_rect_of_normalizes_corners():
    r = Rect.of(10, 20, 3, 4)
    assert r.lo == Point(3, 4)
    assert r.hi == Point(10, 20)
    assert r.width == 7
    assert r.height == 16
    assert r.area == 112


def test_rect_rejects_inverted():
    with pytest.raises(ValueError):
        Rect(Point(5, 0), Point(0, 5))


def test_overlap_touch_disjoint():
    a = Rect.of(0, 0, 10, 10)
    assert a.overlaps(Rect.of(5, 5, 15, 15))
    # edge contact is touching, not overlap
    assert not a.overlaps(Rect.of(10, 0, 20, 10))
    assert a.touches(Rect.of(10, 0, 20, 10))
    # corner contact
    assert a.touches(Rect.of(10, 10, 20, 20))
    assert not a.overlaps(Rect.of(10, 10, 20, 20))
    assert not a.touches(Rect.of(11, 0, 20, 10))


def test_intersection_matches_overlap():
    rng = random.Random(7)
    for _ in range(500):
        a = Rect.of(rng.randint(0, 50), rng.randint(0, 50), rng.randint(0, 50), rng.randint(0, 50))
        b = Rect.of(rng.randint(0, 50), rng.randint(0, 50), rng.randint(0, 50), rng.randint(0, 50))
        i = a.intersection(b)
        if a.overlaps(b):
            assert i is not None and i.area > 0
            assert a.contains_rect(i) and b.contains_rect(i)
        elif a.touches(b):
            assert i is not None and i.area == 0
        else:
            assert i is None


def test_gap_between_axis_signs():
    a = Rect.of(0, 0, 10, 10)
    gx, gy = gap_between(a, Rect.of(15, 0, 25, 10))
    assert gx == 5 and gy == -10
    gx, gy = gap_between(a, Rect.of(0, 12, 10, 20))
    assert gx == -10 and gy == 2
    # diagonal separation: both gaps positive
    gx, gy = gap_between(a, Rect.of(13, 14, 20, 20))
    assert gx == 3 and gy == 4
    # overlap on both axes
    gx, gy = gap_between(a, Rect.of(5, 5, 15, 15))
    assert gx == -5 and gy == -5


def test_gap_is_symmetric():
    rng = random.Random(11)
    for _ in range(300):
        a = Rect.of(rng.randint(-20, 20), rng.randint(-20, 20), rng.randint(-20, 20), rng.randint(-20, 20))
        b = Rect.of(rng.randint(-20, 20), rng.randint(-20, 20), rng.randint(-20, 20), rng.randint(-20, 20))
        assert gap_between(a, b) == gap_between(b, a)


def test_orient_rect_identity_and_mirrors():
    # master 10 wide, 20 tall; pin rect near origin corner
    r = Rect.of(1, 2, 3, 5)
    assert orient_rect(r, "N", 10, 20) == r
    assert orient_rect(r, "S", 10, 20) == Rect.of(7, 15, 9, 18)
    assert orient_rect(r, "FN", 10, 20) == Rect.of(7, 2, 9, 5)
    assert orient_rect(r, "FS", 10, 20) == Rect.of(1, 15, 3, 18)


def test_orient_rect_stays_inside_master():
    rng = random.Random(3)
    for _ in range(400):
        w, h = rng.randint(4, 40), rng.randint(4, 40)
        x1 = rng.randint(0, w - 2)
        y1 = rng.randint(0, h - 2)
        r = Rect.of(x1, y1, rng.randint(x1 + 1, w), rng.randint(y1 + 1, h))
        for o in ORIENTATIONS:
            m = orient_rect(r, o, w, h)
            assert m.area == r.area
            assert 0 <= m.lo.x and m.hi.x <= w
            assert 0 <= m.lo.y and m.hi.y <= h


def test_orient_rect_rejects_rotations():
    with pytest.raises(ValueError):
        orient_rect(Rect.of(0, 0, 1, 1), "E", 4, 4)


def test_orientation_is_involution():
    # applying the same mirror twice restores the original shape
    rng = random.Random(5)
    for _ in range(200):
        w, h = rng.randint(2, 30), rng.randint(2, 30)
        x1, y1 = rng.randint(0, w - 1), rng.randint(0, h - 1)
        r = Rect.of(x1, y1, rng.randint(x1 + 1, w), rng.randint(y1 + 1, h))
        for o in ORIENTATIONS:
            assert orient_rect(orient_rect(r, o, w, h), o, w, h) == r
