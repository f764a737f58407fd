"""Route-guide format tests."""

import random

import pytest

from rdflow.errors import ParseError
from rdflow.geom import Rect
from rdflow.io.guides import RouteGuideSet, parse_guides, write_guides


def test_single_net_four_line_block():
    g = RouteGuideSet({"n1": [(Rect.of(0, 0, 3000, 400), "M2")]})
    text = write_guides(g)
    assert text.splitlines() == ["n1", "(", "0 0 3000 400 M2", ")"]
    assert parse_guides(text) == g


def test_empty_set_empty_file():
    assert write_guides(RouteGuideSet()) == ""
    assert parse_guides("") == RouteGuideSet()


def test_layer_validation():
    text = "n1\n(\n0 0 100 100 M9\n)\n"
    parse_guides(text)  # fine without a layer set
    with pytest.raises(ParseError, match="M9"):
        parse_guides(text, routing_layers={"M1", "M2"})


def test_degenerate_rect_rejected():
    with pytest.raises(ParseError, match="degenerate"):
        parse_guides("n1\n(\n0 0 0 100 M1\n)\n")


def test_unclosed_net():
    with pytest.raises(ParseError, match="not closed"):
        parse_guides("n1\n(\n0 0 100 100 M1\n")


def test_missing_open_paren():
    with pytest.raises(ParseError):
        parse_guides("n1\nn2\n(\n0 0 1 1 M1\n)\n")


def test_round_trip_random():
    rng = random.Random(211)
    layers = ["M1", "M2", "M3", "M4"]
    for _ in range(300):
        g = RouteGuideSet()
        for i in range(rng.randint(0, 6)):
            rects = []
            for _ in range(rng.randint(1, 5)):
                x1 = rng.randrange(0, 10000, 10)
                y1 = rng.randrange(0, 10000, 10)
                rects.append((Rect.of(x1, y1, x1 + rng.randrange(10, 3000, 10),
                                      y1 + rng.randrange(10, 3000, 10)),
                              rng.choice(layers)))
            g.per_net[f"net_{i}"] = rects
        text = write_guides(g)
        assert parse_guides(text) == g
        assert write_guides(parse_guides(text)) == text
