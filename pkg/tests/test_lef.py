"""LEF reader tests."""

import pytest

from rdflow.errors import ParseError, UnknownLayerRef
from rdflow.geom import Rect
from rdflow.io.lef import parse_lef

SMALL = """
VERSION 5.8 ;
UNITS
  DATABASE MICRONS 2000 ;
END UNITS

LAYER M1
  TYPE ROUTING ;
  DIRECTION HORIZONTAL ;
  PITCH 0.2 ;
  WIDTH 0.1 ;
  SPACING 0.1 ;
  AREA 0.02 ;
END M1

LAYER V1
  TYPE CUT ;
  SPACING 0.15 ;
END V1

LAYER M2
  TYPE ROUTING ;
  DIRECTION VERTICAL ;
  PITCH 0.2 ;
  WIDTH 0.1 ;
  SPACINGTABLE
    PARALLELRUNLENGTH 0.0 0.5
    WIDTH 0.0 0.1 0.1
    WIDTH 0.25 0.15 0.2 ;
END M2

SITE core
  CLASS CORE ;
  SIZE 0.2 BY 1.2 ;
END core

VIA via1 DEFAULT
  LAYER M1 ;
    RECT -0.05 -0.05 0.05 0.05 ;
  LAYER V1 ;
    RECT -0.035 -0.035 0.035 0.035 ;
  LAYER M2 ;
    RECT -0.05 -0.05 0.05 0.05 ;
END via1

MACRO INV_X1
  CLASS CORE ;
  ORIGIN 0 0 ;
  SIZE 0.4 BY 1.2 ;
  SITE core ;
  PIN A
    DIRECTION INPUT ;
    USE SIGNAL ;
    PORT
      LAYER M1 ;
        RECT 0.05 0.5 0.15 0.6 ;
    END
  END A
  PIN Y
    DIRECTION OUTPUT ;
    PORT
      LAYER M1 ;
        RECT 0.25 0.5 0.35 0.6 ;
    END
  END Y
  OBS
    LAYER M1 ;
      RECT 0.0 0.0 0.4 0.1 ;
  END
END INV_X1

END LIBRARY
"""


def test_layers_sites_masters():
    tech, masters = parse_lef(SMALL)
    assert tech.dbu_per_micron == 2000
    assert [l.name for l in tech.layers] == ["M1", "V1", "M2"]
    assert [l.kind for l in tech.layers] == ["routing", "cut", "routing"]
    assert [l.index for l in tech.layers] == [1, 2, 3]
    assert tech.routing_ordinal("M2") == 2
    assert tech.sites["core"].width == 400
    assert tech.sites["core"].height == 2400
    assert list(masters) == ["INV_X1"]


def test_micron_scaling():
    tech, masters = parse_lef(SMALL)
    m1 = tech.layer("M1")
    assert m1.pitch == 400
    assert m1.width == 200
    assert m1.spacing_prl.lookup(0, 0) == 200
    # AREA is um^2: 0.02 * 2000^2
    assert m1.min_area == 0.02 * 2000 * 2000 == 80_000
    inv = masters["INV_X1"]
    assert (inv.width, inv.height) == (800, 2400)
    assert inv.pins["A"].shapes == [("M1", Rect.of(100, 1000, 300, 1200))]
    assert inv.obstructions == [("M1", Rect.of(0, 0, 800, 200))]


def test_cut_layer_spacing():
    tech, _ = parse_lef(SMALL)
    v1 = tech.layer("V1")
    assert v1.kind == "cut"
    assert v1.cut_spacing == 300


def test_spacing_table_parsed():
    tech, _ = parse_lef(SMALL)
    t = tech.layer("M2").spacing_prl
    assert t.prl == [0, 1000]
    assert t.width == [0, 500]
    assert t.spacing == [[200, 200], [300, 400]]
    assert t.lookup(600, 1200) == 400


def test_via_layer_roles():
    tech, _ = parse_lef(SMALL)
    v = tech.vias["via1"]
    assert (v.bottom_layer, v.cut_layer, v.top_layer) == ("M1", "V1", "M2")
    assert tech.via_between(1) is v
    assert tech.cut_between(1).name == "V1"


def test_unknown_layer_in_macro():
    bad = SMALL.replace("LAYER M1 ;\n        RECT 0.05", "LAYER M9 ;\n        RECT 0.05")
    with pytest.raises(UnknownLayerRef, match="M9"):
        parse_lef(bad)


def test_off_grid_micron_rejected():
    # 1/2000 um is the finest representable step; 0.00025 is not on it
    bad = SMALL.replace("PITCH 0.2 ;", "PITCH 0.00025 ;")
    with pytest.raises(ParseError, match="grid"):
        parse_lef(bad)


def test_count_mismatched_end_name():
    bad = SMALL.replace("END INV_X1", "END WRONG")
    with pytest.raises(ParseError):
        parse_lef(bad)


def test_unsupported_statements_warn():
    txt = SMALL.replace("VERSION 5.8 ;", "VERSION 5.8 ;\nFANCYSTUFF 12 ;")
    tech, _ = parse_lef(txt)
    assert any("FANCYSTUFF" in w for w in tech.warnings)


def test_units_default_applies():
    txt = "LAYER M1\n  TYPE ROUTING ;\n  PITCH 0.2 ;\nEND M1\nEND LIBRARY\n"
    tech, _ = parse_lef(txt)
    assert tech.dbu_per_micron == 100
    assert tech.layer("M1").pitch == 20


def test_units_after_conversion_rejected():
    txt = ("LAYER M1\n  TYPE ROUTING ;\n  PITCH 0.2 ;\nEND M1\n"
           "UNITS\n  DATABASE MICRONS 2000 ;\nEND UNITS\nEND LIBRARY\n")
    with pytest.raises(ParseError, match="UNITS"):
        parse_lef(txt)


def test_descending_spacing_table_rejected():
    bad = SMALL.replace("PARALLELRUNLENGTH 0.0 0.5", "PARALLELRUNLENGTH 0.5 0.0")
    with pytest.raises(ParseError):
        parse_lef(bad)
