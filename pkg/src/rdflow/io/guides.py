"""Route-guide file format (2018 contest style).

Per net: the net name, an opening parenthesis line, one `x1 y1 x2 y2 layer`
rectangle per line in DBU, and a closing parenthesis line. Rectangles must
be non-degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ParseError
from ..geom import Rect


@dataclass
class RouteGuideSet:
    per_net: dict[str, list[tuple[Rect, str]]] = field(default_factory=dict)


def parse_guides(text: str, routing_layers: set[str] | None = None) -> RouteGuideSet:
    """Parse guide text.

    routing_layers: when given, rectangle layers outside this set are errors.
    """
    guides = RouteGuideSet()
    name: str | None = None
    rects: list[tuple[Rect, str]] | None = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s:
            continue
        if rects is None:
            if s == "(":
                if name is None:
                    raise ParseError("'(' without a net name", ln)
                rects = []
            elif s == ")":
                raise ParseError("')' without '('", ln)
            else:
                if name is not None:
                    raise ParseError(f"expected '(' after net '{name}'", ln)
                if len(s.split()) != 1:
                    raise ParseError(f"expected a net name, got {s!r}", ln)
                name = s
        else:
            if s == ")":
                if name in guides.per_net:
                    raise ParseError(f"duplicate net '{name}'", ln)
                guides.per_net[name] = rects
                name = None
                rects = None
                continue
            parts = s.split()
            if len(parts) != 5:
                raise ParseError(f"expected 'x1 y1 x2 y2 layer', got {s!r}", ln)
            try:
                x1, y1, x2, y2 = (int(p) for p in parts[:4])
            except ValueError:
                raise ParseError(f"bad coordinates in {s!r}", ln) from None
            layer = parts[4]
            if x1 >= x2 or y1 >= y2:
                raise ParseError(f"degenerate guide rect {s!r}", ln)
            if routing_layers is not None and layer not in routing_layers:
                raise ParseError(f"unknown routing layer '{layer}'", ln)
            rects.append((Rect.of(x1, y1, x2, y2), layer))
    if name is not None:
        raise ParseError(f"net '{name}' not closed by ')'", len(text.splitlines()))
    return guides


def write_guides(guides: RouteGuideSet) -> str:
    """Serialize guides; nets sorted by name, rects in stored order."""
    out: list[str] = []
    for name in sorted(guides.per_net):
        out.append(name)
        out.append("(")
        for rect, layer in guides.per_net[name]:
            out.append(f"{rect.lo.x} {rect.lo.y} {rect.hi.x} {rect.hi.y} {layer}")
        out.append(")")
    return "\n".join(out) + ("\n" if out else "")
