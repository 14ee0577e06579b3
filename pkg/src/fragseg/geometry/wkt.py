"""WKT 1.x text for POLYGON geometries.

Canonical output repeats the first point of each ring and renders integral
coordinates without a decimal point; ``repr`` is used for the rest so text
round-trips losslessly.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import DegenerateRing, WktParseError
from .primitives import PolygonWithHoles, Ring


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        v = int(v) if v.denominator == 1 else float(v)
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    return repr(v)


def _ring_text(ring: Ring) -> str:
    pts = list(ring.points) + [ring.points[0]]
    return "(" + ", ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in pts) + ")"


def to_wkt(p: PolygonWithHoles) -> str:
    rings = ", ".join(_ring_text(r) for r in p.rings())
    return f"POLYGON ({rings})"


def to_wkt_multi(polys: list[PolygonWithHoles]) -> str:
    if not polys:
        return "MULTIPOLYGON EMPTY"
    bodies = ", ".join("(" + ", ".join(_ring_text(r) for r in p.rings()) + ")" for p in polys)
    return f"MULTIPOLYGON ({bodies})"


_NUMBER = re.compile(r"[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def fail(self, message: str):
        raise WktParseError(message, position=self.pos)

    def expect(self, token: str):
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            self.fail(f"expected {token!r}")
        self.pos += len(token)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def keyword(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalpha()):
            self.pos += 1
        if self.pos == start:
            self.fail("expected a geometry keyword")
        return self.text[start:self.pos].upper()

    def number(self):
        self.skip_ws()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.fail("expected a number")
        self.pos = m.end()
        tok = m.group(0)
        if re.fullmatch(r"[-+]?\d+", tok):
            return int(tok)
        return float(tok)

    def ring(self) -> Ring:
        start = self.pos
        self.expect("(")
        pts = []
        while True:
            x = self.number()
            y = self.number()
            pts.append((x, y))
            ch = self.peek()
            if ch == ",":
                self.pos += 1
                continue
            if ch == ")":
                self.pos += 1
                break
            self.fail("expected ',' or ')'")
        if len(pts) < 4:
            raise WktParseError("ring too short", position=start)
        if pts[0] != pts[-1]:
            raise WktParseError("ring is not closed", position=start)
        try:
            return Ring(pts[:-1])
        except DegenerateRing as exc:
            raise WktParseError(str(exc), position=start) from exc

    def polygon_body(self) -> PolygonWithHoles:
        self.expect("(")
        rings = [self.ring()]
        while self.peek() == ",":
            self.pos += 1
            rings.append(self.ring())
        self.expect(")")
        return PolygonWithHoles(rings[0], rings[1:])


def from_wkt(text: str):
    """Parse a POLYGON (to one polygon) or MULTIPOLYGON (to a list)."""
    sc = _Scanner(text)
    kw = sc.keyword()
    if kw == "POLYGON":
        poly = sc.polygon_body()
        sc.skip_ws()
        if sc.pos != len(sc.text):
            sc.fail("trailing characters after POLYGON")
        return poly
    if kw == "MULTIPOLYGON":
        sc.skip_ws()
        if sc.text.startswith("EMPTY", sc.pos):
            sc.pos += len("EMPTY")
            sc.skip_ws()
            if sc.pos != len(sc.text):
                sc.fail("trailing characters after MULTIPOLYGON EMPTY")
            return []
        sc.expect("(")
        polys = [sc.polygon_body()]
        while sc.peek() == ",":
            sc.pos += 1
            polys.append(sc.polygon_body())
        sc.expect(")")
        sc.skip_ws()
        if sc.pos != len(sc.text):
            sc.fail("trailing characters after MULTIPOLYGON")
        return polys
    raise WktParseError(f"unsupported geometry type {kw!r}", position=0)
