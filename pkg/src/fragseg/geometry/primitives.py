"""Polygon primitives with exact predicates.

Coordinates may be ints, floats or Fractions. Every validity-relevant
predicate runs on exact rationals (floats are converted losslessly), so
there is no epsilon anywhere in intersection or containment logic; that
removes the classic robustness failure mode of polygon repair code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ..errors import DegenerateRing

Num = int | float | Fraction
Point = tuple[Num, Num]


def exact(v: Num):
    """Lossless conversion to int/Fraction for exact arithmetic."""
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else v
    if isinstance(v, float):
        if v.is_integer():
            return int(v)
        return Fraction(v)
    raise TypeError(f"unsupported coordinate type {type(v)!r}")


def exact_points(points: Sequence[Point]) -> list[tuple]:
    return [(exact(x), exact(y)) for x, y in points]


def _dedupe_cyclic(points: Sequence[Point]) -> tuple:
    out: list[Point] = []
    for p in points:
        if not out or (p[0] != out[-1][0] or p[1] != out[-1][1]):
            out.append((p[0], p[1]))
    while len(out) > 1 and out[0][0] == out[-1][0] and out[0][1] == out[-1][1]:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class Ring:
    """Closed boundary, stored open (the first point is not repeated).

    Consecutive duplicate points (including the wrap-around) are removed at
    construction; at least three distinct points must remain. Components of
    one or two pixels therefore have no ring representation.
    """

    points: tuple[Point, ...]

    def __init__(self, points: Iterable[Point]):
        pts = _dedupe_cyclic(list(points))
        if len(pts) < 3:
            raise DegenerateRing(f"ring needs >= 3 distinct points, got {len(pts)}")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def signed_area2(self):
        """Twice the shoelace area, exact; positive means counter-clockwise."""
        pts = exact_points(self.points)
        total = 0
        for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
            total += x0 * y1 - x1 * y0
        return total

    def is_ccw(self) -> bool:
        return self.signed_area2() > 0

    def reversed(self) -> "Ring":
        return Ring(tuple(reversed(self.points)))

    def as_array(self) -> np.ndarray:
        return np.asarray([(float(x), float(y)) for x, y in self.points], dtype=np.float64)

    def bounds(self) -> tuple[float, float, float, float]:
        a = self.as_array()
        return float(a[:, 0].min()), float(a[:, 1].min()), float(a[:, 0].max()), float(a[:, 1].max())


@dataclass(frozen=True)
class PolygonWithHoles:
    """One shell ring plus zero or more hole rings."""

    shell: Ring
    holes: tuple[Ring, ...] = ()

    def __init__(self, shell: Ring, holes: Iterable[Ring] = ()):
        object.__setattr__(self, "shell", shell)
        object.__setattr__(self, "holes", tuple(holes))

    def rings(self) -> tuple[Ring, ...]:
        return (self.shell,) + self.holes

    def bounds(self) -> tuple[float, float, float, float]:
        return self.shell.bounds()


@dataclass
class ContourNode:
    """Node of the traced contour forest; depth 0 is an outermost border."""

    ring: Ring
    depth: int
    children: list["ContourNode"] = field(default_factory=list)


def polygon_area(p: PolygonWithHoles) -> float:
    """Shell area minus hole areas, in squared pixels."""
    area2 = abs(p.shell.signed_area2())
    for h in p.holes:
        area2 -= abs(h.signed_area2())
    return float(area2) / 2.0


def orient(a, b, c) -> int:
    """Sign of the cross product (b-a) x (c-a): 1 left turn, -1 right, 0 collinear."""
    v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (v > 0) - (v < 0)


def on_segment(p, a, b) -> bool:
    """Exact: p lies on the closed segment a-b (p, a, b exact coords)."""
    if orient(a, b, p) != 0:
        return False
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def _line_intersection(p1, p2, q1, q2):
    """Intersection point of two non-parallel lines, exact Fractions."""
    r = (p2[0] - p1[0], p2[1] - p1[1])
    s = (q2[0] - q1[0], q2[1] - q1[1])
    denom = r[0] * s[1] - r[1] * s[0]
    t = Fraction((q1[0] - p1[0]) * s[1] - (q1[1] - p1[1]) * s[0], 1) / denom
    x = p1[0] + t * r[0]
    y = p1[1] + t * r[1]
    return (exact(x), exact(y))


def segment_hits(p1, p2, q1, q2) -> tuple[str, list]:
    """Classify how two closed segments meet (exact coordinates).

    Returns ``(kind, points)`` with kind one of ``none`` (disjoint),
    ``proper`` (interiors cross at one point), ``touch`` (single shared
    point involving an endpoint) or ``overlap`` (collinear overlap of
    positive length; points are the overlap interval's endpoints).
    """
    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)

    if o1 == o2 == 0:  # collinear
        axis = 0 if p1[0] != p2[0] else 1
        lo_p, hi_p = sorted((p1, p2), key=lambda t: t[axis])
        lo_q, hi_q = sorted((q1, q2), key=lambda t: t[axis])
        lo = max(lo_p, lo_q, key=lambda t: t[axis])
        hi = min(hi_p, hi_q, key=lambda t: t[axis])
        if lo[axis] > hi[axis]:
            return "none", []
        if lo[axis] == hi[axis]:
            return "touch", [lo]
        return "overlap", [lo, hi]

    if o1 != o2 and o3 != o4:
        if o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
            return "proper", [_line_intersection(p1, p2, q1, q2)]
        # an endpoint lies on the other segment
        for pt, a, b in ((q1, p1, p2), (q2, p1, p2), (p1, q1, q2), (p2, q1, q2)):
            if on_segment(pt, a, b):
                return "touch", [pt]
    return "none", []


def candidate_pairs(segments: list[tuple]) -> set[tuple[int, int]]:
    """Index pairs of segments whose cells overlap in a uniform grid.

    Complete by construction: cell ranges come from exact coordinate floors,
    so no near-boundary pair can be missed.
    """
    if len(segments) < 2:
        return set()
    spans = []
    for a, b in segments:
        spans.append(max(abs(float(b[0]) - float(a[0])), abs(float(b[1]) - float(a[1]))))
    cell = max(1, int(round(float(np.median(spans)) * 2.0)))

    def cell_floor(v) -> int:
        return v // cell if isinstance(v, int) else math.floor(v / cell)

    grid: dict[tuple[int, int], list[int]] = {}
    for idx, (a, b) in enumerate(segments):
        x0 = cell_floor(min(a[0], b[0]))
        x1 = cell_floor(max(a[0], b[0]))
        y0 = cell_floor(min(a[1], b[1]))
        y1 = cell_floor(max(a[1], b[1]))
        for cx in range(x0, x1 + 1):
            for cy in range(y0, y1 + 1):
                grid.setdefault((cx, cy), []).append(idx)

    pairs: set[tuple[int, int]] = set()
    for members in grid.values():
        if len(members) < 2:
            continue
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                a, b = members[i], members[j]
                pairs.add((a, b) if a < b else (b, a))
    return pairs


def point_on_ring_boundary(pt, pts: list) -> bool:
    """Exact: the point lies on some edge of the (cyclically closed) ring."""
    n = len(pts)
    for i in range(n):
        if on_segment(pt, pts[i], pts[(i + 1) % n]):
            return True
    return False


def locate_point(pt, pts: list) -> int:
    """Classify a point against a ring: 1 inside, 0 outside, -1 on boundary.

    Float arithmetic screens the edges; any edge whose verdict falls inside
    a conservative error margin is re-evaluated exactly, so the result
    always equals the pure-rational computation.
    """
    n = len(pts)
    if n < 3:
        return 0
    px = np.fromiter((float(p[0]) for p in pts), np.float64, n)
    py = np.fromiter((float(p[1]) for p in pts), np.float64, n)
    qx = np.roll(px, -1)
    qy = np.roll(py, -1)
    xt, yt = float(pt[0]), float(pt[1])

    scale = max(np.abs(px).max(), np.abs(py).max(), abs(xt), abs(yt), 1.0)
    m1 = scale * 1e-9          # error bound for single coordinates
    m2 = scale * scale * 1e-9  # error bound for cross products

    # boundary candidates: edge bounding box contains the point (with margin)
    near = ((np.minimum(px, qx) - m1 <= xt) & (xt <= np.maximum(px, qx) + m1)
            & (np.minimum(py, qy) - m1 <= yt) & (yt <= np.maximum(py, qy) + m1))
    if near.any():
        cross = (qx - px) * (yt - py) - (qy - py) * (xt - px)
        for i in np.nonzero(near & (np.abs(cross) <= m2))[0]:
            if on_segment(pt, pts[i], pts[(i + 1) % n]):
                return -1

    y_clear = (np.abs(py - yt) > m1) & (np.abs(qy - yt) > m1)
    straddle = (py > yt) != (qy > yt)
    num = (px - xt) * (qy - py) + (yt - py) * (qx - px)
    num_clear = np.abs(num) > m2
    trusted = y_clear & (~straddle | num_clear)

    crossings = int(np.count_nonzero(
        trusted & straddle & (((qy > py) & (num > 0)) | ((qy < py) & (num < 0)))
    ))
    for i in np.nonzero(~trusted)[0]:
        a, b = pts[i], pts[(i + 1) % n]
        if (a[1] > pt[1]) != (b[1] > pt[1]):
            exact_num = (a[0] - pt[0]) * (b[1] - a[1]) + (pt[1] - a[1]) * (b[0] - a[0])
            if (exact_num > 0) if b[1] > a[1] else (exact_num < 0):
                crossings += 1
    return crossings & 1


def point_in_ring(pt, pts: list) -> bool:
    """Even-odd parity by exact ray crossing; the point must not be on the boundary."""
    xt, yt = pt
    inside = False
    n = len(pts)
    for i in range(n):
        px, py = pts[i]
        qx, qy = pts[(i + 1) % n]
        if (py > yt) != (qy > yt):
            # sign of (x_cross - xt) times (qy - py)
            num = (px - xt) * (qy - py) + (yt - py) * (qx - px)
            if qy > py:
                if num > 0:
                    inside = not inside
            else:
                if num < 0:
                    inside = not inside
    return inside


def interior_point(pts: list):
    """A point strictly inside a simple ring, exact.

    Uses the diagonal-existence construction at the bottommost vertex, then
    verifies with the exact parity test, halving toward the vertex until a
    strictly interior point is found.
    """
    n = len(pts)
    iv = min(range(n), key=lambda i: (pts[i][1], pts[i][0]))
    v = pts[iv]
    a = pts[(iv - 1) % n]
    b = pts[(iv + 1) % n]

    best = None
    best_dist = None
    for p in pts:
        if p in (a, v, b):
            continue
        if _in_closed_triangle(p, a, v, b):
            d = abs((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]))
            if best is None or d > best_dist:
                best, best_dist = p, d

    if best is None:
        cand = (Fraction(a[0] + v[0] + b[0], 3), Fraction(a[1] + v[1] + b[1], 3))
    else:
        cand = (Fraction(v[0] + best[0], 2), Fraction(v[1] + best[1], 2))

    for _ in range(96):
        if not point_on_ring_boundary(cand, pts) and point_in_ring(cand, pts):
            return (exact(cand[0]), exact(cand[1]))
        cand = (Fraction(v[0] + cand[0], 2), Fraction(v[1] + cand[1], 2))
    raise DegenerateRing("could not find an interior point")


def _in_closed_triangle(p, a, b, c) -> bool:
    d1 = orient(a, b, p)
    d2 = orient(b, c, p)
    d3 = orient(c, a, p)
    has_neg = d1 < 0 or d2 < 0 or d3 < 0
    has_pos = d1 > 0 or d2 > 0 or d3 > 0
    return not (has_neg and has_pos)
