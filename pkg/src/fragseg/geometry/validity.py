"""Polygon validity checks against the usual OGC rules.

Rings must be simple, holes must sit in the shell interior (finitely many
boundary touches allowed), holes must not overlap each other, shells are
counter-clockwise and holes clockwise. All tests use exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .primitives import (PolygonWithHoles, candidate_pairs, exact_points,
                         interior_point, locate_point, segment_hits)

KINDS = (
    "self_intersection",
    "hole_outside_shell",
    "overlapping_holes",
    "bad_orientation",
    "degenerate_ring",
)


@dataclass(frozen=True)
class Violation:
    kind: str
    location: tuple[float, float]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown violation kind {self.kind!r}")


def _ring_segments(pts: list) -> list[tuple]:
    n = len(pts)
    return [(pts[i], pts[(i + 1) % n]) for i in range(n)]


def _loc(pt) -> tuple[float, float]:
    return (float(pt[0]), float(pt[1]))


def ring_self_intersections(pts: list) -> list[Violation]:
    """Simplicity violations of one ring: repeated vertices, segment
    crossings, and collinear overlaps between its edges."""
    out: list[Violation] = []
    seen: dict[tuple, int] = {}
    for i, p in enumerate(pts):
        if p in seen:
            out.append(Violation("self_intersection", _loc(p)))
        else:
            seen[p] = i
    n = len(pts)
    segs = _ring_segments(pts)
    for i, j in sorted(candidate_pairs(segs)):
        adjacent = (j - i == 1) or (i == 0 and j == n - 1)
        kind, where = segment_hits(*segs[i], *segs[j])
        if kind == "none":
            continue
        if adjacent:
            # consecutive edges legitimately share one endpoint
            shared = segs[i][1] if j - i == 1 else segs[i][0]
            if kind == "touch" and where[0] == shared:
                continue
            out.append(Violation("self_intersection", _loc(where[0])))
        elif kind in ("proper", "touch", "overlap"):
            out.append(Violation("self_intersection", _loc(where[0])))
    return out


def _rings_cross(a_pts: list, b_pts: list) -> tuple[bool, tuple | None]:
    """True when ring boundaries properly cross or overlap collinearly
    (point touches are tolerated)."""
    segs_a = _ring_segments(a_pts)
    segs_b = _ring_segments(b_pts)
    combined = segs_a + segs_b
    na = len(segs_a)
    for i, j in candidate_pairs(combined):
        if i < na <= j:
            kind, where = segment_hits(*combined[i], *combined[j])
            if kind in ("proper", "overlap"):
                return True, where[0]
    return False, None


def _safe_interior_sample(pts: list, others: list[list]):
    """Interior point of ``pts`` that avoids the boundaries of ``others``."""
    cand = interior_point(pts)
    if not any(locate_point(cand, o) == -1 for o in others):
        return cand
    # halve toward the bottom-most vertex until clear of all boundaries
    n = len(pts)
    iv = min(range(n), key=lambda i: (pts[i][1], pts[i][0]))
    v = pts[iv]
    from fractions import Fraction
    for _ in range(96):
        cand = (Fraction(v[0] + cand[0], 2), Fraction(v[1] + cand[1], 2))
        if (locate_point(cand, pts) == 1
                and not any(locate_point(cand, o) == -1 for o in others)):
            return cand
    return None


def validate(p: PolygonWithHoles) -> list[Violation]:
    """Empty list iff the polygon satisfies every validity rule."""
    out: list[Violation] = []
    rings = [exact_points(r.points) for r in p.rings()]

    degenerate = [False] * len(rings)
    for idx, (ring, pts) in enumerate(zip(p.rings(), rings)):
        if _all_collinear(pts):
            out.append(Violation("degenerate_ring", _loc(pts[0])))
            degenerate[idx] = True
            continue
        area2 = ring.signed_area2()
        # area can be zero for non-collinear rings (e.g. a bowtie); the
        # self-intersection check reports those, orientation is undefined
        if area2 != 0:
            if idx == 0 and area2 < 0:
                out.append(Violation("bad_orientation", _loc(pts[0])))
            if idx > 0 and area2 > 0:
                out.append(Violation("bad_orientation", _loc(pts[0])))
        out.extend(ring_self_intersections(pts))

    shell_pts = rings[0]
    hole_list = rings[1:]
    for hi, hole in enumerate(hole_list):
        if degenerate[hi + 1]:
            continue
        crossed, where = _rings_cross(hole, shell_pts)
        if crossed:
            out.append(Violation("hole_outside_shell", _loc(where)))
            continue
        sample = _safe_interior_sample(hole, [shell_pts])
        if sample is None or locate_point(sample, shell_pts) != 1:
            out.append(Violation("hole_outside_shell", _loc(hole[0])))

    for i in range(len(hole_list)):
        if degenerate[i + 1]:
            continue
        for j in range(i + 1, len(hole_list)):
            if degenerate[j + 1]:
                continue
            a, b = hole_list[i], hole_list[j]
            if _bounds_disjoint(a, b):
                continue
            crossed, where = _rings_cross(a, b)
            if crossed:
                out.append(Violation("overlapping_holes", _loc(where)))
                continue
            sample = _safe_interior_sample(a, [b])
            if sample is not None and locate_point(sample, b) == 1:
                out.append(Violation("overlapping_holes", _loc(sample)))
                continue
            sample = _safe_interior_sample(b, [a])
            if sample is not None and locate_point(sample, a) == 1:
                out.append(Violation("overlapping_holes", _loc(sample)))
    return out


def _all_collinear(pts: list) -> bool:
    from .primitives import orient

    a, b = pts[0], pts[1]
    return all(orient(a, b, c) == 0 for c in pts[2:])


def _bounds_disjoint(a_pts: list, b_pts: list) -> bool:
    ax0 = min(p[0] for p in a_pts); ax1 = max(p[0] for p in a_pts)
    ay0 = min(p[1] for p in a_pts); ay1 = max(p[1] for p in a_pts)
    bx0 = min(p[0] for p in b_pts); bx1 = max(p[0] for p in b_pts)
    by0 = min(p[1] for p in b_pts); by1 = max(p[1] for p in b_pts)
    return ax1 < bx0 or bx1 < ax0 or ay1 < by0 or by1 < ay0
