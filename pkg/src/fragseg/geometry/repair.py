"""Polygon repair.

Strategy: every ring is noded at its self-intersection points and split
into simple loops (the untangle walk below). Splitting preserves the edge
multiset, so the even-odd coverage of the loop set equals that of the
original ring exactly; zero-area spurs drop out for free. The simple loops
are then reassembled into polygons by containment parity.

Two corner cases leave the exact path: hole rings that cross the shell are
clipped to the shell interior with a boolean difference, and hole rings
that cross *each other* are resolved with an even-odd symmetric
difference. Both are delegated to shapely and logged. Holes contained in
no shell are discarded and logged.
"""

from __future__ import annotations

import logging

from ..errors import UnrepairableGeometry
from .primitives import (PolygonWithHoles, Ring, candidate_pairs, exact_points,
                         locate_point, on_segment, segment_hits)
from .validity import _rings_cross, _safe_interior_sample, validate

logger = logging.getLogger(__name__)


def _loop_area2(pts: list):
    total = 0
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return total


def _dedupe(pts: list) -> list:
    out = []
    for p in pts:
        if not out or p != out[-1]:
            out.append(p)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def _node_ring(pts: list) -> list:
    """Insert every self-intersection point of the ring as a vertex."""
    n = len(pts)
    segs = [(pts[i], pts[(i + 1) % n]) for i in range(n)]
    splits: dict[int, set] = {}

    def insert(idx: int, pt):
        a, b = segs[idx]
        if pt != a and pt != b and on_segment(pt, a, b):
            splits.setdefault(idx, set()).add(pt)

    for i, j in candidate_pairs(segs):
        kind, where = segment_hits(*segs[i], *segs[j])
        if kind == "none":
            continue
        for pt in where:
            insert(i, pt)
            insert(j, pt)

    path: list = []
    for i in range(n):
        a, b = segs[i]
        path.append(a)
        if i in splits:
            axis = 0 if a[0] != b[0] else 1
            forward = b[axis] > a[axis]
            path.extend(sorted(splits[i], key=lambda p: p[axis], reverse=not forward))
    return path


def _extract_loops(path: list) -> list[list]:
    """Split a closed walk into simple loops at repeated vertices."""
    stack: list = []
    index: dict = {}
    loops: list[list] = []

    def emit(loop: list):
        loop = _dedupe(loop)
        if len(loop) >= 3 and _loop_area2(loop) != 0:
            loops.append(loop)

    for pt in path:
        if pt in index:
            k = index[pt]
            emit(stack[k:])
            for q in stack[k + 1:]:
                del index[q]
            del stack[k + 1:]
        else:
            index[pt] = len(stack)
            stack.append(pt)
    emit(stack)
    return loops


def untangle(pts: list) -> list[list]:
    """Simple loops covering exactly the even-odd region of one ring."""
    return _extract_loops(_node_ring(_dedupe(pts)))


def _parity_in_loops(sample, loops: list[list]) -> int:
    return sum(locate_point(sample, loop) == 1 for loop in loops) & 1


def _assemble_parity(loops: list[list]) -> list[PolygonWithHoles]:
    """Build polygons from pairwise non-crossing simple loops by depth parity."""
    samples = []
    for i, loop in enumerate(loops):
        others = [l for j, l in enumerate(loops) if j != i]
        samples.append(_safe_interior_sample(loop, others))

    contains = [[False] * len(loops) for _ in loops]
    depth = [0] * len(loops)
    for i in range(len(loops)):
        for j in range(len(loops)):
            if i != j and samples[i] is not None and locate_point(samples[i], loops[j]) == 1:
                contains[i][j] = True
                depth[i] += 1

    polys: list[PolygonWithHoles] = []
    areas = [abs(_loop_area2(l)) for l in loops]
    for i, loop in enumerate(loops):
        if depth[i] % 2 != 0:
            continue
        holes = []
        for j in range(len(loops)):
            if depth[j] == depth[i] + 1 and contains[j][i]:
                parents = [k for k in range(len(loops)) if contains[j][k] and depth[k] == depth[i]]
                if min(parents, key=lambda k: areas[k]) == i:
                    holes.append(j)
        polys.append(_make_polygon(loop, [loops[j] for j in holes]))
    return polys


def _make_polygon(shell_pts: list, hole_pts: list[list]) -> PolygonWithHoles:
    shell = Ring(shell_pts)
    if not shell.is_ccw():
        shell = shell.reversed()
    holes = []
    for pts in hole_pts:
        ring = Ring(pts)
        holes.append(ring.reversed() if ring.is_ccw() else ring)
    return PolygonWithHoles(shell, holes)


def _to_shapely(loop: list):
    from shapely.geometry import Polygon as ShapelyPolygon

    return ShapelyPolygon([(float(x), float(y)) for x, y in loop])


def _from_shapely(geom) -> list[PolygonWithHoles]:
    polys = []
    parts = getattr(geom, "geoms", [geom])
    for part in parts:
        if part.is_empty or part.geom_type != "Polygon":
            continue
        shell = list(part.exterior.coords)[:-1]
        holes = [list(ring.coords)[:-1] for ring in part.interiors]
        if len(shell) >= 3:
            polys.append(_make_polygon(shell, [h for h in holes if len(h) >= 3]))
    return polys


def _assemble_xor(loops: list[list]) -> list[PolygonWithHoles]:
    region = None
    for loop in loops:
        poly = _to_shapely(loop)
        region = poly if region is None else region.symmetric_difference(poly)
    if region is None or region.is_empty:
        return []
    return _from_shapely(region)


def _clip_hole(polys: list[PolygonWithHoles], hole_loop: list) -> list[PolygonWithHoles]:
    """Subtract only the within-shell part of a protruding hole."""
    carve = _to_shapely(hole_loop)
    out: list[PolygonWithHoles] = []
    for p in polys:
        shp = _to_shapely(exact_points(p.shell.points))
        for h in p.holes:
            shp = shp.difference(_to_shapely(exact_points(h.points)))
        out.extend(_from_shapely(shp.difference(carve)))
    return out


def repair(p: PolygonWithHoles) -> list[PolygonWithHoles]:
    """Return valid polygons covering the polygon's even-odd region.

    Valid input comes back as ``[p]`` untouched. Self-intersecting rings
    are split at their crossing points; holes outside every shell are
    discarded (logged) and holes that cross the shell are clipped to the
    shell interior (logged). Raises :class:`UnrepairableGeometry` when
    fewer than three non-collinear shell points remain.
    """
    if not validate(p):
        return [p]

    shell_loops = untangle(exact_points(p.shell.points))
    if not shell_loops:
        raise UnrepairableGeometry("shell has no usable area")
    hole_loops = [loop for h in p.holes for loop in untangle(exact_points(h.points))]

    inner: list[list] = []
    protruding: list[list] = []
    for hole in hole_loops:
        if any(_rings_cross(hole, s)[0] for s in shell_loops):
            protruding.append(hole)
            continue
        sample = _safe_interior_sample(hole, shell_loops)
        if sample is None or _parity_in_loops(sample, shell_loops) == 0:
            logger.info("repair: discarding hole outside every shell")
            continue
        inner.append(hole)

    crossing_holes = False
    for i in range(len(inner)):
        for j in range(i + 1, len(inner)):
            if _rings_cross(inner[i], inner[j])[0]:
                crossing_holes = True
                break
        if crossing_holes:
            break

    pool = shell_loops + inner
    if crossing_holes:
        logger.info("repair: holes cross each other; resolving by symmetric difference")
        polys = _assemble_xor(pool)
    else:
        polys = _assemble_parity(pool)

    for hole in protruding:
        logger.info("repair: clipping hole that crosses the shell")
        polys = _clip_hole(polys, hole)
    return polys
