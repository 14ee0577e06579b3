"""Polygon rasterization: even-odd fill sampled at pixel centers.

Pixels whose centers fall strictly inside the even-odd region are filled,
and so are pixels whose centers lie exactly on a ring boundary (a traced
rectangle therefore rasterizes back to exactly its source pixels). Interior
parity is computed with vectorized scanline crossings; boundary pixels are
enumerated exactly, so no epsilon appears at either stage.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..maskops import Mask
from .primitives import PolygonWithHoles, exact, exact_points


def _edges_of(rings, origin):
    ox, oy = origin
    xs1, ys1, xs2, ys2 = [], [], [], []
    for ring in rings:
        a = ring.as_array()
        b = np.roll(a, -1, axis=0)
        xs1.append(a[:, 0] - ox)
        ys1.append(a[:, 1] - oy)
        xs2.append(b[:, 0] - ox)
        ys2.append(b[:, 1] - oy)
    return (np.concatenate(xs1), np.concatenate(ys1),
            np.concatenate(xs2), np.concatenate(ys2))


def _fill_parity(bits: np.ndarray, rings, origin) -> None:
    """Set pixels whose centers are interior by even-odd crossing parity."""
    height, width = bits.shape
    x1, y1, x2, y2 = _edges_of(rings, origin)
    keep = y1 != y2
    x1, y1, x2, y2 = x1[keep], y1[keep], x2[keep], y2[keep]
    if x1.size == 0:
        return

    ylo = np.minimum(y1, y2)
    yhi = np.maximum(y1, y2)
    r0 = np.maximum(np.ceil(ylo), 0.0)
    r1 = np.minimum(np.ceil(yhi) - 1.0, height - 1.0)
    cnt = np.maximum(r1 - r0 + 1.0, 0.0).astype(np.int64)
    total = int(cnt.sum())
    if total == 0:
        return

    edge_idx = np.repeat(np.arange(x1.size), cnt)
    first = np.repeat(np.cumsum(cnt) - cnt, cnt)
    rows = (r0[edge_idx] + (np.arange(total) - first)).astype(np.int64)
    slope = (x2 - x1) / (y2 - y1)
    xcross = x1[edge_idx] + (rows - y1[edge_idx]) * slope[edge_idx]

    order = np.lexsort((xcross, rows))
    rows = rows[order]
    xcross = xcross[order]
    run_start = np.zeros(total, dtype=bool)
    run_start[0] = True
    run_start[1:] = rows[1:] != rows[:-1]
    start_pos = np.repeat(np.nonzero(run_start)[0], np.diff(np.append(np.nonzero(run_start)[0], total)))
    ranks = np.arange(total) - start_pos
    # crossing counts per row are even, so enters and exits pair up in order
    enter_x = xcross[ranks % 2 == 0]
    exit_x = xcross[ranks % 2 == 1]
    row = rows[ranks % 2 == 0]

    left = np.ceil(enter_x)
    right = np.floor(exit_x)
    ok = (left <= right) & (right >= 0) & (left <= width - 1)
    left = np.clip(left[ok], 0, width - 1).astype(np.int64)
    right = np.clip(right[ok], 0, width - 1).astype(np.int64)
    row = row[ok]

    acc = np.zeros((height, width + 1), dtype=np.int32)
    np.add.at(acc, (row, left), 1)
    np.add.at(acc, (row, right + 1), -1)
    bits |= np.cumsum(acc, axis=1)[:, :width] > 0


def _draw_boundary(bits: np.ndarray, rings, origin) -> None:
    """Set every pixel whose center lies exactly on a ring edge."""
    height, width = bits.shape
    ox, oy = exact(origin[0]), exact(origin[1])
    for ring in rings:
        pts = [(exact(x - ox), exact(y - oy)) for x, y in exact_points(ring.points)]
        n = len(pts)
        for i in range(n):
            ax, ay = pts[i]
            bx, by = pts[(i + 1) % n]
            if isinstance(ax, int) and isinstance(ay, int) and isinstance(bx, int) and isinstance(by, int):
                _mark_integer_edge(bits, ax, ay, bx, by)
            else:
                _mark_fractional_edge(bits, ax, ay, bx, by)


def _mark_integer_edge(bits, ax, ay, bx, by) -> None:
    height, width = bits.shape
    dx, dy = bx - ax, by - ay
    g = math.gcd(abs(dx), abs(dy))
    if g == 0:
        if 0 <= ax < width and 0 <= ay < height:
            bits[ay, ax] = True
        return
    sx, sy = dx // g, dy // g
    for j in range(g + 1):
        x, y = ax + sx * j, ay + sy * j
        if 0 <= x < width and 0 <= y < height:
            bits[y, x] = True


def _mark_fractional_edge(bits, ax, ay, bx, by) -> None:
    """Lattice points on a segment with rational endpoints, found exactly."""
    height, width = bits.shape

    def mark(x: int, y: int):
        if 0 <= x < width and 0 <= y < height:
            bits[y, x] = True

    if ax == bx:
        if isinstance(ax, int):
            lo = math.ceil(min(ay, by))
            hi = math.floor(max(ay, by))
            for y in range(lo, hi + 1):
                mark(ax, y)
        return
    lo = math.ceil(min(ax, bx))
    hi = math.floor(max(ax, bx))
    for x in range(lo, hi + 1):
        y = Fraction(x - ax) * Fraction(by - ay) / Fraction(bx - ax) + Fraction(ay)
        if y.denominator == 1:
            mark(x, int(y))


def rasterize(polys, width: int, height: int, origin=(0, 0)) -> Mask:
    """Rasterize one polygon or a list; a list is the union of its members.

    ``origin`` shifts the canvas so windows (for example a polygon's
    bounding box) can be rasterized without allocating the whole image.
    """
    if isinstance(polys, PolygonWithHoles):
        polys = [polys]
    bits = np.zeros((height, width), dtype=bool)
    for p in polys:
        rings = p.rings()
        _fill_parity(bits, rings, origin)
        _draw_boundary(bits, rings, origin)
    return Mask(bits)
