"""Mask-to-polygon conversion via border following.

Contour coordinates are the pixel centers of boundary pixels, so rings from
tracing have integral coordinates. Foreground is 8-connected, enclosed
background 4-connected, matching the border-following convention.
"""

from __future__ import annotations

import logging

import cv2
import numpy as np

from ..errors import DegenerateRing
from ..maskops import Mask
from .primitives import ContourNode, PolygonWithHoles, Ring

logger = logging.getLogger(__name__)


def trace_contours(m: Mask) -> list[ContourNode]:
    """Trace the border forest of a mask.

    Every foreground component of three or more boundary pixels contributes
    one even-depth outer contour; enclosed background regions contribute
    odd-depth contours. One- and two-pixel components cannot form a ring
    and are skipped (they are far below any useful area filter anyway).
    """
    raw, hierarchy = cv2.findContours(
        m.bits.astype(np.uint8), cv2.RETR_TREE, cv2.CHAIN_APPROX_NONE
    )
    if not raw:
        return []
    hierarchy = hierarchy[0]

    depths = [0] * len(raw)
    for i in range(len(raw)):
        parent = hierarchy[i][3]
        depths[i] = 0 if parent < 0 else depths[parent] + 1

    nodes: list[ContourNode | None] = [None] * len(raw)
    roots: list[ContourNode] = []
    for i, contour in enumerate(raw):
        pts = [(int(x), int(y)) for x, y in contour[:, 0, :]]
        k = min(range(len(pts)), key=lambda j: (pts[j][1], pts[j][0]))
        pts = pts[k:] + pts[:k]  # canonical start: topmost, then leftmost
        try:
            ring = Ring(pts)
        except DegenerateRing:
            logger.debug("skipping %d-point contour at depth %d", len(pts), depths[i])
            continue
        nodes[i] = ContourNode(ring=ring, depth=depths[i])

    for i, node in enumerate(nodes):
        if node is None:
            continue
        parent = hierarchy[i][3]
        while parent >= 0 and nodes[parent] is None:
            parent = hierarchy[parent][3]
        if parent < 0:
            roots.append(node)
        else:
            nodes[parent].children.append(node)
    return roots


def forest_to_polygons(forest: list[ContourNode]) -> list[PolygonWithHoles]:
    """Turn the contour forest into polygons with holes.

    Even-depth rings become shells whose odd-depth children are their holes;
    even-depth grandchildren (islands inside holes) start new polygons.
    Orientations are normalized: shells counter-clockwise, holes clockwise.
    """
    polys: list[PolygonWithHoles] = []

    def visit(node: ContourNode):
        shell = node.ring if node.ring.is_ccw() else node.ring.reversed()
        holes = []
        for hole_node in node.children:
            ring = hole_node.ring
            holes.append(ring.reversed() if ring.is_ccw() else ring)
            for island in hole_node.children:
                visit(island)
        polys.append(PolygonWithHoles(shell, holes))

    for root in forest:
        visit(root)
    return polys
