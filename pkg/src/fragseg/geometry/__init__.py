"""Vector geometry: contour extraction, validity, repair, WKT, rasterization."""

from .contours import forest_to_polygons, trace_contours
from .primitives import ContourNode, PolygonWithHoles, Ring, polygon_area
from .raster import rasterize
from .repair import repair, untangle
from .validity import KINDS, Violation, validate
from .wkt import from_wkt, to_wkt, to_wkt_multi

__all__ = [
    "ContourNode",
    "KINDS",
    "PolygonWithHoles",
    "Ring",
    "Violation",
    "forest_to_polygons",
    "from_wkt",
    "polygon_area",
    "rasterize",
    "repair",
    "to_wkt",
    "to_wkt_multi",
    "trace_contours",
    "untangle",
    "validate",
]
