"""fragseg: manuscript-fragment segmentation from recto/verso image sets."""

from .bars import BarSet, BoundingBox, bars_to_mask, load_bar_boxes, mask_out
from .corpus import (DatasetSplit, FragmentImageSet, RasterGray8, RasterHSV,
                     RasterRGB, flip_horizontal, load_image_set, load_set_dir,
                     load_wkt_ground_truth, rgb_to_hsv, to_grayscale)
from .estimator import FragmentSegmenter
from .evaluation import (Confusion, SegMetrics, aggregate, confusion, metrics,
                         report_csv)
from .geometry import (PolygonWithHoles, Ring, Violation, forest_to_polygons,
                       from_wkt, polygon_area, rasterize, repair, to_wkt,
                       trace_contours, validate)
from .maskops import (HsvRange, Mask, StructuringElement, ThresholdParams,
                      backing_mask, dynamic_threshold_value, hsv_in_range,
                      intersect, morph_close, remove_small_components,
                      subtract, threshold_mask, union)
from .pipeline import (PipelineConfig, SegmentationResult, area_filter,
                       emit_outputs, extract_fragment, overlap_filter,
                       segment_fragment)
from .register import (AffineTransform, AlignmentResult, detect_and_describe,
                       match_two_nn, ransac_affine, ratio_filter,
                       sweep_alignment, warp)

__version__ = "0.1.0"
