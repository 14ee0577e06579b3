"""Recto/verso registration: extraction, matching, robust fitting, sweep."""

from .extractors import available_extractors, default_extractors, detect_and_describe
from .matching import match_two_nn, ratio_filter
from .ransac import ransac_affine
from .sweep import (DEFAULT_TOLERANCES, format_sweep_table, sweep_alignment,
                    warp)
from .types import (AffineTransform, AlignmentResult, DescriptorSet, Keypoint,
                    MatchPair, SweepCell)

__all__ = [
    "AffineTransform",
    "AlignmentResult",
    "DEFAULT_TOLERANCES",
    "DescriptorSet",
    "Keypoint",
    "MatchPair",
    "SweepCell",
    "available_extractors",
    "default_extractors",
    "detect_and_describe",
    "format_sweep_table",
    "match_two_nn",
    "ransac_affine",
    "ratio_filter",
    "sweep_alignment",
    "warp",
]
