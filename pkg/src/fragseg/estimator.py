"""scikit-learn style front end for the segmentation pipeline.

The pipeline is a stateless, parameterized transform, so it maps cleanly
onto the estimator API: ``get_params``/``set_params``/``clone`` work for
parameter sweeps and ``transform`` turns image sets into segmentation
results. Inputs are domain objects rather than numeric matrices, so the
numeric-validation parts of the sklearn contract do not apply.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin

from .bars import BarSet
from .corpus import FragmentImageSet
from .maskops import HsvRange, StructuringElement, ThresholdParams
from .pipeline import PipelineConfig, SegmentationResult, segment_fragment
from .register import DEFAULT_TOLERANCES


class FragmentSegmenter(BaseEstimator, TransformerMixin):
    """Segment fragments out of recto/verso image sets.

    Parameters mirror :class:`~fragseg.pipeline.PipelineConfig`, flattened
    to scalars so they are grid-searchable.
    """

    def __init__(self, dark_cap: int = 50, dark_buffer: int = 10,
                 hsv_lo: tuple = (0, 0, 100), hsv_hi: tuple = (255, 20, 200),
                 closing_size: int = 21, pre_close_min_area: int = 100,
                 final_min_area: float = 1000.0, bar_pad: int = 10,
                 ratio: float = 0.80, tolerances: tuple = DEFAULT_TOLERANCES,
                 extractors: tuple | None = None, min_inliers: int = 10,
                 seed: int = 0, max_features: int = 4000,
                 working_max_side: int = 2400):
        self.dark_cap = dark_cap
        self.dark_buffer = dark_buffer
        self.hsv_lo = hsv_lo
        self.hsv_hi = hsv_hi
        self.closing_size = closing_size
        self.pre_close_min_area = pre_close_min_area
        self.final_min_area = final_min_area
        self.bar_pad = bar_pad
        self.ratio = ratio
        self.tolerances = tolerances
        self.extractors = extractors
        self.min_inliers = min_inliers
        self.seed = seed
        self.max_features = max_features
        self.working_max_side = working_max_side

    def config(self) -> PipelineConfig:
        """Materialize the validated pipeline configuration."""
        return PipelineConfig(
            threshold=ThresholdParams(self.dark_cap, self.dark_buffer),
            hsv=HsvRange(tuple(self.hsv_lo), tuple(self.hsv_hi)),
            closing_se=StructuringElement(self.closing_size, self.closing_size),
            pre_close_min_area=self.pre_close_min_area,
            final_min_area=self.final_min_area,
            bar_pad=self.bar_pad,
            ratio=self.ratio,
            tolerances=tuple(self.tolerances),
            extractors=None if self.extractors is None else tuple(self.extractors),
            min_inliers=self.min_inliers,
            seed=self.seed,
            max_features=self.max_features,
            working_max_side=self.working_max_side,
        )

    def fit(self, X=None, y=None):
        """Stateless; validates the parameters and returns self."""
        self.config()
        return self

    def transform(self, X) -> list[SegmentationResult]:
        """Segment a sequence of image sets.

        Each element may be a :class:`FragmentImageSet` (no bar boxes) or a
        ``(FragmentImageSet, BarSet)`` pair.
        """
        cfg = self.config()
        out = []
        for item in X:
            if isinstance(item, FragmentImageSet):
                image_set, bar_boxes = item, BarSet.empty()
            else:
                image_set, bar_boxes = item
            out.append(segment_fragment(image_set, bar_boxes, cfg))
        return out

    def segment(self, image_set: FragmentImageSet,
                bar_boxes: BarSet | None = None) -> SegmentationResult:
        """Convenience single-set entry point."""
        return segment_fragment(image_set, bar_boxes or BarSet.empty(), self.config())
