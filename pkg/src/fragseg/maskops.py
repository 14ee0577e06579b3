"""Binary-mask production and algebra.

Covers dynamic infrared thresholding, HSV backing-substrate masking with
small-component pruning and morphological closing, and the pointwise mask
operations the pipeline combines them with.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import cv2
import numpy as np

from .corpus import DEFAULT_PPI, RasterHSV, RasterRGB, rgb_to_hsv
from .errors import DimensionMismatch

logger = logging.getLogger(__name__)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Mask:
    """Binary raster; True marks foreground."""

    bits: np.ndarray

    def __post_init__(self):
        if self.bits.ndim != 2 or self.bits.dtype != np.bool_:
            raise DimensionMismatch("mask must be a 2-D bool array")
        object.__setattr__(self, "bits", _freeze(self.bits))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def area(self) -> int:
        return int(self.bits.sum())

    @classmethod
    def zeros(cls, width: int, height: int) -> "Mask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def full(cls, width: int, height: int) -> "Mask":
        return cls(np.ones((height, width), dtype=bool))


@dataclass(frozen=True)
class HsvRange:
    """Channel-wise inclusive HSV window for substrate detection."""

    lo: tuple[int, int, int] = (0, 0, 100)
    hi: tuple[int, int, int] = (255, 20, 200)

    def __post_init__(self):
        for a, b in zip(self.lo, self.hi):
            if not (0 <= a <= b <= 255):
                raise ValueError(f"invalid HSV range {self.lo}..{self.hi}")


@dataclass(frozen=True)
class StructuringElement:
    """Discrete filled ellipse on an odd-sized grid.

    The default 21x21 grid realizes a 20x20-pixel extent at the reference
    PPI; symmetric morphology needs a center pixel, hence the odd size.
    """

    width: int = 21
    height: int = 21

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.width % 2 == 0 or self.height % 2 == 0:
            raise ValueError(f"kernel sides must be odd and positive, got {self.width}x{self.height}")

    @classmethod
    def for_ppi(cls, ppi: float, base: int = 21) -> "StructuringElement":
        side = _nearest_odd(base * ppi / DEFAULT_PPI)
        return cls(side, side)

    def kernel(self) -> np.ndarray:
        return cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (self.width, self.height))


def _nearest_odd(x: float) -> int:
    return max(1, 2 * int(round((x - 1) / 2)) + 1)


@dataclass(frozen=True)
class ThresholdParams:
    """Dark-pixel cap and the buffer added on top of the dark mean."""

    dark_cap: int = 50
    buffer: int = 10

    def __post_init__(self):
        if not (0 <= self.dark_cap and 0 <= self.buffer and self.dark_cap + self.buffer <= 255):
            raise ValueError(f"need dark_cap + buffer <= 255, got {self.dark_cap}+{self.buffer}")


class ThresholdValue(NamedTuple):
    value: int
    fallback: bool


def dynamic_threshold_value(img, p: ThresholdParams = ThresholdParams()) -> ThresholdValue:
    """Mean of all pixels darker than ``dark_cap``, plus ``buffer``.

    When nothing is darker than the cap (possible on bar-masked bright
    crops) the value falls back to ``dark_cap + buffer`` and the fallback
    flag is set so the batch log can surface the instance.
    """
    px = img.pixels
    dark = px[px < p.dark_cap]
    if dark.size == 0:
        logger.warning("no pixel below %d; threshold falls back to %d", p.dark_cap, p.dark_cap + p.buffer)
        return ThresholdValue(p.dark_cap + p.buffer, True)
    mean = int(dark.sum(dtype=np.int64)) / dark.size
    return ThresholdValue(int(round(mean)) + p.buffer, False)


def threshold_mask(img, t: int) -> Mask:
    """Foreground where the pixel is strictly brighter than ``t``.

    The computed value is a floor for removing the dark background, so the
    floor itself stays background.
    """
    return Mask(img.pixels > t)


def hsv_in_range(img: RasterHSV, r: HsvRange = HsvRange()) -> Mask:
    """Foreground where every channel sits inside the inclusive window."""
    px = img.pixels
    lo = np.asarray(r.lo, dtype=np.uint8)
    hi = np.asarray(r.hi, dtype=np.uint8)
    return Mask(np.all((px >= lo) & (px <= hi), axis=2))


def remove_small_components(m: Mask, min_area: int) -> Mask:
    """Drop 8-connected foreground components with fewer than ``min_area`` pixels."""
    if min_area < 0:
        raise ValueError("min_area must be >= 0")
    if min_area <= 1:
        return m
    n, labels, stats, _ = cv2.connectedComponentsWithStats(
        m.bits.astype(np.uint8), connectivity=8
    )
    keep = stats[:, cv2.CC_STAT_AREA] >= min_area
    keep[0] = False  # background label
    return Mask(keep[labels])


def morph_close(m: Mask, se: StructuringElement = StructuringElement()) -> Mask:
    """Dilation then erosion with an elliptical kernel.

    The mask is conceptually embedded in an infinite background plane and
    the result cropped back to the canvas; padding by the kernel radius
    reproduces that exactly, which keeps closing extensive (never shrinks)
    and idempotent even at the image border.
    """
    k = se.kernel()
    ry, rx = se.height // 2, se.width // 2
    padded = np.pad(m.bits.astype(np.uint8), ((ry, ry), (rx, rx)), constant_values=0)
    closed = cv2.erode(cv2.dilate(padded, k), k)
    if ry or rx:
        closed = closed[ry:-ry or None, rx:-rx or None]
    return Mask(closed.astype(bool))


def _check_dims(a: Mask, b: Mask):
    if a.bits.shape != b.bits.shape:
        raise DimensionMismatch(f"{a.bits.shape} vs {b.bits.shape}")


def union(a: Mask, b: Mask) -> Mask:
    _check_dims(a, b)
    return Mask(a.bits | b.bits)


def intersect(a: Mask, b: Mask) -> Mask:
    _check_dims(a, b)
    return Mask(a.bits & b.bits)


def subtract(a: Mask, b: Mask) -> Mask:
    _check_dims(a, b)
    return Mask(a.bits & ~b.bits)


def complement(a: Mask) -> Mask:
    return Mask(~a.bits)


def backing_mask(recto_color: RasterRGB, verso_color_aligned: RasterRGB,
                 hsv: HsvRange = HsvRange(),
                 se: StructuringElement = StructuringElement(),
                 min_area: int = 100) -> Mask:
    """Substrate visible on *both* sides.

    Each side is masked by the HSV window, pruned of tiny elements, and
    closed (the substrate weave leaves many small holes); only the
    intersection is returned, since the substrate often covers far more of
    the verso than of the recto.
    """
    if recto_color.pixels.shape != verso_color_aligned.pixels.shape:
        raise DimensionMismatch(
            f"{recto_color.pixels.shape} vs {verso_color_aligned.pixels.shape}"
        )

    def one_side(img: RasterRGB) -> Mask:
        return morph_close(remove_small_components(hsv_in_range(rgb_to_hsv(img), hsv), min_area), se)

    return intersect(one_side(recto_color), one_side(verso_color_aligned))
