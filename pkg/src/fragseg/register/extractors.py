"""Feature extractor registry.

``fastbrief`` is a self-contained oriented-FAST detector with a rotated
256-bit binary descriptor compared under Hamming distance; it is always
available. SIFT-, KAZE- and AKAZE-style extractors are registered as
plugins when OpenCV provides them, and SIFT heads the default list because
it wins the inlier sweep on manuscript imagery.
"""

from __future__ import annotations

import numpy as np

from ..corpus import RasterGray8
from ..errors import UnknownExtractor
from .types import DescriptorSet, Keypoint

_PATCH_RADIUS = 15
_PAIR_CLIP = 13
_BORDER = 22  # rotated pair offsets reach sqrt(2)*13 ~ 18.4, plus blur margin
_ORIENTATION_BINS = 32

# Bresenham circle of radius 3, clockwise from 12 o'clock: (dx, dy)
_CIRCLE = np.array([
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
], dtype=np.int32)


def _brief_pattern() -> np.ndarray:
    """Fixed 256-pair sampling pattern, Gaussian around the patch center."""
    rng = np.random.default_rng(0x5EED)
    pattern = rng.normal(0.0, _PATCH_RADIUS / 2.4, size=(256, 4))
    return np.clip(np.rint(pattern), -_PAIR_CLIP, _PAIR_CLIP).astype(np.int32)


_PATTERN = _brief_pattern()

_DISK = np.array(
    [(dx, dy)
     for dy in range(-_PATCH_RADIUS, _PATCH_RADIUS + 1)
     for dx in range(-_PATCH_RADIUS, _PATCH_RADIUS + 1)
     if dx * dx + dy * dy <= _PATCH_RADIUS * _PATCH_RADIUS],
    dtype=np.int32,
)

_POPCOUNT = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1).sum(1).astype(np.uint8)


def _rotated_patterns() -> np.ndarray:
    """Pattern offsets pre-rotated for each quantized orientation bin."""
    out = np.empty((_ORIENTATION_BINS, 256, 4), dtype=np.int32)
    for b in range(_ORIENTATION_BINS):
        theta = 2.0 * np.pi * b / _ORIENTATION_BINS
        c, s = np.cos(theta), np.sin(theta)
        for k, (x_col, y_col) in enumerate(((0, 1), (2, 3))):
            xs = _PATTERN[:, x_col]
            ys = _PATTERN[:, y_col]
            out[b, :, x_col] = np.rint(c * xs - s * ys)
            out[b, :, y_col] = np.rint(s * xs + c * ys)
    return out


_ROTATED = _rotated_patterns()


def _fast_corners(img: np.ndarray, threshold: int) -> np.ndarray:
    """FAST-9 response map; zero everywhere except at segment-test corners.

    The response is the total contrast margin over all sixteen circle
    pixels, which makes non-max suppression deterministic.
    """
    import cv2

    h, w = img.shape
    pad = np.pad(img.astype(np.int16), 3, mode="constant", constant_values=0)
    center = pad[3:3 + h, 3:3 + w]

    bright = np.zeros((h, w), dtype=np.uint32)
    dark = np.zeros((h, w), dtype=np.uint32)
    score = np.zeros((h, w), dtype=np.int32)
    for i, (dx, dy) in enumerate(_CIRCLE):
        ring = pad[3 + dy:3 + dy + h, 3 + dx:3 + dx + w]
        diff = ring - center
        bright |= (diff > threshold).astype(np.uint32) << np.uint32(i)
        dark |= (diff < -threshold).astype(np.uint32) << np.uint32(i)
        score += np.maximum(np.abs(diff) - threshold, 0)

    def has_run9(bits: np.ndarray) -> np.ndarray:
        x = bits | (bits << np.uint32(16))
        for _ in range(8):
            x &= x >> np.uint32(1)
        return (x & np.uint32(0xFFFF)) != 0

    corner = has_run9(bright) | has_run9(dark)
    response = np.where(corner, score, 0).astype(np.float32)

    # 3x3 non-max suppression (ties keep the whole plateau)
    local_max = cv2.dilate(response, np.ones((3, 3), np.uint8))
    response[response < local_max] = 0.0
    return response


def _orientations(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Intensity-centroid angle of the circular patch around each corner."""
    vals = img[ys[:, None] + _DISK[None, :, 1], xs[:, None] + _DISK[None, :, 0]].astype(np.float32)
    m10 = vals @ _DISK[:, 0].astype(np.float32)
    m01 = vals @ _DISK[:, 1].astype(np.float32)
    return np.arctan2(m01, m10)


def _describe(smoothed: np.ndarray, xs, ys, thetas) -> np.ndarray:
    bins = np.rint(thetas / (2.0 * np.pi) * _ORIENTATION_BINS).astype(np.int64) % _ORIENTATION_BINS
    n = xs.shape[0]
    bits = np.zeros((n, 256), dtype=np.uint8)
    for b in np.unique(bins):
        sel = bins == b
        pat = _ROTATED[b]
        ax = xs[sel, None] + pat[None, :, 0]
        ay = ys[sel, None] + pat[None, :, 1]
        bx = xs[sel, None] + pat[None, :, 2]
        by = ys[sel, None] + pat[None, :, 3]
        bits[sel] = smoothed[ay, ax] < smoothed[by, bx]
    return np.packbits(bits, axis=1)


def _fastbrief(gray: np.ndarray, max_features: int, threshold: int = 20):
    import cv2

    h, w = gray.shape
    if h <= 2 * _BORDER or w <= 2 * _BORDER:
        return [], np.zeros((0, 32), dtype=np.uint8)
    response = _fast_corners(gray, threshold)
    response[:_BORDER, :] = 0
    response[-_BORDER:, :] = 0
    response[:, :_BORDER] = 0
    response[:, -_BORDER:] = 0

    ys, xs = np.nonzero(response)
    if xs.size == 0:
        return [], np.zeros((0, 32), dtype=np.uint8)
    resp = response[ys, xs]
    order = np.lexsort((xs, ys, -resp))[:max_features]
    xs, ys, resp = xs[order], ys[order], resp[order]

    thetas = _orientations(gray, xs, ys)
    smoothed = cv2.blur(gray, (5, 5))
    desc = _describe(smoothed, xs, ys, thetas)
    kps = [
        Keypoint(float(x), float(y), 1.0, float(t), float(r))
        for x, y, t, r in zip(xs, ys, thetas, resp)
    ]
    return kps, desc


def _from_cv2(kps_cv, desc, max_features: int):
    import numpy as np

    if desc is None or len(kps_cv) == 0:
        return [], None
    order = sorted(
        range(len(kps_cv)),
        key=lambda i: (-kps_cv[i].response, kps_cv[i].pt[1], kps_cv[i].pt[0], kps_cv[i].size),
    )[:max_features]
    kps = [
        Keypoint(
            float(kps_cv[i].pt[0]), float(kps_cv[i].pt[1]),
            float(kps_cv[i].size), float(np.deg2rad(kps_cv[i].angle)) if kps_cv[i].angle >= 0 else 0.0,
            float(kps_cv[i].response),
        )
        for i in order
    ]
    return kps, desc[order]


def _make_cv2_extractor(factory, metric: str):
    def run(gray: np.ndarray, max_features: int):
        algo = factory(max_features)
        kps_cv, desc = algo.detectAndCompute(gray, None)
        kps, desc = _from_cv2(kps_cv, desc, max_features)
        if not kps:
            width = 128 if metric == "L2" else 32
            dtype = np.float32 if metric == "L2" else np.uint8
            return [], np.zeros((0, width), dtype=dtype)
        return kps, desc

    return run


def _build_registry() -> dict:
    registry = {"fastbrief": ("Hamming", _fastbrief)}
    try:
        import cv2
    except ImportError:  # pragma: no cover - cv2 is a hard dependency elsewhere
        return registry
    if hasattr(cv2, "SIFT_create"):
        registry["sift"] = ("L2", _make_cv2_extractor(lambda n: cv2.SIFT_create(nfeatures=n), "L2"))
    if hasattr(cv2, "KAZE_create"):
        registry["kaze"] = ("L2", _make_cv2_extractor(lambda n: cv2.KAZE_create(), "L2"))
    if hasattr(cv2, "AKAZE_create"):
        registry["akaze"] = ("Hamming", _make_cv2_extractor(lambda n: cv2.AKAZE_create(), "Hamming"))
    return registry


_REGISTRY = _build_registry()

_PREFERRED_ORDER = ("sift", "kaze", "akaze", "fastbrief")


def available_extractors() -> list[str]:
    return [name for name in _PREFERRED_ORDER if name in _REGISTRY]


def default_extractors() -> list[str]:
    """Sweep order: SIFT first when present (the known sweep winner)."""
    return available_extractors()


def detect_and_describe(img: RasterGray8, extractor: str,
                        max_features: int = 4000) -> tuple[list[Keypoint], DescriptorSet]:
    """Run one registered extractor; deterministic for a fixed input."""
    if extractor not in _REGISTRY:
        raise UnknownExtractor(extractor)
    if max_features < 1:
        raise ValueError("max_features must be positive")
    metric, fn = _REGISTRY[extractor]
    kps, desc = fn(np.asarray(img.pixels), max_features)
    return kps, DescriptorSet(desc, metric)
