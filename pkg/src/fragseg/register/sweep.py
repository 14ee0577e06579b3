"""Extractor/tolerance sweep for recto-to-verso alignment, plus warping.

The caller flips the verso beforehand; the sweep detects and matches once
per extractor, runs the robust fit once per (extractor, tolerance), and
returns the combination with the most inliers. Ties prefer the smaller
tolerance, then the earlier extractor in the list.
"""

from __future__ import annotations

import logging

import cv2
import numpy as np

from ..corpus import RasterGray8
from ..errors import (AlignmentFailed, DegenerateInput, SingularTransform,
                      TooFewMatches)
from ..maskops import Mask
from .extractors import default_extractors, detect_and_describe
from .matching import match_two_nn, ratio_filter
from .ransac import ransac_affine
from .types import AffineTransform, AlignmentResult, SweepCell

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCES = tuple(range(21, 4, -2))  # 21, 19, ..., 5
WORKING_MAX_SIDE = 2400
# accepted alignments must stay within a sane scale change
_DET_BOUNDS = (0.5, 2.0)


def _working_scale(img: RasterGray8, max_side: int) -> float:
    longest = max(img.width, img.height)
    return 1.0 if longest <= max_side else max_side / float(longest)


def _downscale(img: RasterGray8, scale: float) -> RasterGray8:
    if scale >= 1.0:
        return img
    w = max(1, int(round(img.width * scale)))
    h = max(1, int(round(img.height * scale)))
    return RasterGray8(cv2.resize(img.pixels, (w, h), interpolation=cv2.INTER_AREA))


def sweep_alignment(recto_ir: RasterGray8, verso_ir_flipped: RasterGray8,
                    extractors: list[str] | None = None,
                    tolerances=DEFAULT_TOLERANCES,
                    seed: int = 0,
                    ratio: float = 0.80,
                    min_inliers: int = 10,
                    max_features: int = 4000,
                    working_max_side: int = WORKING_MAX_SIDE) -> AlignmentResult:
    """Best affine alignment of the flipped verso onto the recto.

    Raises :class:`AlignmentFailed` when no combination reaches
    ``min_inliers`` (or none passes the determinant sanity bound).
    """
    names = list(extractors) if extractors else default_extractors()
    tolerances = tuple(int(t) for t in tolerances)
    if not names or not tolerances:
        raise ValueError("need at least one extractor and one tolerance")

    scale_r = _working_scale(recto_ir, working_max_side)
    scale_v = _working_scale(verso_ir_flipped, working_max_side)
    work_r = _downscale(recto_ir, scale_r)
    work_v = _downscale(verso_ir_flipped, scale_v)

    cells: list[SweepCell] = []
    best_key = None
    best = None  # (cell, transform, extractor_index)

    for ext_index, name in enumerate(names):
        kps_a, desc_a = detect_and_describe(work_r, name, max_features)
        kps_b, desc_b = detect_and_describe(work_v, name, max_features)
        kept = []
        if kps_a and kps_b:
            kept = ratio_filter(match_two_nn(desc_a, desc_b), ratio)
        if len(kept) < 3:
            logger.debug("%s: only %d ratio-test matches", name, len(kept))
            cells.extend(SweepCell(name, t, 0, len(kept), False) for t in tolerances)
            continue
        # matching queries recto against verso, but the reported transform
        # maps flipped-verso coordinates into the recto frame
        verso_pts = np.array([(kps_b[m.index_b].x, kps_b[m.index_b].y) for m in kept])
        recto_pts = np.array([(kps_a[m.index_a].x, kps_a[m.index_a].y) for m in kept])

        for tol in tolerances:
            try:
                transform, flags = ransac_affine(verso_pts, recto_pts, tol, seed)
            except (DegenerateInput, TooFewMatches):
                cells.append(SweepCell(name, tol, 0, len(kept), False))
                continue
            inliers = int(flags.sum())
            eligible = _DET_BOUNDS[0] <= abs(transform.det) <= _DET_BOUNDS[1]
            cells.append(SweepCell(name, tol, inliers, len(kept), eligible))
            if eligible:
                key = (-inliers, tol, ext_index)
                if best_key is None or key < best_key:
                    best_key = key
                    best = (cells[-1], transform)

    if best is None or best[0].inliers < min_inliers:
        got = 0 if best is None else best[0].inliers
        raise AlignmentFailed(f"best combination has {got} inliers (< {min_inliers})")

    cell, transform = best
    full = _conjugate_scales(transform, scale_v, scale_r)
    return AlignmentResult(
        transform=full,
        inlier_count=cell.inliers,
        extractor=cell.extractor,
        tolerance=cell.tolerance,
        total_matches=cell.total_matches,
        cells=tuple(cells),
    )


def _conjugate_scales(t: AffineTransform, scale_src: float, scale_dst: float) -> AffineTransform:
    """Lift a working-resolution transform back to full resolution."""
    if scale_src == 1.0 and scale_dst == 1.0:
        return t
    m = t.matrix.copy()
    m[:, :2] *= scale_src / scale_dst
    m[:, 2] /= scale_dst
    return AffineTransform(m)


def format_sweep_table(cells) -> str:
    """Fixed-width inlier table, one row per extractor, one column per tolerance."""
    tolerances = sorted({c.tolerance for c in cells}, reverse=True)
    names = list(dict.fromkeys(c.extractor for c in cells))
    by_combo = {(c.extractor, c.tolerance): c for c in cells}
    header = "extractor " + " ".join(f"{t:>6d}" for t in tolerances)
    lines = [header]
    for name in names:
        row = [f"{name:<9s}"]
        for t in tolerances:
            cell = by_combo.get((name, t))
            row.append(f"{cell.inliers if cell else 0:>6d}")
        lines.append(" ".join(row))
    return "\n".join(lines)


def warp(src, t: AffineTransform, out_dims: tuple[int, int]):
    """Resample into the target frame: bilinear for intensity rasters,
    nearest-neighbor for masks; samples beyond the source are background."""
    if abs(t.det) < 1e-12:
        raise SingularTransform(f"determinant {t.det}")
    out_w, out_h = out_dims
    if isinstance(src, Mask):
        warped = cv2.warpAffine(
            src.bits.astype(np.uint8), t.matrix, (out_w, out_h),
            flags=cv2.INTER_NEAREST, borderMode=cv2.BORDER_CONSTANT, borderValue=0,
        )
        return Mask(warped.astype(bool))
    warped = cv2.warpAffine(
        src.pixels, t.matrix, (out_w, out_h),
        flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_CONSTANT, borderValue=0,
    )
    return type(src)(warped)
