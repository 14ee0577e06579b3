"""End-to-end segmentation of one image set, batch driving, and output files.

The per-set procedure runs the nine steps in order: bar masking, flipped
verso alignment, dynamic thresholding of both IR images, union into the
maximal fragment mask, backing-substrate masking on the color pair,
subtraction, contour extraction with repair, the recto/verso overlap
filter, and the final area filter.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import bars as bars_mod
from .bars import BarSet, bars_to_mask, mask_out
from .corpus import (DEFAULT_PPI, FragmentImageSet, flip_horizontal,
                     load_set_dir)
from .errors import FragsegError, OutOfBounds
from .geometry import (PolygonWithHoles, forest_to_polygons, polygon_area,
                       rasterize, repair, to_wkt, trace_contours)
from .maskops import (HsvRange, Mask, StructuringElement, ThresholdParams,
                      _nearest_odd, backing_mask, dynamic_threshold_value,
                      subtract, threshold_mask, union)
from .register import (AffineTransform, AlignmentResult, DEFAULT_TOLERANCES,
                       sweep_alignment, warp)

logger = logging.getLogger(__name__)

FLAG_THRESHOLD_FALLBACK = "threshold_fallback"
FLAG_LOW_INLIERS = "low_inliers"
FLAG_EMPTY_OUTPUT = "empty_output"
FLAG_REPAIR_APPLIED = "repair_applied"


@dataclass(frozen=True)
class PipelineConfig:
    """All tunables, expressed at the reference density (1215 PPI).

    Pixel-denominated values are rescaled per image set: lengths by
    ``ppi/1215`` and areas by its square.
    """

    threshold: ThresholdParams = ThresholdParams()
    hsv: HsvRange = HsvRange()
    closing_se: StructuringElement = StructuringElement()
    pre_close_min_area: int = 100
    final_min_area: float = 1000.0
    bar_pad: int = 10
    ratio: float = 0.80
    tolerances: tuple[int, ...] = DEFAULT_TOLERANCES
    extractors: tuple[str, ...] | None = None
    min_inliers: int = 10
    seed: int = 0
    max_features: int = 4000
    working_max_side: int = 2400
    # 0.0 keeps the literal ">= 1 pixel on both sides" overlap rule; raise
    # it to demand that fraction of the polygon's raster instead
    overlap_fraction: float = 0.0

    @classmethod
    def from_json(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        kwargs = {}
        if "threshold" in raw:
            kwargs["threshold"] = ThresholdParams(**raw["threshold"])
        if "hsv" in raw:
            kwargs["hsv"] = HsvRange(tuple(raw["hsv"]["lo"]), tuple(raw["hsv"]["hi"]))
        if "closing_se" in raw:
            kwargs["closing_se"] = StructuringElement(**raw["closing_se"])
        for name in ("pre_close_min_area", "final_min_area", "bar_pad", "ratio",
                     "min_inliers", "seed", "max_features", "working_max_side",
                     "overlap_fraction"):
            if name in raw:
                kwargs[name] = raw[name]
        if "tolerances" in raw:
            kwargs["tolerances"] = tuple(int(t) for t in raw["tolerances"])
        if "extractors" in raw and raw["extractors"] is not None:
            kwargs["extractors"] = tuple(raw["extractors"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "threshold": {"dark_cap": self.threshold.dark_cap, "buffer": self.threshold.buffer},
            "hsv": {"lo": list(self.hsv.lo), "hi": list(self.hsv.hi)},
            "closing_se": {"width": self.closing_se.width, "height": self.closing_se.height},
            "pre_close_min_area": self.pre_close_min_area,
            "final_min_area": self.final_min_area,
            "bar_pad": self.bar_pad,
            "ratio": self.ratio,
            "tolerances": list(self.tolerances),
            "extractors": None if self.extractors is None else list(self.extractors),
            "min_inliers": self.min_inliers,
            "seed": self.seed,
            "max_features": self.max_features,
            "working_max_side": self.working_max_side,
            "overlap_fraction": self.overlap_fraction,
        }


@dataclass(frozen=True)
class SegmentationResult:
    """Final polygons in the recto frame plus provenance for the batch log."""

    polygons: tuple[PolygonWithHoles, ...]
    transform: AffineTransform
    flags: tuple[str, ...]
    alignment: AlignmentResult
    thresholds: tuple[int, int]
    masks: dict[str, Mask] | None = None


def _scaled(cfg: PipelineConfig, ppi: float):
    s = ppi / DEFAULT_PPI
    se = StructuringElement(
        _nearest_odd(cfg.closing_se.width * s), _nearest_odd(cfg.closing_se.height * s)
    )
    return {
        "bar_pad": max(0, int(round(cfg.bar_pad * s))),
        "se": se,
        "pre_close_min_area": max(0, int(round(cfg.pre_close_min_area * s * s))),
        "final_min_area": cfg.final_min_area * s * s,
    }


def segment_fragment(image_set: FragmentImageSet, bar_boxes: BarSet,
                     cfg: PipelineConfig = PipelineConfig(),
                     keep_masks: bool = False) -> SegmentationResult:
    """Run the nine pipeline steps on one image set.

    An empty polygon list is not an error (it is flagged); a failed
    alignment propagates as :class:`AlignmentFailed`.
    """
    flags: list[str] = []
    eff = _scaled(cfg, image_set.ppi)
    rw, rh = image_set.recto_color.width, image_set.recto_color.height
    vw, vh = image_set.verso_color.width, image_set.verso_color.height

    # 1. isolate calibration bars and label on both sides
    recto_bar = bars_to_mask(bar_boxes.recto, rw, rh, eff["bar_pad"])
    verso_bar = bars_to_mask(bar_boxes.verso, vw, vh, eff["bar_pad"])
    recto_ir = mask_out(image_set.recto_ir, recto_bar)
    recto_color = mask_out(image_set.recto_color, recto_bar)
    verso_ir = mask_out(image_set.verso_ir, verso_bar)
    verso_color = mask_out(image_set.verso_color, verso_bar)

    # 2. align recto with the horizontally flipped verso (IR pair)
    verso_ir_flipped = flip_horizontal(verso_ir)
    alignment = sweep_alignment(
        recto_ir, verso_ir_flipped,
        extractors=list(cfg.extractors) if cfg.extractors else None,
        tolerances=cfg.tolerances, seed=cfg.seed, ratio=cfg.ratio,
        min_inliers=cfg.min_inliers, max_features=cfg.max_features,
        working_max_side=cfg.working_max_side,
    )
    if alignment.inlier_count < 2 * cfg.min_inliers:
        flags.append(FLAG_LOW_INLIERS)

    # 3. dynamic threshold both IR images; bring the verso mask to the recto frame
    t_recto = dynamic_threshold_value(recto_ir, cfg.threshold)
    t_verso = dynamic_threshold_value(verso_ir_flipped, cfg.threshold)
    if t_recto.fallback or t_verso.fallback:
        flags.append(FLAG_THRESHOLD_FALLBACK)
    recto_mask = threshold_mask(recto_ir, t_recto.value)
    verso_mask = warp(threshold_mask(verso_ir_flipped, t_verso.value),
                      alignment.transform, (rw, rh))

    # 4. union into the maximal fragment mask
    fragment_mask = union(recto_mask, verso_mask)

    # 5. backing substrate from the color pair (verso flipped + aligned)
    verso_color_aligned = warp(flip_horizontal(verso_color), alignment.transform, (rw, rh))
    backing = backing_mask(recto_color, verso_color_aligned,
                           hsv=cfg.hsv, se=eff["se"],
                           min_area=eff["pre_close_min_area"])

    # 6. remove the backing substrate
    final_mask = subtract(fragment_mask, backing)

    # 7. contours -> polygons with holes -> repair
    polygons: list[PolygonWithHoles] = []
    repaired = False
    for poly in forest_to_polygons(trace_contours(final_mask)):
        x0, y0, x1, y1 = poly.bounds()
        if (x1 - x0 + 1) * (y1 - y0 + 1) < eff["final_min_area"]:
            # the bounding box caps every repaired piece's area, so nothing
            # this small can survive step 9; skipping repair here only
            # saves work, it cannot change the output
            continue
        fixed = repair(poly)
        if fixed != [poly]:
            repaired = True
        polygons.extend(fixed)
    if repaired:
        flags.append(FLAG_REPAIR_APPLIED)

    # 8. keep polygons that overlap features on both sides
    polygons = overlap_filter(polygons, recto_mask, verso_mask,
                              min_fraction=cfg.overlap_fraction)

    # 9. drop the very tiny remains
    polygons = area_filter(polygons, eff["final_min_area"])

    polygons.sort(key=polygon_area, reverse=True)
    if not polygons:
        flags.append(FLAG_EMPTY_OUTPUT)

    masks = None
    if keep_masks:
        masks = {
            "recto_threshold": recto_mask,
            "verso_threshold_aligned": verso_mask,
            "fragment": fragment_mask,
            "backing": backing,
            "final": final_mask,
        }
    return SegmentationResult(
        polygons=tuple(polygons),
        transform=alignment.transform,
        flags=tuple(flags),
        alignment=alignment,
        thresholds=(t_recto.value, t_verso.value),
        masks=masks,
    )


def _window(poly: PolygonWithHoles, width: int, height: int):
    x0, y0, x1, y1 = poly.bounds()
    wx0 = max(0, math.floor(x0))
    wy0 = max(0, math.floor(y0))
    wx1 = min(width - 1, math.ceil(x1))
    wy1 = min(height - 1, math.ceil(y1))
    if wx0 > wx1 or wy0 > wy1:
        return None
    return wx0, wy0, wx1, wy1


def overlap_filter(polys: list[PolygonWithHoles], recto_mask: Mask,
                   verso_mask_aligned: Mask,
                   min_fraction: float = 0.0) -> list[PolygonWithHoles]:
    """Keep polygons whose raster touches foreground in both threshold masks.

    Small features attached to only one side (hinges, tape) occur at
    different places in the two frames and are dropped here. The default
    demands a single shared pixel per side; ``min_fraction`` tightens that
    to a share of the polygon's raster area.
    """
    out = []
    h, w = recto_mask.bits.shape
    for poly in polys:
        win = _window(poly, w, h)
        if win is None:
            continue
        x0, y0, x1, y1 = win
        patch = rasterize(poly, x1 - x0 + 1, y1 - y0 + 1, origin=(x0, y0)).bits
        r = recto_mask.bits[y0:y1 + 1, x0:x1 + 1]
        v = verso_mask_aligned.bits[y0:y1 + 1, x0:x1 + 1]
        need = max(1, math.ceil(min_fraction * int(patch.sum())))
        if int((patch & r).sum()) >= need and int((patch & v).sum()) >= need:
            out.append(poly)
    return out


def area_filter(polys: list[PolygonWithHoles], min_area: float) -> list[PolygonWithHoles]:
    """Drop polygons strictly smaller than ``min_area`` squared pixels."""
    if min_area < 0:
        raise ValueError("min_area must be >= 0")
    return [p for p in polys if polygon_area(p) >= min_area]


def extract_fragment(img, poly: PolygonWithHoles):
    """Crop to the polygon's bounding box; pixels outside the polygon go to 0."""
    px = img.pixels
    h, w = px.shape[:2]
    x0, y0, x1, y1 = poly.bounds()
    if x0 < 0 or y0 < 0 or math.ceil(x1) >= w or math.ceil(y1) >= h:
        raise OutOfBounds(f"polygon bounds ({x0}, {y0})..({x1}, {y1}) exceed {w}x{h}")
    wx0, wy0 = math.floor(x0), math.floor(y0)
    wx1, wy1 = math.ceil(x1), math.ceil(y1)
    inside = rasterize(poly, wx1 - wx0 + 1, wy1 - wy0 + 1, origin=(wx0, wy0)).bits
    crop = px[wy0:wy1 + 1, wx0:wx1 + 1].copy()
    crop[~inside] = 0
    return type(img)(crop)


def emit_outputs(result: SegmentationResult, image_set: FragmentImageSet,
                 out_dir: str | Path) -> dict:
    """Write WKT, extracted fragments, overlay, alignment JSON and log.json."""
    from PIL import Image, ImageDraw

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sid = image_set.set_id
    manifest: dict = {"wkt": [], "extracted": []}

    for k, poly in enumerate(result.polygons, start=1):
        wkt_path = out_dir / f"{sid}_{k}.wkt"
        wkt_path.write_text(to_wkt(poly) + "\n", encoding="ascii")
        manifest["wkt"].append(str(wkt_path))

        png_path = out_dir / f"{sid}_{k}.png"
        x0, y0, x1, y1 = poly.bounds()
        wx0, wy0 = max(0, math.floor(x0)), max(0, math.floor(y0))
        wx1 = min(image_set.recto_color.width - 1, math.ceil(x1))
        wy1 = min(image_set.recto_color.height - 1, math.ceil(y1))
        inside = rasterize(poly, wx1 - wx0 + 1, wy1 - wy0 + 1, origin=(wx0, wy0)).bits
        crop = image_set.recto_color.pixels[wy0:wy1 + 1, wx0:wx1 + 1]
        rgba = np.dstack([crop, np.where(inside, 255, 0).astype(np.uint8)])
        Image.fromarray(rgba, "RGBA").save(png_path)
        manifest["extracted"].append(str(png_path))

    overlay = Image.fromarray(np.array(image_set.recto_color.pixels), "RGB")
    draw = ImageDraw.Draw(overlay)
    for poly in result.polygons:
        shell = [(float(x), float(y)) for x, y in poly.shell.points]
        draw.polygon(shell, outline=(0, 255, 0), width=3)
        for hole in poly.holes:
            draw.polygon([(float(x), float(y)) for x, y in hole.points],
                         outline=(255, 0, 0), width=2)
    overlay_path = out_dir / f"{sid}_overlay.png"
    overlay.save(overlay_path)
    manifest["overlay"] = str(overlay_path)

    align_path = out_dir / f"{sid}_alignment.json"
    align_path.write_text(json.dumps({
        "matrix": [list(map(float, row)) for row in result.transform.matrix],
        "inliers": result.alignment.inlier_count,
        "extractor": result.alignment.extractor,
        "tolerance": result.alignment.tolerance,
    }), encoding="utf-8")
    manifest["alignment"] = str(align_path)

    log_path = out_dir / "log.json"
    log_path.write_text(json.dumps({
        "set": sid,
        "flags": list(result.flags),
        "polygons": len(result.polygons),
        "areas": [polygon_area(p) for p in result.polygons],
        "thresholds": {"recto": result.thresholds[0], "verso": result.thresholds[1]},
        "inliers": result.alignment.inlier_count,
        "extractor": result.alignment.extractor,
        "tolerance": result.alignment.tolerance,
    }, indent=2), encoding="utf-8")
    manifest["log"] = str(log_path)
    return manifest


def seed_for_set(seed: int, set_id: str) -> int:
    """Deterministic per-set seed, stable across processes and runs."""
    digest = hashlib.sha256(f"{seed}:{set_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big") % (2 ** 63)


def _boxes_for(boxes_dir: Path | None, sid: str) -> BarSet:
    if boxes_dir is None:
        return BarSet.empty()
    path = Path(boxes_dir) / f"{sid}.json"
    if not path.exists():
        logger.warning("%s: no bar boxes at %s; assuming none", sid, path)
        return BarSet.empty()
    return bars_mod.load_bar_boxes(path)


def process_set(root: str | Path, boxes_dir: str | Path | None, out_root: str | Path,
                sid: str, cfg: PipelineConfig, ppi: float | None = None) -> dict:
    """Segment one set and write its outputs under ``<out_root>/<sid>/``."""
    image_set = load_set_dir(Path(root) / sid, ppi=ppi)
    bar_boxes = _boxes_for(None if boxes_dir is None else Path(boxes_dir), sid)
    per_set_cfg = replace(cfg, seed=seed_for_set(cfg.seed, sid))
    result = segment_fragment(image_set, bar_boxes, per_set_cfg)
    manifest = emit_outputs(result, image_set, Path(out_root) / sid)
    manifest["set"] = sid
    manifest["flags"] = list(result.flags)
    return manifest


def _process_one(args) -> tuple[str, dict | None, str | None]:
    root, boxes_dir, out_root, sid, cfg_dict, ppi = args
    cfg = PipelineConfig.from_dict(cfg_dict)
    try:
        return sid, process_set(root, boxes_dir, out_root, sid, cfg, ppi), None
    except FragsegError as exc:
        out_dir = Path(out_root) / sid
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "log.json").write_text(json.dumps({
            "set": sid, "error": f"{type(exc).__name__}: {exc}",
        }, indent=2), encoding="utf-8")
        return sid, None, f"{type(exc).__name__}: {exc}"


def run_batch(root: str | Path, boxes_dir: str | Path | None, out_root: str | Path,
              set_ids: list[str], cfg: PipelineConfig, jobs: int = 1,
              ppi: float | None = None) -> list[tuple[str, dict | None, str | None]]:
    """Process many sets, optionally in parallel; workers share nothing."""
    tasks = [(str(root), None if boxes_dir is None else str(boxes_dir), str(out_root),
              sid, cfg.to_dict(), ppi) for sid in set_ids]
    if jobs <= 1:
        return [_process_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_process_one, tasks))
