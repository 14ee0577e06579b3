"""Synthetic recto/verso corpus with ground truth.

Scenes follow the imaging setup the pipeline targets: a dark felt-noise
background, a low-saturation woven substrate, one or more parchment-like
fragments with holes (bright in IR), recto-only ink marks, calibration
bars at per-side positions, tiny flecks, a recto-only paper hinge, and
salt speckle. The verso is the horizontally flipped image of the scene
under a known mild affine, so alignment recovery can be scored against
truth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
from PIL import Image

from .bars import BarSet, BoundingBox, save_bar_boxes
from .corpus import FragmentImageSet, RasterGray8, RasterRGB
from .geometry import PolygonWithHoles, Ring, rasterize, to_wkt
from .register import AffineTransform

FELT_MEAN, FELT_SIGMA = 15.0, 5.0
SUBSTRATE_IR, SUBSTRATE_GRAY = 170, 160
FRAGMENT_IR = 185
FRAGMENT_RGB = (181, 142, 96)
INK_IR, INK_RGB = 18, (28, 22, 18)
BAR_IR = 200
HINGE_IR, HINGE_RGB = 170, (200, 190, 180)
SALT_FRACTION = 5e-4


@dataclass(frozen=True)
class SyntheticSet:
    """One generated set plus everything needed to score the pipeline."""

    image_set: FragmentImageSet
    bar_boxes: BarSet
    gt_polygons: tuple[PolygonWithHoles, ...]
    transform: AffineTransform  # ground truth: flipped verso -> recto


def _star_points(rng, cx: float, cy: float, radius: float,
                 vertices: int, irregularity: float = 0.35) -> list[tuple[int, int]]:
    angles = (np.arange(vertices) + rng.uniform(-0.35, 0.35, vertices)) * (2 * np.pi / vertices)
    radii = radius * rng.uniform(1.0 - irregularity, 1.0 + irregularity, vertices)
    pts = [(int(round(cx + r * math.cos(a))), int(round(cy + r * math.sin(a))))
           for a, r in zip(angles, radii)]
    # drop consecutive duplicates from rounding
    out = [p for i, p in enumerate(pts) if p != pts[i - 1]]
    return out


def _ccw(points: list[tuple[int, int]]) -> list[tuple[int, int]]:
    area2 = sum(x0 * y1 - x1 * y0 for (x0, y0), (x1, y1) in zip(points, points[1:] + points[:1]))
    return points if area2 > 0 else points[::-1]


def _fragment_polygon(rng, cx, cy, radius, n_holes: int) -> PolygonWithHoles:
    shell = Ring(_ccw(_star_points(rng, cx, cy, radius, 14)))
    holes = []
    if n_holes:
        base_angle = rng.uniform(0, 2 * np.pi)
        for k in range(n_holes):
            angle = base_angle + k * np.pi
            off = 0.38 * radius
            hx, hy = cx + off * math.cos(angle), cy + off * math.sin(angle)
            hole_pts = _star_points(rng, hx, hy, radius * rng.uniform(0.10, 0.16), 8, 0.25)
            pts = _ccw(hole_pts)[::-1]  # holes clockwise
            holes.append(Ring(pts))
    return PolygonWithHoles(shell, holes)


def _affine_ground_truth(rng, size: int) -> AffineTransform:
    theta = math.radians(rng.uniform(-3.0, 3.0))
    scale = rng.uniform(0.98, 1.02)
    t_max = min(40.0, size / 50.0)
    tx, ty = rng.uniform(-t_max, t_max, 2)
    c, s = scale * math.cos(theta), scale * math.sin(theta)
    half = size / 2.0
    # rotate/scale around the canvas center, then translate
    m = np.array([
        [c, -s, half - c * half + s * half + tx],
        [s, c, half - s * half - c * half + ty],
    ])
    return AffineTransform(m)


def _transform_polygon(p: PolygonWithHoles, t: AffineTransform) -> PolygonWithHoles:
    def move(ring: Ring) -> Ring:
        pts = t.apply(ring.as_array())
        return Ring([(float(x), float(y)) for x, y in pts])

    return PolygonWithHoles(move(p.shell), [move(h) for h in p.holes])


def _region(polys, size: int) -> np.ndarray:
    return rasterize(list(polys), size, size).bits


def _paint_disks(size: int, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    canvas = np.zeros((size, size), np.uint8)
    for (x, y), r in zip(centers, radii):
        cv2.circle(canvas, (int(round(x)), int(round(y))), int(r), 1, -1)
    return canvas.astype(bool)


def _bars_for_side(rng, size: int) -> list[BoundingBox]:
    count = int(rng.integers(2, 4))
    strip = max(30, size // 18)
    boxes = []
    edges = rng.permutation(4)[:count]
    for edge in edges:
        length = int(size * rng.uniform(0.25, 0.5))
        thick = int(strip * rng.uniform(0.5, 0.9))
        offset = int(rng.uniform(0.05, 0.5) * size)
        margin = max(4, size // 100)
        if edge in (0, 1):  # top / bottom
            y = margin if edge == 0 else size - margin - thick
            boxes.append(BoundingBox(x=min(offset, size - length - margin), y=y, w=length, h=thick))
        else:  # left / right
            x = margin if edge == 2 else size - margin - thick
            boxes.append(BoundingBox(x=x, y=min(offset, size - length - margin), w=thick, h=length))
    return boxes


def _draw_bars_ir(ir: np.ndarray, boxes, rng) -> None:
    for b in boxes:
        ir[b.y:b.y + b.h, b.x:b.x + b.w] = BAR_IR + rng.integers(-3, 4)


def _draw_bars_color(rgb: np.ndarray, boxes, rng) -> None:
    palette = np.array([
        (200, 40, 40), (40, 170, 60), (50, 60, 200), (220, 210, 40),
        (230, 120, 30), (150, 40, 160), (240, 240, 240), (30, 30, 30),
    ], np.uint8)
    for b in boxes:
        cells = max(1, (b.w if b.w >= b.h else b.h) // 20)
        for c in range(cells):
            color = palette[int(rng.integers(0, len(palette)))]
            if b.w >= b.h:
                x0 = b.x + (b.w * c) // cells
                x1 = b.x + (b.w * (c + 1)) // cells
                rgb[b.y:b.y + b.h, x0:x1] = color
            else:
                y0 = b.y + (b.h * c) // cells
                y1 = b.y + (b.h * (c + 1)) // cells
                rgb[y0:y1, b.x:b.x + b.w] = color


@dataclass
class _Scene:
    """Recto-frame geometry and shared texture of the physical objects."""

    substrate: PolygonWithHoles
    fragments: tuple[PolygonWithHoles, ...]
    dot_centers: np.ndarray
    dot_radii: np.ndarray
    blotch_centers: np.ndarray
    blotch_radii: np.ndarray
    blotch_delta: np.ndarray
    speck_centers: np.ndarray
    speck_radii: np.ndarray
    field: np.ndarray  # smooth shading shared by both sides


def _render_side(scene: _Scene, size: int, rng, transform: AffineTransform | None,
                 ink_polys, hinge_box) -> tuple[np.ndarray, np.ndarray]:
    """IR and color images of one side; geometry optionally remapped."""
    if transform is None:
        substrate = scene.substrate
        fragments = scene.fragments
        dots_c, blotch_c, speck_c = scene.dot_centers, scene.blotch_centers, scene.speck_centers
        field = scene.field
    else:
        substrate = _transform_polygon(scene.substrate, transform)
        fragments = tuple(_transform_polygon(f, transform) for f in scene.fragments)
        dots_c = transform.apply(scene.dot_centers) if len(scene.dot_centers) else scene.dot_centers
        blotch_c = transform.apply(scene.blotch_centers) if len(scene.blotch_centers) else scene.blotch_centers
        speck_c = transform.apply(scene.speck_centers) if len(scene.speck_centers) else scene.speck_centers
        # resample the shared shading into this side's frame; warpAffine
        # inverts the given matrix, so passing the forward map of this
        # side's geometry samples field(T0 . p) as required
        field = cv2.warpAffine(scene.field, transform.matrix, (size, size),
                               flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_REPLICATE)

    substrate_region = _region([substrate], size)
    material = _region(list(fragments), size)
    substrate_visible = substrate_region & ~material
    dots = _paint_disks(size, dots_c, scene.dot_radii) & substrate_visible
    specks = _paint_disks(size, speck_c, scene.speck_radii) & substrate_visible

    blotch = np.zeros((size, size), np.int16)
    for (x, y), r, d in zip(blotch_c, scene.blotch_radii, scene.blotch_delta):
        cv2.circle(blotch, (int(round(x)), int(round(y))), int(r), int(d), -1)

    # infrared
    ir = np.clip(rng.normal(FELT_MEAN, FELT_SIGMA, (size, size)), 0, 255)
    ir = np.where(substrate_visible, SUBSTRATE_IR + field + rng.normal(0, 2, ir.shape), ir)
    ir = np.where(dots, 150, ir)
    ir = np.where(material, FRAGMENT_IR + field + blotch + rng.normal(0, 4, ir.shape), ir)
    ir = np.where(specks, 180, ir)

    # color
    felt = np.clip(rng.normal(FELT_MEAN, FELT_SIGMA, (size, size)), 0, 255)
    rgb = np.repeat(felt[:, :, None], 3, axis=2)
    sub_gray = np.clip(SUBSTRATE_GRAY + 0.4 * field + rng.normal(0, 3, (size, size)), 110, 195)
    rgb = np.where(substrate_visible[:, :, None], np.repeat(sub_gray[:, :, None], 3, 2), rgb)
    rgb = np.where(dots[:, :, None], np.array([140, 110, 90], float), rgb)
    frag = np.stack([
        np.clip(FRAGMENT_RGB[c] + field + blotch + rng.normal(0, 5, (size, size)), 0, 255)
        for c in range(3)
    ], axis=2)
    rgb = np.where(material[:, :, None], frag, rgb)
    rgb = np.where(specks[:, :, None], np.array([175, 150, 110], float), rgb)

    if ink_polys:
        ink = _region(ink_polys, size) & material
        ir = np.where(ink, INK_IR + rng.normal(0, 3, ir.shape), ir)
        rgb = np.where(ink[:, :, None], np.array(INK_RGB, float), rgb)
    if hinge_box is not None:
        x, y, w, h = hinge_box
        ir[y:y + h, x:x + w] = HINGE_IR + rng.normal(0, 2, (h, w))
        rgb[y:y + h, x:x + w] = np.array(HINGE_RGB, float)

    # salt speckle
    n_salt = int(size * size * SALT_FRACTION)
    ys = rng.integers(0, size, n_salt)
    xs = rng.integers(0, size, n_salt)
    ir[ys, xs] = rng.integers(150, 220, n_salt)
    rgb[ys, xs] = rng.integers(150, 220, (n_salt, 1))

    return (np.clip(np.rint(ir), 0, 255).astype(np.uint8),
            np.clip(np.rint(rgb), 0, 255).astype(np.uint8))


def generate_set(seed: int, size: int = 2000, fragments: int = 1,
                 plate_id: str | None = None, fragment_id: str = "1") -> SyntheticSet:
    """Build one synthetic recto/verso set with ground truth."""
    rng_geom = np.random.default_rng([seed, 0])
    rng_recto = np.random.default_rng([seed, 1])
    rng_verso = np.random.default_rng([seed, 2])

    cx = cy = size / 2.0
    sub_radius = 0.32 * size
    substrate = PolygonWithHoles(Ring(_ccw(_star_points(rng_geom, cx, cy, sub_radius, 16, 0.18))))

    frag_polys = []
    if fragments == 1:
        frag_polys.append(_fragment_polygon(rng_geom, cx, cy, 0.20 * size,
                                            n_holes=int(rng_geom.integers(1, 3))))
    else:
        spread = 0.17 * size
        base = rng_geom.uniform(0, 2 * np.pi)
        for k in range(fragments):
            angle = base + 2 * np.pi * k / fragments
            fx = cx + spread * math.cos(angle)
            fy = cy + spread * math.sin(angle)
            frag_polys.append(_fragment_polygon(rng_geom, fx, fy, 0.085 * size,
                                                n_holes=int(rng_geom.integers(0, 2))))

    # shared woven dots on the substrate and blotches on the fragments
    n_dots = max(200, int(sub_radius * sub_radius / 400))
    angles = rng_geom.uniform(0, 2 * np.pi, n_dots)
    dist = sub_radius * np.sqrt(rng_geom.uniform(0, 1, n_dots)) * 0.92
    dot_centers = np.stack([cx + dist * np.cos(angles), cy + dist * np.sin(angles)], 1)
    dot_radii = rng_geom.integers(1, 3, n_dots)

    n_blotch = 40 * max(1, fragments)
    bl_angles = rng_geom.uniform(0, 2 * np.pi, n_blotch)
    bl_dist = rng_geom.uniform(0, 0.9, n_blotch)
    centers = []
    for a, d, poly in zip(bl_angles, bl_dist,
                          [frag_polys[i % len(frag_polys)] for i in range(n_blotch)]):
        x0, y0, x1, y1 = poly.bounds()
        fx, fy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
        r = 0.5 * min(x1 - x0, y1 - y0) / 2.0
        centers.append((fx + d * r * math.cos(a), fy + d * r * math.sin(a)))
    blotch_centers = np.array(centers)
    blotch_radii = rng_geom.integers(6, int(0.02 * size) + 8, n_blotch)
    blotch_delta = rng_geom.integers(-35, 26, n_blotch)

    n_specks = int(rng_geom.integers(2, 4))
    sp_angles = rng_geom.uniform(0, 2 * np.pi, n_specks)
    sp_dist = sub_radius * rng_geom.uniform(0.75, 0.9, n_specks)
    speck_centers = np.stack([cx + sp_dist * np.cos(sp_angles), cy + sp_dist * np.sin(sp_angles)], 1)
    speck_radii = rng_geom.integers(4, 9, n_specks)

    ink_polys = []
    for poly in frag_polys:
        x0, y0, x1, y1 = poly.bounds()
        fx, fy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
        r = min(x1 - x0, y1 - y0) / 2.0
        for _ in range(int(rng_geom.integers(2, 5))):
            a = rng_geom.uniform(0, 2 * np.pi)
            d = rng_geom.uniform(0.1, 0.6) * r
            ink_polys.append(PolygonWithHoles(Ring(_ccw(_star_points(
                rng_geom, fx + d * math.cos(a), fy + d * math.sin(a),
                max(6.0, 0.012 * size), 8, 0.3)))))

    # recto-only hinge on the felt, clear of the substrate
    hinge_w, hinge_h = max(24, size // 50), max(48, size // 25)
    hx = int(cx + sub_radius * 1.25)
    hy = int(cy - hinge_h / 2)
    hinge_box = (min(hx, size - hinge_w - 2), hy, hinge_w, hinge_h) if hx + 10 < size else None

    # shared material texture: smooth shading plus band-limited grain, so
    # both sides expose the same matchable structure at feature scale
    coarse = rng_geom.normal(0.0, 9.0, (max(6, size // 72), max(6, size // 72)))
    field = cv2.resize(coarse.astype(np.float32), (size, size),
                       interpolation=cv2.INTER_CUBIC)
    grain = cv2.GaussianBlur(rng_geom.normal(0.0, 1.0, (size, size)).astype(np.float32), (0, 0), 1.6)
    field += grain * (7.0 / max(float(grain.std()), 1e-6))

    scene = _Scene(substrate, tuple(frag_polys), dot_centers, dot_radii,
                   blotch_centers, blotch_radii, blotch_delta,
                   speck_centers, speck_radii, field)

    truth = _affine_ground_truth(rng_geom, size)
    inverse = truth.inverse()

    recto_ir, recto_rgb = _render_side(scene, size, rng_recto, None, ink_polys, hinge_box)
    fv_ir, fv_rgb = _render_side(scene, size, rng_verso, inverse, None, None)
    verso_ir = fv_ir[:, ::-1].copy()
    verso_rgb = fv_rgb[:, ::-1].copy()

    recto_bars = _bars_for_side(rng_recto, size)
    verso_bars = _bars_for_side(rng_verso, size)
    _draw_bars_ir(recto_ir, recto_bars, rng_recto)
    _draw_bars_color(recto_rgb, recto_bars, rng_recto)
    _draw_bars_ir(verso_ir, verso_bars, rng_verso)
    _draw_bars_color(verso_rgb, verso_bars, rng_verso)

    plate = plate_id if plate_id is not None else f"{900 + seed % 1000:04d}"
    image_set = FragmentImageSet(
        plate_id=plate, fragment_id=fragment_id,
        recto_color=RasterRGB(recto_rgb), recto_ir=RasterGray8(recto_ir),
        verso_color=RasterRGB(verso_rgb), verso_ir=RasterGray8(verso_ir),
    )
    return SyntheticSet(
        image_set=image_set,
        bar_boxes=BarSet(tuple(recto_bars), tuple(verso_bars)),
        gt_polygons=tuple(frag_polys),
        transform=truth,
    )


def write_set(synth: SyntheticSet, corpus_root: str | Path, boxes_root: str | Path) -> str:
    """Write one synthetic set in the on-disk corpus layout; returns the set id."""
    sid = synth.image_set.set_id
    set_dir = Path(corpus_root) / sid
    (set_dir / "gt").mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(synth.image_set.recto_color.pixels), "RGB").save(set_dir / "recto_color.png")
    Image.fromarray(np.asarray(synth.image_set.recto_ir.pixels), "L").save(set_dir / "recto_ir.png")
    Image.fromarray(np.asarray(synth.image_set.verso_color.pixels), "RGB").save(set_dir / "verso_color.png")
    Image.fromarray(np.asarray(synth.image_set.verso_ir.pixels), "L").save(set_dir / "verso_ir.png")
    for k, poly in enumerate(synth.gt_polygons, start=1):
        (set_dir / "gt" / f"{sid}_{k}.wkt").write_text(to_wkt(poly) + "\n", encoding="ascii")
    Path(boxes_root).mkdir(parents=True, exist_ok=True)
    save_bar_boxes(synth.bar_boxes, Path(boxes_root) / f"{sid}.json")
    (set_dir / "truth.json").write_text(json.dumps({
        "matrix": [list(map(float, row)) for row in synth.transform.matrix],
    }), encoding="utf-8")
    return sid


def generate_corpus(out_dir: str | Path, count: int = 20, size: int = 2000,
                    seed: int = 0) -> list[str]:
    """Write ``<out>/corpus/<sid>/...`` and ``<out>/boxes/<sid>.json``.

    One set in three is a multi-fragment scene.
    """
    out_dir = Path(out_dir)
    corpus = out_dir / "corpus"
    boxes = out_dir / "boxes"
    sids = []
    for i in range(count):
        fragments = 3 if i % 3 == 2 else 1
        synth = generate_set(seed + i, size=size, fragments=fragments,
                             plate_id=f"{900 + i:04d}")
        sids.append(write_set(synth, corpus, boxes))
    return sids
