"""fragseg command line: segment, align, overlay, eval, synth."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .corpus import discover_sets, flip_horizontal, load_set_dir, load_wkt_ground_truth
from .errors import FragsegError
from .evaluation import aggregate, confusion, metrics, report_csv, report_json
from .geometry import from_wkt, rasterize
from .maskops import Mask
from .pipeline import (PipelineConfig, _boxes_for, bars_to_mask, mask_out,
                       run_batch, seed_for_set)
from .register import format_sweep_table, sweep_alignment

logger = logging.getLogger(__name__)


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    if getattr(args, "seed", None) is not None:
        cfg = type(cfg).from_dict({**cfg.to_dict(), "seed": args.seed})
    return cfg


def _jobs(args) -> int:
    env = os.environ.get("FRAGSEG_JOBS")
    if env:
        return max(1, int(env))
    return max(1, args.jobs)


def _cmd_segment(args) -> int:
    cfg = _load_config(args)
    sids = args.set or discover_sets(args.root)
    if not sids:
        print(f"no image sets found under {args.root}", file=sys.stderr)
        return 2
    results = run_batch(args.root, args.boxes, args.out, sids, cfg,
                        jobs=_jobs(args), ppi=args.ppi)
    failures = 0
    for sid, manifest, error in results:
        if error:
            failures += 1
            print(f"{sid}: FAILED ({error})")
        else:
            flags = ",".join(manifest["flags"]) or "-"
            print(f"{sid}: {len(manifest['wkt'])} polygon(s), flags: {flags}")
    return 1 if failures else 0


def _cmd_align(args) -> int:
    from .corpus import DEFAULT_PPI

    cfg = _load_config(args)
    image_set = load_set_dir(Path(args.root) / args.set, ppi=args.ppi)
    bar_boxes = _boxes_for(Path(args.boxes) if args.boxes else None, args.set)
    pad = max(0, int(round(cfg.bar_pad * image_set.ppi / DEFAULT_PPI)))
    recto = mask_out(image_set.recto_ir,
                     bars_to_mask(bar_boxes.recto, image_set.recto_ir.width,
                                  image_set.recto_ir.height, pad))
    verso = mask_out(image_set.verso_ir,
                     bars_to_mask(bar_boxes.verso, image_set.verso_ir.width,
                                  image_set.verso_ir.height, pad))
    result = sweep_alignment(
        recto, flip_horizontal(verso),
        extractors=list(cfg.extractors) if cfg.extractors else None,
        tolerances=cfg.tolerances, seed=seed_for_set(cfg.seed, args.set),
        ratio=cfg.ratio, min_inliers=cfg.min_inliers,
        max_features=cfg.max_features, working_max_side=cfg.working_max_side,
    )
    print(format_sweep_table(result.cells))
    payload = {
        "matrix": [list(map(float, row)) for row in result.transform.matrix],
        "inliers": result.inlier_count,
        "extractor": result.extractor,
        "tolerance": result.tolerance,
    }
    if args.out:
        Path(args.out).write_text(json.dumps(payload), encoding="utf-8")
    print(json.dumps(payload))
    return 0


def _cmd_overlay(args) -> int:
    import numpy as np
    from PIL import Image, ImageDraw

    image_set = load_set_dir(Path(args.root) / args.set, ppi=args.ppi)
    polys = []
    for path in sorted(Path(args.wkt).glob(f"{args.set}_*.wkt")):
        parsed = from_wkt(path.read_text(encoding="ascii"))
        polys.extend(parsed if isinstance(parsed, list) else [parsed])
    overlay = Image.fromarray(np.array(image_set.recto_color.pixels), "RGB")
    draw = ImageDraw.Draw(overlay)
    for poly in polys:
        draw.polygon([(float(x), float(y)) for x, y in poly.shell.points],
                     outline=(0, 255, 0), width=3)
        for hole in poly.holes:
            draw.polygon([(float(x), float(y)) for x, y in hole.points],
                         outline=(255, 0, 0), width=2)
    overlay.save(args.out)
    print(f"wrote {args.out} ({len(polys)} polygon(s))")
    return 0


def _pred_polygons(pred_dir: Path, sid: str):
    polys = []
    set_dir = pred_dir / sid
    candidates = sorted(set_dir.glob(f"{sid}_*.wkt")) if set_dir.is_dir() else []
    if not candidates:
        candidates = sorted(pred_dir.glob(f"{sid}_*.wkt"))
    for path in candidates:
        parsed = from_wkt(path.read_text(encoding="ascii"))
        polys.extend(parsed if isinstance(parsed, list) else [parsed])
    return polys


def _cmd_eval(args) -> int:
    gt_root = Path(args.gt)
    pred_dir = Path(args.pred)
    per_image = []
    for sid in discover_sets(gt_root):
        gt_polys = load_wkt_ground_truth(gt_root / sid)
        if not gt_polys:
            logger.info("%s: no ground truth; skipped", sid)
            continue
        image_set = load_set_dir(gt_root / sid, ppi=args.ppi)
        w, h = image_set.recto_color.width, image_set.recto_color.height
        gt_mask = rasterize(gt_polys, w, h)
        pred = _pred_polygons(pred_dir, sid)
        pred_mask = rasterize(pred, w, h) if pred else Mask.zeros(w, h)
        per_image.append((sid, metrics(confusion(pred_mask, gt_mask))))
    if not per_image:
        print("no evaluable sets (ground truth missing?)", file=sys.stderr)
        return 2
    per_image.sort(key=lambda kv: kv[0])
    means = aggregate([m for _, m in per_image])
    report_csv(per_image, means, args.out)
    if args.json:
        report_json(per_image, means, args.json)
    print(f"evaluated {len(per_image)} image(s); mean IoU {means.iou:.4f}, "
          f"precision {means.precision:.4f}, recall {means.recall:.4f}, "
          f"F1 {means.f1:.4f}, accuracy {means.accuracy:.4f}")
    return 0


def _cmd_synth(args) -> int:
    from .synth import generate_corpus

    sids = generate_corpus(args.out, count=args.count, size=args.size, seed=args.seed)
    print(f"wrote {len(sids)} sets under {args.out}/corpus (boxes in {args.out}/boxes)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fragseg",
                                     description="Segment manuscript fragments from recto/verso image sets.")
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="run the full pipeline over a corpus")
    seg.add_argument("--root", required=True, help="corpus root (one directory per set)")
    seg.add_argument("--boxes", help="directory of <set>.json bar boxes")
    seg.add_argument("--out", required=True, help="output root")
    seg.add_argument("--config", help="pipeline config JSON")
    seg.add_argument("--jobs", type=int, default=1, help="parallel workers (FRAGSEG_JOBS overrides)")
    seg.add_argument("--seed", type=int, default=None)
    seg.add_argument("--set", action="append", help="limit to specific set ids")
    seg.add_argument("--ppi", type=float, default=None)
    seg.set_defaults(fn=_cmd_segment)

    aln = sub.add_parser("align", help="alignment sweep for one set")
    aln.add_argument("--root", required=True)
    aln.add_argument("--boxes")
    aln.add_argument("--set", required=True)
    aln.add_argument("--out", help="write alignment JSON here")
    aln.add_argument("--config", help="pipeline config JSON")
    aln.add_argument("--seed", type=int, default=None)
    aln.add_argument("--ppi", type=float, default=None)
    aln.set_defaults(fn=_cmd_align)

    ovl = sub.add_parser("overlay", help="draw WKT polygons over the recto color image")
    ovl.add_argument("--root", required=True)
    ovl.add_argument("--set", required=True)
    ovl.add_argument("--wkt", required=True, help="directory containing <set>_<k>.wkt")
    ovl.add_argument("--out", required=True)
    ovl.add_argument("--ppi", type=float, default=None)
    ovl.set_defaults(fn=_cmd_overlay)

    ev = sub.add_parser("eval", help="score predictions against WKT ground truth")
    ev.add_argument("--pred", required=True, help="prediction root (segment output)")
    ev.add_argument("--gt", required=True, help="corpus root holding <set>/gt/*.wkt")
    ev.add_argument("--out", required=True, help="CSV report path")
    ev.add_argument("--json", help="optional JSON mirror")
    ev.add_argument("--ppi", type=float, default=None)
    ev.set_defaults(fn=_cmd_eval)

    syn = sub.add_parser("synth", help="generate the synthetic evaluation corpus")
    syn.add_argument("--out", required=True)
    syn.add_argument("--count", type=int, default=20)
    syn.add_argument("--size", type=int, default=2000)
    syn.add_argument("--seed", type=int, default=0)
    syn.set_defaults(fn=_cmd_synth)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("FRAGSEG_LOGLEVEL", "WARNING"))
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except FragsegError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
