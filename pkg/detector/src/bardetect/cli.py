"""detector command line: train, infer, eval."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from .ap import evaluate_ap
from .boxes import DetectorError, export_boxes, load_boxes_json
from .config import DetectorConfig
from .data import load_annotated_dir
from .infer import infer
from .train import fine_tune


def _cmd_train(args) -> int:
    cfg = DetectorConfig(
        base_lr=args.lr, iterations=args.iters,
        images_per_batch=args.batch, short_side=args.short_side,
        roi_batch_per_image=args.roi_batch, eval_period=args.eval_period,
        max_detections=args.max_detections,
    )
    train = load_annotated_dir(args.train)
    val = load_annotated_dir(args.val) if args.val else []
    out = fine_tune(train, val, cfg, seed=args.seed, out=args.out,
                    pretrained_backbone=args.pretrained)
    print(f"checkpoint written to {out}")
    return 0


def _cmd_infer(args) -> int:
    image = np.asarray(Image.open(args.image).convert("RGB"))
    boxes = infer(args.ckpt, image, score_floor=args.score_floor)
    predictions = {"recto": [], "verso": []}
    predictions[args.side] = boxes
    export_boxes(predictions, args.out)
    print(f"{len(boxes)} detection(s) written to {args.out}")
    return 0


def _collect(dir_path: Path) -> dict:
    out = {}
    for path in sorted(Path(dir_path).glob("*.json")):
        sid = path.stem
        per_side = load_boxes_json(path)
        for side in ("recto", "verso"):
            out[f"{sid}:{side}"] = per_side[side]
    return out


def _cmd_eval(args) -> int:
    predictions = _collect(args.pred)
    ground_truth = _collect(args.gt)
    report = evaluate_ap(predictions, ground_truth)
    print(json.dumps(report.to_dict()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="detector",
                                     description="Calibration-bar detector (Faster R-CNN).")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="fine-tune on an annotated directory")
    tr.add_argument("--train", required=True)
    tr.add_argument("--val")
    tr.add_argument("--out", required=True)
    tr.add_argument("--iters", type=int, default=1500)
    tr.add_argument("--lr", type=float, default=0.0001)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--batch", type=int, default=5)
    tr.add_argument("--short-side", type=int, default=800)
    tr.add_argument("--roi-batch", type=int, default=128)
    tr.add_argument("--eval-period", type=int, default=10)
    tr.add_argument("--max-detections", type=int, default=5)
    tr.add_argument("--pretrained", action="store_true",
                    help="try to fetch ImageNet backbone weights")
    tr.set_defaults(fn=_cmd_train)

    inf = sub.add_parser("infer", help="detect bars on one color image")
    inf.add_argument("--ckpt", required=True)
    inf.add_argument("--image", required=True)
    inf.add_argument("--out", required=True)
    inf.add_argument("--side", choices=("recto", "verso"), default="recto")
    inf.add_argument("--score-floor", type=float, default=0.0)
    inf.set_defaults(fn=_cmd_infer)

    ev = sub.add_parser("eval", help="AP of prediction JSONs against annotation JSONs")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--gt", required=True)
    ev.set_defaults(fn=_cmd_eval)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level="INFO")
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DetectorError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
