"""Pixel-level semantic-segmentation metrics against WKT ground truth.

Segmentation is scored as a two-class problem (fragment vs background):
per-image IoU, precision, recall, F1 and accuracy, plus corpus means.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyList
from .maskops import Mask

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Confusion:
    """Pixel counts; always totals the full image area."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class SegMetrics:
    iou: float
    precision: float
    recall: float
    f1: float
    accuracy: float


def confusion(pred: Mask, gt: Mask) -> Confusion:
    """Count foreground agreement between a prediction and the ground truth."""
    if pred.bits.shape != gt.bits.shape:
        raise DimensionMismatch(f"{pred.bits.shape} vs {gt.bits.shape}")
    p = pred.bits
    g = gt.bits
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = p.size - tp - fp - fn
    return Confusion(tp, fp, fn, tn)


def _ratio(num: int, den: int, both_empty: bool) -> float:
    if den == 0:
        # 0/0 scores perfect only when prediction and truth are both empty
        if both_empty:
            logger.info("0/0 metric on an empty-vs-empty comparison; scoring 1.0")
            return 1.0
        return 0.0
    return num / den


def metrics(c: Confusion) -> SegMetrics:
    both_empty = (c.tp + c.fp == 0) and (c.tp + c.fn == 0)
    iou = _ratio(c.tp, c.tp + c.fp + c.fn, both_empty)
    precision = _ratio(c.tp, c.tp + c.fp, both_empty)
    recall = _ratio(c.tp, c.tp + c.fn, both_empty)
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1 = 1.0 if both_empty else 0.0
    accuracy = _ratio(c.tp + c.tn, c.total, both_empty)
    return SegMetrics(iou, precision, recall, f1, accuracy)


def aggregate(items: list[SegMetrics]) -> SegMetrics:
    """Field-wise arithmetic mean; note this averages per-image F1 scores,
    which is not the F1 of the averaged counts.

    ``fsum`` makes the mean independent of image order, bit for bit.
    """
    if not items:
        raise EmptyList("nothing to aggregate")
    return SegMetrics(
        iou=math.fsum(m.iou for m in items) / len(items),
        precision=math.fsum(m.precision for m in items) / len(items),
        recall=math.fsum(m.recall for m in items) / len(items),
        f1=math.fsum(m.f1 for m in items) / len(items),
        accuracy=math.fsum(m.accuracy for m in items) / len(items),
    )


_FIELDS = ("iou", "precision", "recall", "f1", "accuracy")


def report_csv(per_image: list[tuple[str, SegMetrics]], means: SegMetrics,
               out: str | Path) -> None:
    """CSV report: one row per image, a final MEAN row, four decimals."""
    if not per_image:
        raise EmptyList("no per-image metrics to report")
    with open(out, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(("id",) + _FIELDS)
        for image_id, m in per_image:
            writer.writerow([image_id] + [f"{getattr(m, f):.4f}" for f in _FIELDS])
        writer.writerow(["MEAN"] + [f"{getattr(means, f):.4f}" for f in _FIELDS])


def report_json(per_image: list[tuple[str, SegMetrics]], means: SegMetrics,
                out: str | Path) -> None:
    """JSON mirror of the CSV report."""
    if not per_image:
        raise EmptyList("no per-image metrics to report")
    payload = {
        "images": {
            image_id: {f: getattr(m, f) for f in _FIELDS}
            for image_id, m in per_image
        },
        "mean": {f: getattr(means, f) for f in _FIELDS},
    }
    Path(out).write_text(json.dumps(payload, indent=2), encoding="utf-8")
