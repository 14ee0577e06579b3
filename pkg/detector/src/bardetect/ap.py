"""COCO-style average precision for single-class detections.

Greedy matching by descending score at each IoU threshold from 0.50 to
0.95 (step 0.05, thresholds inclusive), 101-point interpolated
precision-recall, averaged across thresholds.
"""

from __future__ import annotations

import numpy as np

from .boxes import BoundingBox, IdMismatch, iou
from .config import ApReport

THRESHOLDS = tuple(round(0.50 + 0.05 * k, 2) for k in range(10))


def _ap_at(threshold: float, predictions, ground_truth) -> float:
    npos = sum(len(v) for v in ground_truth.values())
    if npos == 0:
        return 0.0
    pooled = []
    for image_id, preds in predictions.items():
        for k, p in enumerate(preds):
            pooled.append((p.score, image_id, k, p))
    # deterministic: score desc, then image id and original order
    pooled.sort(key=lambda t: (-t[0], t[1], t[2]))

    matched: dict[str, set[int]] = {i: set() for i in ground_truth}
    tps = np.zeros(len(pooled))
    fps = np.zeros(len(pooled))
    for rank, (_, image_id, _, pred) in enumerate(pooled):
        gts = ground_truth[image_id]
        best_iou = 0.0
        best_j = -1
        for j, gt in enumerate(gts):
            if j in matched[image_id]:
                continue
            value = iou(pred, gt)
            if value > best_iou:
                best_iou, best_j = value, j
        if best_j >= 0 and best_iou >= threshold:
            matched[image_id].add(best_j)
            tps[rank] = 1
        else:
            fps[rank] = 1

    tp_cum = np.cumsum(tps)
    fp_cum = np.cumsum(fps)
    recall = tp_cum / npos
    precision = tp_cum / np.maximum(tp_cum + fp_cum, 1e-12)

    # 101-point interpolation: p(r) = max precision at recall >= r
    ap = 0.0
    for r in np.linspace(0.0, 1.0, 101):
        mask = recall >= r - 1e-12
        ap += float(precision[mask].max()) if mask.any() else 0.0
    return ap / 101.0


def evaluate_ap(predictions: dict[str, list[BoundingBox]],
                ground_truth: dict[str, list[BoundingBox]]) -> ApReport:
    """Score predictions against ground truth keyed by image id.

    Every predicted image id must exist in the ground truth; ground-truth
    images without predictions simply count against recall.
    """
    unknown = set(predictions) - set(ground_truth)
    if unknown:
        raise IdMismatch(f"predictions for unknown image ids: {sorted(unknown)}")
    preds = {i: predictions.get(i, []) for i in ground_truth}
    per = tuple(_ap_at(t, preds, ground_truth) for t in THRESHOLDS)
    return ApReport(ap=sum(per) / 10.0, per_threshold=per)
