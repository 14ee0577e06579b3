"""Bounding boxes and the JSON exchange format shared with the segmenter.

The segmentation pipeline reads ``{"recto": [{"x":..,"y":..,"w":..,"h":..,
"score":..}], "verso": [...]}``; everything this package emits goes through
:func:`save_boxes_json` so the wire format stays bit-compatible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class DetectorError(Exception):
    pass


class EmptyTrainSet(DetectorError, ValueError):
    pass


class CheckpointLoadError(DetectorError, ValueError):
    pass


class IdMismatch(DetectorError, ValueError):
    pass


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned detection, top-left corner plus size."""

    x: int
    y: int
    w: int
    h: int
    score: float = 1.0
    label: str = "bar"

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box size must be positive, got {self.w}x{self.h}")
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score must be in [0,1], got {self.score}")

    @property
    def area(self) -> int:
        return self.w * self.h


def iou(a: BoundingBox, b: BoundingBox) -> float:
    x0 = max(a.x, b.x)
    y0 = max(a.y, b.y)
    x1 = min(a.x + a.w, b.x + b.w)
    y1 = min(a.y + a.h, b.y + b.h)
    inter = max(0, x1 - x0) * max(0, y1 - y0)
    union = a.area + b.area - inter
    return inter / union if union else 0.0


def save_boxes_json(recto: list[BoundingBox], verso: list[BoundingBox],
                    out: str | Path) -> None:
    payload = {
        "recto": [{"x": b.x, "y": b.y, "w": b.w, "h": b.h, "score": b.score} for b in recto],
        "verso": [{"x": b.x, "y": b.y, "w": b.w, "h": b.h, "score": b.score} for b in verso],
    }
    Path(out).write_text(json.dumps(payload), encoding="utf-8")


def load_boxes_json(path: str | Path) -> dict[str, list[BoundingBox]]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    out = {}
    for side in ("recto", "verso"):
        out[side] = [
            BoundingBox(int(b["x"]), int(b["y"]), int(b["w"]), int(b["h"]),
                        float(b.get("score", 1.0)))
            for b in payload.get(side, [])
        ]
    return out


def export_boxes(predictions: dict[str, list[BoundingBox]], out: str | Path) -> None:
    """Write predictions in the exchange format consumed by the segmenter."""
    save_boxes_json(predictions.get("recto", []), predictions.get("verso", []), out)
