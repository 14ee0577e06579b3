"""Bar/label bounding boxes and the exclusion masks built from them.

The boxes come either from annotation exports or from the detector
component; both sides of the exchange speak the JSON format documented on
:func:`load_bar_boxes`. Isolating the bars is the first pipeline step so
they cannot contaminate alignment or thresholding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import DEFAULT_PPI
from .errors import DimensionMismatch, JsonParseError, NegativeDimension
from .maskops import Mask

DEFAULT_BAR_PAD = 10  # pixels at the reference PPI


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box, top-left corner plus size, in pixel coordinates."""

    x: int
    y: int
    w: int
    h: int
    score: float = 1.0
    label: str = "bar"

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise NegativeDimension(f"box size must be positive, got {self.w}x{self.h}")
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score must be in [0,1], got {self.score}")


@dataclass(frozen=True)
class BarSet:
    """Per-side box lists; one side's boxes apply to both its color and IR image."""

    recto: tuple[BoundingBox, ...] = ()
    verso: tuple[BoundingBox, ...] = ()

    @classmethod
    def empty(cls) -> "BarSet":
        return cls()


def _boxes_from_json(items, side: str) -> tuple[BoundingBox, ...]:
    out = []
    for i, item in enumerate(items):
        try:
            out.append(BoundingBox(
                x=int(item["x"]), y=int(item["y"]),
                w=int(item["w"]), h=int(item["h"]),
                score=float(item.get("score", 1.0)),
            ))
        except KeyError as exc:
            raise JsonParseError(f"{side}[{i}]: missing key {exc}") from exc
    return tuple(out)


def load_bar_boxes(file: str | Path) -> BarSet:
    """Read the box exchange JSON:
    ``{"recto":[{"x":..,"y":..,"w":..,"h":..,"score":..}],"verso":[...]}``.
    """
    try:
        payload = json.loads(Path(file).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise JsonParseError(f"{file}: {exc}") from exc
    if not isinstance(payload, dict):
        raise JsonParseError(f"{file}: expected a JSON object")
    return BarSet(
        recto=_boxes_from_json(payload.get("recto", []), "recto"),
        verso=_boxes_from_json(payload.get("verso", []), "verso"),
    )


def save_bar_boxes(bars: BarSet, file: str | Path) -> None:
    """Write the exchange JSON consumed by :func:`load_bar_boxes`."""
    payload = {
        side: [
            {"x": b.x, "y": b.y, "w": b.w, "h": b.h, "score": b.score}
            for b in getattr(bars, side)
        ]
        for side in ("recto", "verso")
    }
    Path(file).write_text(json.dumps(payload), encoding="utf-8")


def scaled_bar_pad(ppi: float, base: int = DEFAULT_BAR_PAD) -> int:
    """Safety margin around detected boxes, scaled with image density.

    Detector boxes are imperfect; a small pad keeps bar slivers from
    leaking into the threshold masks.
    """
    return max(0, int(round(base * ppi / DEFAULT_PPI)))


def bars_to_mask(boxes, width: int, height: int, pad: int = 0) -> Mask:
    """Union of all boxes, each grown by ``pad`` on all sides, clipped to the canvas."""
    if pad < 0:
        raise ValueError("pad must be >= 0")
    bits = np.zeros((height, width), dtype=bool)
    for b in boxes:
        x0 = max(0, b.x - pad)
        y0 = max(0, b.y - pad)
        x1 = min(width, b.x + b.w + pad)
        y1 = min(height, b.y + b.h + pad)
        if x0 < x1 and y0 < y1:
            bits[y0:y1, x0:x1] = True
    return Mask(bits)


def mask_out(img, mask: Mask, fill=0):
    """Replace pixels under the mask foreground with ``fill``.

    The default fill of 0 matches the near-black felt background, so masked
    regions vanish in the threshold masks. Idempotent for a fixed mask and
    fill.
    """
    px = img.pixels
    if px.shape[:2] != mask.bits.shape:
        raise DimensionMismatch(f"{px.shape[:2]} vs {mask.bits.shape}")
    out = px.copy()
    out[mask.bits] = fill
    return type(img)(out)
