"""Annotated-set loading.

A training/validation directory holds one subdirectory per image set:
``<dir>/<set_id>/recto_color.png``, ``verso_color.png`` and ``boxes.json``
(the exchange format). Recto and verso color images are independent
training samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .boxes import BoundingBox, load_boxes_json


@dataclass(frozen=True)
class BarSample:
    image_id: str
    path: Path
    boxes: tuple[BoundingBox, ...]

    def load_rgb(self) -> np.ndarray:
        img = Image.open(self.path).convert("RGB")
        return np.asarray(img)


def load_annotated_dir(root: str | Path) -> list[BarSample]:
    root = Path(root)
    samples: list[BarSample] = []
    for set_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        boxes_file = set_dir / "boxes.json"
        if not boxes_file.exists():
            continue
        per_side = load_boxes_json(boxes_file)
        for side in ("recto", "verso"):
            for ext in ("png", "tif", "tiff"):
                path = set_dir / f"{side}_color.{ext}"
                if path.exists():
                    samples.append(BarSample(
                        image_id=f"{set_dir.name}:{side}",
                        path=path,
                        boxes=tuple(per_side[side]),
                    ))
                    break
    return samples
