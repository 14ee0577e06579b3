"""Checkpoint loading and single-image inference."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .boxes import BoundingBox, CheckpointLoadError
from .config import DetectorConfig
from .model import build_model


def load_checkpoint(path: str | Path):
    import torch

    try:
        payload = torch.load(Path(path), map_location="cpu", weights_only=True)
        cfg = DetectorConfig(**payload["config"])
        model = build_model(cfg)
        model.load_state_dict(payload["model"])
    except CheckpointLoadError:
        raise
    except Exception as exc:
        raise CheckpointLoadError(f"{path}: {exc}") from exc
    model.eval()
    return model, cfg


def infer(checkpoint: str | Path, image: np.ndarray,
          score_floor: float = 0.0) -> list[BoundingBox]:
    """Detections for one RGB image, highest score first, at most the
    configured maximum per image."""
    import torch

    model, cfg = load_checkpoint(checkpoint)
    tensor = torch.from_numpy(image.astype(np.float32) / 255.0).permute(2, 0, 1)
    with torch.no_grad():
        (output,) = model([tensor])
    boxes = []
    for (x0, y0, x1, y1), score in zip(output["boxes"].tolist(),
                                       output["scores"].tolist()):
        if score < score_floor:
            continue
        w = max(1, int(round(x1 - x0)))
        h = max(1, int(round(y1 - y0)))
        boxes.append(BoundingBox(int(round(x0)), int(round(y0)), w, h,
                                 min(1.0, max(0.0, float(score)))))
    boxes.sort(key=lambda b: -b.score)
    return boxes[:cfg.max_detections]
