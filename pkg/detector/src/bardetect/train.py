"""Fine-tuning loop: constant learning rate SGD over a fixed iteration count."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .boxes import EmptyTrainSet
from .config import DetectorConfig
from .data import BarSample
from .model import build_model

logger = logging.getLogger(__name__)


def _to_target(sample: BarSample, torch):
    if sample.boxes:
        xyxy = [[b.x, b.y, b.x + b.w, b.y + b.h] for b in sample.boxes]
        boxes = torch.tensor(xyxy, dtype=torch.float32)
        labels = torch.ones((len(sample.boxes),), dtype=torch.int64)
    else:
        boxes = torch.zeros((0, 4), dtype=torch.float32)
        labels = torch.zeros((0,), dtype=torch.int64)
    return {"boxes": boxes, "labels": labels}


def _to_tensor(sample: BarSample, torch):
    rgb = sample.load_rgb().astype(np.float32) / 255.0
    return torch.from_numpy(rgb).permute(2, 0, 1)


def _loss_on(model, batch, torch):
    images = [t for t, _ in batch]
    targets = [t for _, t in batch]
    losses = model(images, targets)
    return sum(losses.values())


def fine_tune(train: list[BarSample], val: list[BarSample],
              cfg: DetectorConfig = DetectorConfig(), seed: int = 0,
              out: str | Path = "bar_detector.pt",
              pretrained_backbone: bool = False) -> Path:
    """Train and write a checkpoint; logs train/val loss every eval period.

    The loss curve (iteration, train loss, validation loss) is written next
    to the checkpoint as ``<out>.curve.json``.
    """
    import torch

    if not train:
        raise EmptyTrainSet("no training samples")

    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    model = build_model(cfg, pretrained_backbone)
    model.train()
    optimizer = torch.optim.SGD(model.parameters(), lr=cfg.base_lr, momentum=0.9)

    cached = [(_to_tensor(s, torch), _to_target(s, torch)) for s in train]
    val_cached = [(_to_tensor(s, torch), _to_target(s, torch)) for s in val]

    order = rng.permutation(len(cached))
    cursor = 0
    curve = {"iterations": [], "train_loss": [], "val_loss": []}
    history: list[float] = []
    for iteration in range(1, cfg.iterations + 1):
        batch = []
        for _ in range(min(cfg.images_per_batch, len(cached))):
            if cursor == len(order):
                order = rng.permutation(len(cached))
                cursor = 0
            batch.append(cached[order[cursor]])
            cursor += 1

        optimizer.zero_grad()
        loss = _loss_on(model, batch, torch)
        loss.backward()
        optimizer.step()
        history.append(float(loss.detach()))

        if iteration % cfg.eval_period == 0 or iteration == cfg.iterations:
            window = history[-cfg.eval_period:]
            train_loss = sum(window) / len(window)
            if val_cached:
                with torch.no_grad():
                    val_loss = float(_loss_on(model, val_cached, torch).detach())
            else:
                val_loss = float("nan")
            curve["iterations"].append(iteration)
            curve["train_loss"].append(train_loss)
            curve["val_loss"].append(val_loss)
            logger.info("iter %d: train %.4f val %.4f", iteration, train_loss, val_loss)

    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    torch.save({"model": model.state_dict(), "config": asdict(cfg)}, out)
    out.with_suffix(out.suffix + ".curve.json").write_text(
        json.dumps(curve), encoding="utf-8")
    return out
