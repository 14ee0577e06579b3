"""Training configuration and the AP report record."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class DetectorConfig:
    """Fine-tuning hyperparameters; defaults reproduce the reference run
    (constant learning rate, 1500 iterations, 5-image batches, 128 RoIs per
    image, one foreground class, 800 px short side, eval every 10
    iterations, at most 5 detections per image)."""

    base_lr: float = 0.0001
    iterations: int = 1500
    images_per_batch: int = 5
    roi_batch_per_image: int = 128
    num_classes: int = 1
    short_side: int = 800
    eval_period: int = 10
    max_detections: int = 5

    def __post_init__(self):
        for name in ("base_lr", "iterations", "images_per_batch",
                     "roi_batch_per_image", "num_classes", "short_side",
                     "eval_period", "max_detections"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def smoke(cls) -> "DetectorConfig":
        """Tiny configuration for fast CPU runs; architecture unchanged."""
        return cls(iterations=20, images_per_batch=2, short_side=128,
                   roi_batch_per_image=32, eval_period=5)


@dataclass(frozen=True)
class ApReport:
    """Mean AP over the IoU thresholds 0.50:0.05:0.95 plus the per-threshold
    values it averages."""

    ap: float
    per_threshold: tuple[float, ...]

    def __post_init__(self):
        if len(self.per_threshold) != 10:
            raise ValueError("expected ten per-threshold AP values")
        mean = sum(self.per_threshold) / 10.0
        if abs(mean - self.ap) > 1e-12:
            raise ValueError(f"ap {self.ap} is not the mean {mean}")

    def to_dict(self) -> dict:
        return {"ap": self.ap, "per_threshold": list(self.per_threshold)}
