"""Stock Faster R-CNN assembly (ResNet-50 FPN backbone)."""

from __future__ import annotations

import logging

from .config import DetectorConfig

logger = logging.getLogger(__name__)


def build_model(cfg: DetectorConfig, pretrained_backbone: bool = False):
    """Faster R-CNN with one foreground class plus background.

    ``pretrained_backbone`` asks torchvision for ImageNet weights; when the
    download is unavailable the model falls back to random initialization
    with a warning (fine for smoke-scale runs).
    """
    from torchvision.models import ResNet50_Weights
    from torchvision.models.detection import fasterrcnn_resnet50_fpn

    weights_backbone = None
    if pretrained_backbone:
        try:
            weights_backbone = ResNet50_Weights.IMAGENET1K_V1
            # force the download now so failures surface here
            weights_backbone.get_state_dict(progress=False)
        except Exception as exc:  # no network access to the weight host
            logger.warning("pretrained backbone unavailable (%s); using random init", exc)
            weights_backbone = None

    return fasterrcnn_resnet50_fpn(
        weights=None,
        weights_backbone=weights_backbone,
        num_classes=cfg.num_classes + 1,
        min_size=cfg.short_side,
        max_size=cfg.short_side * 2,
        box_batch_size_per_image=cfg.roi_batch_per_image,
        box_detections_per_img=cfg.max_detections,
    )
