"""bardetect: calibration-bar detection for manuscript image sets."""

from .ap import THRESHOLDS, evaluate_ap
from .boxes import (BoundingBox, CheckpointLoadError, DetectorError,
                    EmptyTrainSet, IdMismatch, export_boxes, iou,
                    load_boxes_json, save_boxes_json)
from .config import ApReport, DetectorConfig
from .data import BarSample, load_annotated_dir
from .infer import infer, load_checkpoint
from .train import fine_tune

__version__ = "0.1.0"
