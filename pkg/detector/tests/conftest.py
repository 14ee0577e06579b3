import json

import numpy as np
import pytest
from PIL import Image


def make_bar_image(rng, size=128, n_bars=2):
    """Noise background with bright rectangular bars; returns (rgb, boxes)."""
    img = rng.integers(20, 60, (size, size, 3)).astype(np.uint8)
    boxes = []
    for k in range(n_bars):
        w = int(rng.integers(size // 4, size // 2))
        h = int(rng.integers(size // 10, size // 6))
        x = int(rng.integers(0, size - w))
        y = int(rng.integers(0, size - h))
        color = [int(rng.integers(180, 255)) for _ in range(3)]
        img[y:y + h, x:x + w] = color
        boxes.append({"x": x, "y": y, "w": w, "h": h, "score": 1.0})
    return img, boxes


@pytest.fixture(scope="session")
def annotated_dir(tmp_path_factory):
    """Five tiny annotated sets in the on-disk layout the CLI consumes."""
    root = tmp_path_factory.mktemp("barsets")
    rng = np.random.default_rng(2)
    for i in range(5):
        set_dir = root / f"{i:04d}_1"
        set_dir.mkdir()
        payload = {}
        for side in ("recto", "verso"):
            img, boxes = make_bar_image(rng)
            Image.fromarray(img, "RGB").save(set_dir / f"{side}_color.png")
            payload[side] = boxes
        (set_dir / "boxes.json").write_text(json.dumps(payload))
    return root
