"""Image-set loading, raster primitives and color-space conversions.

Rasters are thin immutable wrappers around uint8 numpy arrays so that
dimension invariants are checked once at construction and the arrays can be
shared freely between parallel workers.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, DimensionMismatch, MissingFile, WktParseError

logger = logging.getLogger(__name__)

# Resolution of the reference scanning rig; all pixel-denominated defaults
# are expressed at this density and rescaled when metadata says otherwise.
DEFAULT_PPI = 1215.0

_LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RasterGray8:
    """Single-channel 8-bit raster, row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.dtype != np.uint8:
            raise DecodeError("grayscale raster must be a 2-D uint8 array")
        object.__setattr__(self, "pixels", _freeze(self.pixels))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class RasterRGB:
    """Three-channel 8-bit raster, row-major (R, G, B)."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3 or self.pixels.dtype != np.uint8:
            raise DecodeError("RGB raster must be an HxWx3 uint8 array")
        object.__setattr__(self, "pixels", _freeze(self.pixels))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class RasterHSV:
    """8-bit HSV raster; hue wraps so that 360 degrees map to 256.

    Only produced by :func:`rgb_to_hsv`; with the 0..255 hue scale the full
    hue circle fits the byte range, so a (0,...)..(255,...) bound spans every
    hue.
    """

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3 or self.pixels.dtype != np.uint8:
            raise DecodeError("HSV raster must be an HxWx3 uint8 array")
        object.__setattr__(self, "pixels", _freeze(self.pixels))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class FragmentImageSet:
    """The four registered rasters of one plate-fragment plus PPI metadata."""

    plate_id: str
    fragment_id: str
    recto_color: RasterRGB
    recto_ir: RasterGray8
    verso_color: RasterRGB
    verso_ir: RasterGray8
    ppi: float = DEFAULT_PPI

    def __post_init__(self):
        if (self.recto_color.width, self.recto_color.height) != (self.recto_ir.width, self.recto_ir.height):
            raise DimensionMismatch(
                f"recto color {self.recto_color.width}x{self.recto_color.height} vs "
                f"recto IR {self.recto_ir.width}x{self.recto_ir.height}"
            )
        if (self.verso_color.width, self.verso_color.height) != (self.verso_ir.width, self.verso_ir.height):
            raise DimensionMismatch(
                f"verso color {self.verso_color.width}x{self.verso_color.height} vs "
                f"verso IR {self.verso_ir.width}x{self.verso_ir.height}"
            )
        if not self.ppi > 0:
            raise ValueError(f"ppi must be positive, got {self.ppi}")

    @property
    def set_id(self) -> str:
        return f"{self.plate_id}_{self.fragment_id}"


@dataclass(frozen=True)
class DatasetSplit:
    """Train/validation/test partition, disjoint at the manuscript (plate) level."""

    train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]

    def __post_init__(self):
        plates = [
            {sid.rsplit("_", 1)[0] for sid in part}
            for part in (self.train, self.validation, self.test)
        ]
        for i in range(3):
            for j in range(i + 1, 3):
                shared = plates[i] & plates[j]
                if shared:
                    raise ValueError(f"splits share manuscripts: {sorted(shared)}")


def split_dataset(set_ids: list[str], seed: int = 0,
                  sizes: tuple[int, int, int] = (100, 20, 19)) -> DatasetSplit:
    """Randomly partition set ids into train/validation/test, keeping all
    fragments of one plate in the same part."""
    by_plate: dict[str, list[str]] = {}
    for sid in set_ids:
        by_plate.setdefault(sid.rsplit("_", 1)[0], []).append(sid)
    plates = sorted(by_plate)
    rng = np.random.default_rng(seed)
    rng.shuffle(plates)
    parts: list[list[str]] = [[], [], []]
    want = list(sizes)
    for plate in plates:
        frags = sorted(by_plate[plate])
        # fill in order train -> validation -> test
        for k in range(3):
            if len(parts[k]) < want[k]:
                parts[k].extend(frags)
                break
        else:
            parts[0].extend(frags)
    return DatasetSplit(tuple(parts[0]), tuple(parts[1]), tuple(parts[2]))


def _decode(path: Path, expect: str) -> np.ndarray:
    if not path.exists():
        raise MissingFile(str(path))
    try:
        img = Image.open(path)
        img.load()
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    arr = np.asarray(img)
    if arr.dtype == np.uint16:
        arr = (arr >> 8).astype(np.uint8)  # keep the high byte
    if arr.dtype != np.uint8:
        raise DecodeError(f"{path}: unsupported bit depth {arr.dtype}")
    if expect == "gray":
        if arr.ndim == 3:
            raise DecodeError(f"{path}: expected grayscale, got {arr.shape[2]} channels")
        return arr
    if arr.ndim == 2:
        raise DecodeError(f"{path}: expected RGB, got grayscale")
    if arr.shape[2] == 4:
        arr = arr[:, :, :3]
    if arr.shape[2] != 3:
        raise DecodeError(f"{path}: expected RGB, got {arr.shape[2]} channels")
    return arr


def load_image_set(recto_color: str | Path, recto_ir: str | Path,
                   verso_color: str | Path, verso_ir: str | Path,
                   ppi: float | None = None,
                   plate_id: str = "", fragment_id: str = "") -> FragmentImageSet:
    """Load the four rasters of one image set and verify dimension invariants.

    Grayscale (IR) inputs are passed through unmodified; color inputs must be
    8-bit RGB. 16-bit inputs are reduced to 8 bits by dropping the low byte.
    """
    return FragmentImageSet(
        plate_id=plate_id,
        fragment_id=fragment_id,
        recto_color=RasterRGB(_decode(Path(recto_color), "rgb")),
        recto_ir=RasterGray8(_decode(Path(recto_ir), "gray")),
        verso_color=RasterRGB(_decode(Path(verso_color), "rgb")),
        verso_ir=RasterGray8(_decode(Path(verso_ir), "gray")),
        ppi=DEFAULT_PPI if ppi is None else float(ppi),
    )


_SET_DIR_RE = re.compile(r"^(?P<plate>.+)_(?P<frag>[^_]+)$")


def _find_image(set_dir: Path, stem: str) -> Path:
    for ext in ("png", "tif", "tiff"):
        p = set_dir / f"{stem}.{ext}"
        if p.exists():
            return p
    raise MissingFile(str(set_dir / f"{stem}.png"))


def load_set_dir(set_dir: str | Path, ppi: float | None = None) -> FragmentImageSet:
    """Load ``<root>/<plate>_<frag>/{recto,verso}_{color,ir}.(png|tif)``."""
    set_dir = Path(set_dir)
    m = _SET_DIR_RE.match(set_dir.name)
    if not m:
        raise MissingFile(f"{set_dir}: directory name is not <plate>_<frag>")
    return load_image_set(
        _find_image(set_dir, "recto_color"),
        _find_image(set_dir, "recto_ir"),
        _find_image(set_dir, "verso_color"),
        _find_image(set_dir, "verso_ir"),
        ppi=ppi,
        plate_id=m.group("plate"),
        fragment_id=m.group("frag"),
    )


def discover_sets(root: str | Path) -> list[str]:
    """Return sorted set ids (directory names) under a corpus root."""
    root = Path(root)
    out = []
    for child in sorted(root.iterdir()):
        if child.is_dir() and _SET_DIR_RE.match(child.name):
            try:
                _find_image(child, "recto_color")
            except MissingFile:
                continue
            out.append(child.name)
    return out


def to_grayscale(img: RasterRGB) -> RasterGray8:
    """Rec. 601 luma: round(0.299 R + 0.587 G + 0.114 B), clamped to [0, 255]."""
    r, g, b = _LUMA_WEIGHTS
    luma = (img.pixels[:, :, 0] * r + img.pixels[:, :, 1] * g + img.pixels[:, :, 2] * b)
    return RasterGray8(np.clip(np.rint(luma), 0, 255).astype(np.uint8))


def rgb_to_hsv(img: RasterRGB) -> RasterHSV:
    """Standard hexcone HSV with hue scaled to the byte range.

    V = max(R,G,B); S = round(255 (V - min)/V) (0 when V = 0); H = hue in
    degrees times 256/360, rounded and wrapped into [0, 256).
    """
    rgb = img.pixels.astype(np.float64)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    v = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = v - mn

    s = np.zeros_like(v)
    nz = v > 0
    s[nz] = np.rint(255.0 * delta[nz] / v[nz])

    h_deg = np.zeros_like(v)
    d = delta > 0
    rmax = d & (v == r)
    gmax = d & ~rmax & (v == g)
    bmax = d & ~rmax & ~gmax
    h_deg[rmax] = 60.0 * ((g[rmax] - b[rmax]) / delta[rmax] % 6.0)
    h_deg[gmax] = 60.0 * ((b[gmax] - r[gmax]) / delta[gmax] + 2.0)
    h_deg[bmax] = 60.0 * ((r[bmax] - g[bmax]) / delta[bmax] + 4.0)
    h = np.rint(h_deg * 256.0 / 360.0) % 256

    out = np.stack([h, s, v], axis=2).astype(np.uint8)
    return RasterHSV(out)


def flip_horizontal(img):
    """Mirror around the vertical axis: output (x, y) reads source (W-1-x, y).

    Works on any raster wrapper or mask; an involution.
    """
    flipped = img.pixels[:, ::-1] if hasattr(img, "pixels") else img.bits[:, ::-1]
    return type(img)(np.ascontiguousarray(flipped))


def load_wkt_ground_truth(set_dir: str | Path, fragment_id: str = "") -> list:
    """Parse every ``gt/*.wkt`` file of a set; empty list means no ground truth."""
    from .geometry import from_wkt

    gt_dir = Path(set_dir) / "gt"
    polys = []
    if not gt_dir.is_dir():
        return polys
    for path in sorted(gt_dir.glob("*.wkt")):
        text = path.read_text(encoding="ascii")
        try:
            parsed = from_wkt(text)
        except WktParseError as exc:
            raise WktParseError(exc.message, position=exc.position, filename=path.name) from exc
        polys.extend(parsed if isinstance(parsed, list) else [parsed])
    return polys
