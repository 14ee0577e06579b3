"""Shared value types for keypoint registration."""

from __future__ import annotations

from dataclasses import dataclass
from math import inf

import numpy as np

from ..errors import SingularTransform


@dataclass(frozen=True)
class Keypoint:
    """Detected interest point with sub-pixel position."""

    x: float
    y: float
    scale: float = 1.0
    orientation: float = 0.0
    response: float = 0.0


@dataclass(frozen=True)
class DescriptorSet:
    """Descriptor rows plus the metric they are compared under."""

    vectors: np.ndarray
    metric: str  # "L2" | "Hamming"

    def __post_init__(self):
        if self.metric not in ("L2", "Hamming"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.vectors.ndim != 2:
            raise ValueError("descriptors must be a 2-D array")

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class MatchPair:
    """Best and second-best neighbor of one query descriptor."""

    index_a: int
    index_b: int
    d1: float
    d2: float = inf

    def __post_init__(self):
        if self.d1 > self.d2:
            raise ValueError(f"d1 {self.d1} > d2 {self.d2}")


@dataclass(frozen=True)
class AffineTransform:
    """2x3 matrix mapping (x, y) to (ax + by + tx, cx + dy + ty)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (2, 3):
            raise ValueError(f"expected a 2x3 matrix, got {m.shape}")
        m = np.ascontiguousarray(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "AffineTransform":
        return cls(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))

    @property
    def det(self) -> float:
        m = self.matrix
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.matrix[:, :2].T + self.matrix[:, 2]

    def compose(self, other: "AffineTransform") -> "AffineTransform":
        """self after other: (self o other)(p) == self(other(p))."""
        a = np.vstack([self.matrix, [0.0, 0.0, 1.0]])
        b = np.vstack([other.matrix, [0.0, 0.0, 1.0]])
        return AffineTransform((a @ b)[:2])

    def inverse(self) -> "AffineTransform":
        if abs(self.det) < 1e-12:
            raise SingularTransform(f"determinant {self.det}")
        a = np.vstack([self.matrix, [0.0, 0.0, 1.0]])
        return AffineTransform(np.linalg.inv(a)[:2])


@dataclass(frozen=True)
class SweepCell:
    """One (extractor, tolerance) combination of the alignment sweep."""

    extractor: str
    tolerance: int
    inliers: int
    total_matches: int
    eligible: bool = True


@dataclass(frozen=True)
class AlignmentResult:
    """Winning transform of the sweep plus the full per-combination table."""

    transform: AffineTransform
    inlier_count: int
    extractor: str
    tolerance: int
    total_matches: int
    cells: tuple[SweepCell, ...] = ()

    def __post_init__(self):
        if self.inlier_count > self.total_matches:
            raise ValueError("inlier count exceeds match count")
