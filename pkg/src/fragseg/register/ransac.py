"""Robust affine estimation from matched point pairs.

Hypotheses come from minimal samples of three non-collinear pairs; the
largest consensus set is refit by least squares and the reported inlier
flags are recomputed against that refit transform, so the flags are always
self-consistent with the returned matrix. The iteration budget is fixed
(no adaptive early exit) to keep sweep results deterministic and
comparable across tolerances.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateInput, TooFewMatches
from .types import AffineTransform

_SCORE_CHUNK = 256


def ransac_affine(pts_a, pts_b, tolerance: float, seed: int,
                  max_iters: int = 2000) -> tuple[AffineTransform, np.ndarray]:
    """Fit ``pts_b ~ T(pts_a)``; returns the transform and inlier flags.

    A pair is an inlier when the Euclidean reprojection error is at most
    ``tolerance`` pixels. Deterministic for a fixed seed.
    """
    pa = np.asarray(pts_a, dtype=np.float64)
    pb = np.asarray(pts_b, dtype=np.float64)
    if pa.shape != pb.shape or pa.ndim != 2 or pa.shape[1] != 2:
        raise ValueError("point lists must both be (n, 2)")
    n = pa.shape[0]
    if n < 3:
        raise TooFewMatches(f"need at least 3 pairs, got {n}")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")

    rng = np.random.default_rng(seed)
    samples = np.empty((max_iters, 3), dtype=np.int64)
    for k in range(max_iters):
        samples[k] = rng.choice(n, size=3, replace=False)

    ones = np.ones((n, 1))
    design = np.hstack([pa, ones])  # rows (x, y, 1)
    lhs = design[samples]           # (iters, 3, 3)
    rhs = pb[samples]               # (iters, 3, 2)
    dets = np.linalg.det(lhs)
    usable = np.abs(dets) > 1e-8
    if not usable.any():
        raise DegenerateInput("every sampled triple is collinear")

    params = np.zeros((max_iters, 3, 2))
    params[usable] = np.linalg.solve(lhs[usable], rhs[usable])

    tol2 = float(tolerance) * float(tolerance)
    counts = np.zeros(max_iters, dtype=np.int64)
    for start in range(0, max_iters, _SCORE_CHUNK):
        chunk = params[start:start + _SCORE_CHUNK]
        pred = np.einsum("nc,kco->kno", design, chunk)
        err2 = ((pred - pb[None]) ** 2).sum(axis=2)
        counts[start:start + _SCORE_CHUNK] = (err2 <= tol2).sum(axis=1)
    counts[~usable] = -1

    best = int(np.argmax(counts))  # first maximum: deterministic tie-break
    best_params = params[best]
    err2 = (((design @ best_params) - pb) ** 2).sum(axis=1)
    consensus = err2 <= tol2

    refit, _, rank, _ = np.linalg.lstsq(design[consensus], pb[consensus], rcond=None)
    if rank == 3:
        best_params = refit

    transform = AffineTransform(best_params.T)
    final_err2 = (((design @ best_params) - pb) ** 2).sum(axis=1)
    return transform, final_err2 <= tol2
