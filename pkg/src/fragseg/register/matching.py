"""Two-nearest-neighbor descriptor matching and the distance-ratio test."""

from __future__ import annotations

from math import inf

import numpy as np

from ..errors import EmptySet, MetricMismatch
from .types import DescriptorSet, MatchPair

_POPCOUNT = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1).sum(1).astype(np.uint16)


def _l2_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = a.astype(np.float64)
    b = b.astype(np.float64)
    d2 = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * (a @ b.T)
    return np.sqrt(np.maximum(d2, 0.0))


def _hamming_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0], b.shape[0]), dtype=np.uint16)
    # chunk queries to bound the (n_a, n_b, bytes) intermediate
    step = max(1, 2_000_000 // max(1, b.shape[0] * b.shape[1]))
    for i in range(0, a.shape[0], step):
        xor = a[i:i + step, None, :] ^ b[None, :, :]
        out[i:i + step] = _POPCOUNT[xor].sum(2)
    return out.astype(np.float64)


def match_two_nn(desc_a: DescriptorSet, desc_b: DescriptorSet) -> list[MatchPair]:
    """For every descriptor in ``a``, its two smallest distances into ``b``.

    ``d2`` is +inf when ``b`` holds a single descriptor, in which case the
    ratio test downstream always passes.
    """
    if len(desc_a) == 0 or len(desc_b) == 0:
        raise EmptySet("cannot match empty descriptor sets")
    if desc_a.metric != desc_b.metric:
        raise MetricMismatch(f"{desc_a.metric} vs {desc_b.metric}")

    if desc_a.metric == "L2":
        dists = _l2_distances(desc_a.vectors, desc_b.vectors)
    else:
        dists = _hamming_distances(desc_a.vectors, desc_b.vectors)

    matches: list[MatchPair] = []
    if dists.shape[1] == 1:
        for i in range(dists.shape[0]):
            matches.append(MatchPair(i, 0, float(dists[i, 0]), inf))
        return matches

    two = np.argpartition(dists, 1, axis=1)[:, :2]
    for i in range(dists.shape[0]):
        j0, j1 = two[i]
        a0, a1 = dists[i, j0], dists[i, j1]
        if (a0, j0) > (a1, j1):  # deterministic: smaller distance, then smaller index
            j0, j1, a0, a1 = j1, j0, a1, a0
        matches.append(MatchPair(i, int(j0), float(a0), float(a1)))
    return matches


def ratio_filter(matches: list[MatchPair], ratio: float = 0.80) -> list[MatchPair]:
    """Keep pairs whose best/second-best distance ratio is at most ``ratio``.

    The boundary is inclusive (a ratio of exactly 0.80 survives) and 0/0
    counts as 0, so exact duplicates always pass.
    """
    if not (0.0 < ratio < 1.0):
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    return [m for m in matches if m.d1 <= ratio * m.d2]
