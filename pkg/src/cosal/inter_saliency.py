"""Inter saliency: transfer intra saliency through matched superpixels.

A superpixel's inter saliency is the average over the other images of the
image-similarity-weighted mean intra saliency of its matched superpixels,
where the mean divides by the full superpixel count of the other image
(unmatched superpixels contribute zero). Raw values are therefore small;
the rendered map is min-max normalized so the propagation thresholds
downstream see the full [0, 1] range.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .correspondence import MatchMatrix
from .intra_saliency import SaliencyMap, minmax_normalize
from .superpixel import SuperpixelMap


def inter_scores_raw(
    intra_scores: Sequence[np.ndarray],
    matches: Mapping[tuple[int, int], MatchMatrix],
    phis: Mapping[tuple[int, int], float],
    target: int,
) -> np.ndarray:
    """Unnormalized inter saliency scores for one image.

    phis values are clamped to [0, 1] before use; a negative fused
    similarity would otherwise subtract saliency, which is never intended.
    """
    n_images = len(intra_scores)
    if n_images < 2:
        raise ValueError("inter saliency needs at least 2 images")
    n_i = intra_scores[target].shape[0]
    scores = np.zeros(n_i, dtype=np.float64)
    for j in range(n_images):
        if j == target:
            continue
        phi = min(1.0, max(0.0, float(phis[(target, j)])))
        ml = matches[(target, j)].ml
        n_j = intra_scores[j].shape[0]
        scores += (phi / n_j) * (ml.astype(np.float64) @ intra_scores[j])
    return scores / (n_images - 1)


def inter_map(
    superpixels: Sequence[SuperpixelMap],
    intra_maps: Sequence[SaliencyMap],
    matches: Mapping[tuple[int, int], MatchMatrix],
    phis: Mapping[tuple[int, int], float],
    target: int,
) -> SaliencyMap:
    """Normalized inter saliency map for the target image."""
    raw = inter_scores_raw([m.scores for m in intra_maps], matches, phis, target)
    return SaliencyMap(
        scores=minmax_normalize(raw),
        labels=superpixels[target].labels,
        origin="inter",
    )
