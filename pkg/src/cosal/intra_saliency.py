"""Superpixel-level saliency maps and the per-image (intra) saliency providers.

Two providers exist: loading a precomputed grayscale map from disk (any
single-image saliency method can feed the pipeline this way), and a built-in
depth-aware global-contrast baseline so the pipeline runs standalone.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dataset_io import RgbdImage
from .depth_analysis import DepthConfidence
from .superpixel import SuperpixelMap

ORIGINS = ("intra", "inter", "intra_opt", "inter_opt", "fused")

CONTRAST_SIGMA_FRACTION = 0.25  # of the image diagonal, for spatial weighting
CENTER_SIGMA_FRACTION = 0.5  # of the image diagonal, for the center prior
CONTRAST_EPS = 1e-9  # below this, colors/depths count as identical


def minmax_normalize(values: np.ndarray) -> np.ndarray:
    """Map values to [0, 1] as (x - min) / (max - min); constant input -> zeros.

    This is the one normalization convention used everywhere in the pipeline.
    """
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


@dataclass(frozen=True)
class SaliencyMap:
    """Per-superpixel scores in [0, 1] plus the label raster to render them."""

    scores: np.ndarray
    labels: np.ndarray
    origin: str

    def __post_init__(self) -> None:
        if self.origin not in ORIGINS:
            raise ValueError(f"origin must be one of {ORIGINS}, got {self.origin!r}")

    @property
    def raster(self) -> np.ndarray:
        """HxW rendering where each pixel takes its superpixel's score exactly."""
        return self.scores[self.labels]

    def with_scores(self, scores: np.ndarray, origin: str | None = None) -> "SaliencyMap":
        return replace(self, scores=np.asarray(scores, dtype=np.float64),
                       origin=origin or self.origin)


def intra_from_file(sp: SuperpixelMap, raster: np.ndarray) -> SaliencyMap:
    """Aggregate an 8-bit grayscale saliency raster to superpixel level.

    Each superpixel takes the mean of its pixels' raster values over 255,
    then scores are min-max normalized across the image's superpixels.
    """
    raster = np.asarray(raster, dtype=np.float64)
    if raster.shape != sp.shape:
        raise ValueError(f"raster shape {raster.shape} does not match image {sp.shape}")
    sums = np.bincount(sp.labels.ravel(), weights=raster.ravel(), minlength=sp.count)
    scores = minmax_normalize(sums / sp.pixel_count / 255.0)
    return SaliencyMap(scores=scores, labels=sp.labels, origin="intra")


def intra_baseline(
    image: RgbdImage, sp: SuperpixelMap, conf: DepthConfidence
) -> SaliencyMap:
    """Spatially-weighted global contrast baseline with a center prior.

    Contrast of a superpixel against another combines the L*a*b* color
    distance with the depth-confidence-gated depth distance, weighted by
    the other superpixel's area and a Gaussian falloff on centroid
    distance. With zero depth confidence the result is independent of the
    depth raster. A fully uniform image yields all-zero scores.
    """
    h, w = image.shape
    diag = float(np.hypot(h, w))

    color_dist = np.linalg.norm(sp.mean_lab[:, None, :] - sp.mean_lab[None, :, :], axis=2)
    depth_dist = np.abs(sp.mean_depth[:, None] - sp.mean_depth[None, :])
    contrast = color_dist + conf.lambda_d * depth_dist
    # identical colors can differ by ~1e-14 from float accumulation order;
    # without the snap a perfectly flat image normalizes that noise to [0,1]
    # instead of hitting the all-zero degenerate rule
    contrast[contrast < CONTRAST_EPS] = 0.0

    sq_dist = ((sp.centroid[:, None, :] - sp.centroid[None, :, :]) ** 2).sum(axis=2)
    spatial = np.exp(-sq_dist / (2.0 * (CONTRAST_SIGMA_FRACTION * diag) ** 2))

    raw = (sp.pixel_count[None, :] * contrast * spatial).sum(axis=1)
    scores = minmax_normalize(raw)

    center = np.array([(w - 1) / 2.0, (h - 1) / 2.0])
    center_sq = ((sp.centroid - center) ** 2).sum(axis=1)
    prior = np.exp(-center_sq / (2.0 * (CENTER_SIGMA_FRACTION * diag) ** 2))
    scores = minmax_normalize(scores * prior)
    return SaliencyMap(scores=scores, labels=sp.labels, origin="intra")
