"""Depth map reliability scoring.

The confidence scalar gates every downstream use of depth: similarity
matching, clustering features, affinity weights, and the adaptive weight on
the depth-histogram distance. A constant depth map scores exactly zero,
which disables the cue altogether.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_LEVELS = 256


@dataclass(frozen=True)
class DepthConfidence:
    lambda_d: float
    m_d: float
    sigma_d: float
    cv: float
    entropy_h: float
    levels: int


def depth_confidence(
    depth: np.ndarray,
    levels: int = DEFAULT_LEVELS,
    cv_convention: str = "mean_over_std",
) -> DepthConfidence:
    """Score depth reliability as exp((1 - m_d) * CV * H) - 1.

    m_d is the mean of the normalized depth raster, CV = m_d / sigma_d, and
    H is the natural-log entropy of the uniform ``levels``-bin histogram
    over [0, 1]. When the raster is constant (sigma_d = 0) the formula is
    indeterminate and the confidence is defined as 0. The score depends
    only on the value distribution, never on pixel positions.

    cv_convention="std_over_mean" flips the ratio to the conventional
    coefficient of variation; it exists for experimentation only.
    """
    depth = np.asarray(depth, dtype=np.float64)
    if depth.size == 0:
        raise ValueError("empty depth raster")
    if levels < 2:
        raise ValueError("levels must be >= 2")
    if cv_convention not in ("mean_over_std", "std_over_mean"):
        raise ValueError(f"unknown cv_convention {cv_convention!r}")

    m_d = float(depth.mean())
    # a constant raster must hit the degenerate rule exactly, but float
    # rounding can leave std() at ~1e-17 for constant input
    sigma_d = 0.0 if depth.min() == depth.max() else float(depth.std())
    counts, _ = np.histogram(depth, bins=levels, range=(0.0, 1.0))
    probs = counts[counts > 0] / depth.size
    entropy_h = float(-(probs * np.log(probs)).sum()) + 0.0

    if cv_convention == "mean_over_std":
        defined = sigma_d > 0.0
        cv = m_d / sigma_d if defined else 0.0
    else:
        defined = m_d > 0.0 and sigma_d > 0.0
        cv = sigma_d / m_d if defined else 0.0
    lambda_d = float(np.exp((1.0 - m_d) * cv * entropy_h) - 1.0) if defined else 0.0
    return DepthConfidence(
        lambda_d=lambda_d,
        m_d=m_d,
        sigma_d=sigma_d,
        cv=cv,
        entropy_h=entropy_h,
        levels=levels,
    )
