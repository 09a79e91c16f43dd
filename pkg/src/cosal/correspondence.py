"""Multi-constraint superpixel matching between ordered image pairs.

The binary match matrix between image i and image j intersects three
constraint sets per source superpixel: K-nearest-neighbor similarity,
saliency consistency, and cluster correspondence. Constraint sets are
represented as boolean matrices of shape (N_i, N_j); row m gives the set
for the m-th superpixel of image i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .depth_analysis import DepthConfidence
from .intra_saliency import SaliencyMap
from .kmeans import kmeans
from .superpixel import SuperpixelMap


@dataclass(frozen=True)
class SimilarityMatrix:
    """Pairwise superpixel similarity in (0, 1], gated by the weaker depth."""

    s: np.ndarray
    pair: tuple[int, int] = (-1, -1)


@dataclass(frozen=True)
class ClusterModel:
    assignments: np.ndarray
    centers: np.ndarray


@dataclass(frozen=True)
class MatchMatrix:
    """Binary superpixel correspondence for one ordered image pair."""

    ml: np.ndarray
    pair: tuple[int, int] = (-1, -1)


def similarity_matrix(
    sp_i: SuperpixelMap,
    sp_j: SuperpixelMap,
    conf_i: DepthConfidence,
    conf_j: DepthConfidence,
    sigma_sq: float,
    pair: tuple[int, int] = (-1, -1),
) -> SimilarityMatrix:
    """exp(-(||c_m - c_n|| + min(lambda_i, lambda_j) * |d_m - d_n|) / sigma_sq).

    Colors are mean L*a*b* vectors, depths are mean normalized depths; the
    min over the two images' depth confidences means one bad depth map
    silences the depth term for the whole pair.
    """
    if sigma_sq <= 0:
        raise ValueError("sigma_sq must be positive")
    color = np.linalg.norm(sp_i.mean_lab[:, None, :] - sp_j.mean_lab[None, :, :], axis=2)
    depth = np.abs(sp_i.mean_depth[:, None] - sp_j.mean_depth[None, :])
    gate = min(conf_i.lambda_d, conf_j.lambda_d)
    return SimilarityMatrix(s=np.exp(-(color + gate * depth) / sigma_sq), pair=pair)


def phi1_knn(sim: SimilarityMatrix, k_max: int) -> np.ndarray:
    """Top-k_max columns per row of the similarity matrix, ties to lower index."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    s = sim.s
    n_j = s.shape[1]
    keep = min(k_max, n_j)
    # stable sort on -s keeps the lower column index first among ties
    order = np.argsort(-s, axis=1, kind="stable")[:, :keep]
    phi1 = np.zeros(s.shape, dtype=bool)
    np.put_along_axis(phi1, order, True, axis=1)
    return phi1


def phi2_saliency_consistent(
    intra_i: SaliencyMap, intra_j: SaliencyMap, t1: float
) -> np.ndarray:
    """Pairs whose intra saliency scores differ by at most t1."""
    if not 0.0 <= t1 <= 1.0:
        raise ValueError("t1 must lie in [0, 1]")
    diff = np.abs(intra_i.scores[:, None] - intra_j.scores[None, :])
    return diff <= t1


def cluster_superpixels(
    sp: SuperpixelMap, conf: DepthConfidence, k: int, rng_seed: int
) -> ClusterModel:
    """k-means++ over per-superpixel [L*, a*, b*, lambda_d * depth] features.

    Channels are standardized to zero mean and unit variance before
    clustering (a constant channel becomes all zeros, so zero depth
    confidence reduces this to color-only clustering).
    """
    if sp.count < k:
        raise ValueError(f"need at least k={k} superpixels, have {sp.count}")
    features = np.column_stack([sp.mean_lab, conf.lambda_d * sp.mean_depth])
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    scale = np.where(std > 0, std, 1.0)
    features = np.where(std > 0, (features - mean) / scale, 0.0)
    assignments, centers = kmeans(features, k, rng_seed)
    return ClusterModel(assignments=assignments, centers=centers)


def phi3_cluster_match(model_i: ClusterModel, model_j: ClusterModel) -> np.ndarray:
    """Members of image j's cluster whose center is nearest to one's own cluster.

    For a superpixel in cluster p of image i, the set is every superpixel of
    image j assigned to the j-cluster with the smallest Euclidean distance
    between centers (ties to the lowest cluster id).
    """
    dist = np.linalg.norm(model_i.centers[:, None, :] - model_j.centers[None, :, :], axis=2)
    nearest = dist.argmin(axis=1)  # argmin takes the lowest index on ties
    return nearest[model_i.assignments][:, None] == model_j.assignments[None, :]


def match_matrix(
    phi1: np.ndarray,
    phi2: np.ndarray,
    phi3: np.ndarray,
    pair: tuple[int, int] = (-1, -1),
) -> MatchMatrix:
    """Intersection of the three constraint sets; rows may be all zero."""
    if not phi1.shape == phi2.shape == phi3.shape:
        raise ValueError("constraint matrices must share one shape")
    return MatchMatrix(ml=phi1 & phi2 & phi3, pair=pair)
