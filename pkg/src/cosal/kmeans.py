"""Deterministic k-means++ seeding with Lloyd iterations.

Shared by the superpixel cluster constraint and the texton codebook. All
randomness flows through one numpy Generator so fixed seeds give fixed
clusterings; ties in assignment break toward the lowest cluster index.
"""

from __future__ import annotations

import numpy as np

MAX_ITER = 100


def _pairwise_sq(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centers[None, :, :]
    return (diff * diff).sum(axis=2)


def seed_centers(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: each new center drawn with probability ~ D^2."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    chosen = [int(rng.integers(n))]
    centers[0] = points[chosen[0]]
    for i in range(1, k):
        d2 = _pairwise_sq(points, centers[:i]).min(axis=1)
        total = d2.sum()
        if total == 0.0:
            # all remaining points coincide with a center; take the lowest
            # index not already used to keep seeding deterministic
            remaining = [j for j in range(n) if j not in chosen]
            idx = remaining[0] if remaining else chosen[0]
        else:
            idx = int(rng.choice(n, p=d2 / total))
        chosen.append(idx)
        centers[i] = points[idx]
    return centers


def kmeans(
    points: np.ndarray, k: int, rng_seed: int, max_iter: int = MAX_ITER
) -> tuple[np.ndarray, np.ndarray]:
    """Cluster points into k groups; returns (assignments, centers).

    Lloyd iterations stop at an assignment fixpoint or after max_iter. An
    empty cluster is re-seeded at the point currently farthest from its
    assigned center (processed in ascending cluster id, each point claimed
    at most once per pass).
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    rng = np.random.default_rng(rng_seed)
    centers = seed_centers(points, k, rng)
    assignments = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        d2 = _pairwise_sq(points, centers)
        new_assignments = d2.argmin(axis=1)
        counts = np.bincount(new_assignments, minlength=k)
        empties = np.flatnonzero(counts == 0)
        if empties.size:
            own = d2[np.arange(n), new_assignments].copy()
            for cluster in empties:
                far = int(own.argmax())
                centers[cluster] = points[far]
                new_assignments[far] = cluster
                own[far] = -1.0
        if np.array_equal(new_assignments, assignments) and not empties.size:
            break
        assignments = new_assignments
        for cluster in range(k):
            members = assignments == cluster
            if members.any():
                centers[cluster] = points[members].mean(axis=0)
    return assignments, centers
