"""Label propagation refinement of saliency maps, and the final fusion.

Three regimes share the same machinery and differ only in where the
foreground/background seeds come from: LP takes each map's own seeds, SLP
intersects the two maps' seeds and shares them, and CLP crosses them (the
inter map is refined with seeds from the intra map and vice versa, the
inter step running first). A toggle lets the intra step seed from the
refined inter map instead of the raw one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .depth_analysis import DepthConfidence
from .intra_saliency import SaliencyMap, minmax_normalize
from .superpixel import SuperpixelMap

REGIMES = ("LP", "SLP", "CLP")


@dataclass(frozen=True)
class AffinityGraph:
    """Symmetric nonnegative affinity over the superpixel adjacency.

    Weights exist only between adjacent superpixels and on the diagonal;
    self-loops are fixed at 1 so a seed's own evidence survives the
    propagation step.
    """

    w: np.ndarray


@dataclass(frozen=True)
class SeedSet:
    """Disjoint foreground/background superpixel id sets with their thresholds.

    tf and tb are None for derived (shared) seed sets that have no single
    source map.
    """

    foreground: np.ndarray
    background: np.ndarray
    tf: float | None = None
    tb: float | None = None


def affinity(sp: SuperpixelMap, conf: DepthConfidence, sigma_sq: float) -> AffinityGraph:
    """exp(-(color distance + gated depth distance) / sigma_sq) on adjacent pairs."""
    if sigma_sq <= 0:
        raise ValueError("sigma_sq must be positive")
    n = sp.count
    w = np.zeros((n, n), dtype=np.float64)
    for u, neighbors in enumerate(sp.adjacency):
        for v in neighbors:
            if v <= u:
                continue
            color = float(np.linalg.norm(sp.mean_lab[u] - sp.mean_lab[v]))
            depth = conf.lambda_d * abs(sp.mean_depth[u] - sp.mean_depth[v])
            w[u, v] = w[v, u] = np.exp(-(color + depth) / sigma_sq)
    np.fill_diagonal(w, 1.0)
    return AffinityGraph(w=w)


def select_seeds(smap: SaliencyMap, t_min: float, t_max: float) -> SeedSet:
    """Threshold a map into foreground and background seeds.

    Foreground threshold: max(2 * mean |score|, t_min); background:
    min(mean |score|, t_max). If the thresholds ever overlap, members of
    both sets are kept as foreground.
    """
    scores = smap.scores
    mean_abs = float(np.abs(scores).mean())
    tf = max(2.0 * mean_abs, t_min)
    tb = min(mean_abs, t_max)
    fg = scores >= tf
    bg = (scores <= tb) & ~fg
    return SeedSet(
        foreground=np.flatnonzero(fg),
        background=np.flatnonzero(bg),
        tf=tf,
        tb=tb,
    )


def shared_seeds(a: SeedSet, b: SeedSet) -> SeedSet:
    """Intersection of two seed sets (the SLP regime's shared seeds)."""
    return SeedSet(
        foreground=np.intersect1d(a.foreground, b.foreground),
        background=np.intersect1d(a.background, b.background),
    )


def propagate(
    graph: AffinityGraph,
    seeds: SeedSet,
    fill: SaliencyMap,
    origin: str | None = None,
) -> SaliencyMap:
    """One propagation pass: init 1 on F, 0 on B, fill elsewhere, multiply by W.

    The output is min-max normalized. origin defaults to the fill map's
    origin with an ``_opt`` suffix.
    """
    v0 = fill.scores.astype(np.float64).copy()
    v0[seeds.background] = 0.0
    v0[seeds.foreground] = 1.0
    propagated = graph.w @ v0
    if origin is None:
        origin = fill.origin + "_opt" if fill.origin in ("intra", "inter") else fill.origin
    return SaliencyMap(
        scores=minmax_normalize(propagated), labels=fill.labels, origin=origin
    )


def optimize(
    intra: SaliencyMap,
    inter: SaliencyMap,
    graph: AffinityGraph,
    regime: str,
    t_min: float,
    t_max: float,
    use_optimized_inter_seeds: bool = False,
) -> tuple[SaliencyMap, SaliencyMap]:
    """Refine both maps under the chosen seeding regime.

    Returns (intra_opt, inter_opt). For CLP, use_optimized_inter_seeds
    switches the second step's seed source from the raw inter map
    (default; keeps CLP identical to LP when both inputs coincide) to the
    refined one.
    """
    if regime not in REGIMES:
        raise ValueError(f"regime must be one of {REGIMES}, got {regime!r}")
    if regime == "CLP":
        inter_opt = propagate(graph, select_seeds(intra, t_min, t_max), inter)
        seed_source = inter_opt if use_optimized_inter_seeds else inter
        intra_opt = propagate(graph, select_seeds(seed_source, t_min, t_max), intra)
    elif regime == "LP":
        intra_opt = propagate(graph, select_seeds(intra, t_min, t_max), intra)
        inter_opt = propagate(graph, select_seeds(inter, t_min, t_max), inter)
    else:  # SLP
        seeds = shared_seeds(
            select_seeds(intra, t_min, t_max), select_seeds(inter, t_min, t_max)
        )
        intra_opt = propagate(graph, seeds, intra)
        inter_opt = propagate(graph, seeds, inter)
    return intra_opt, inter_opt


def fuse(
    intra: SaliencyMap,
    inter: SaliencyMap,
    intra_opt: SaliencyMap,
    inter_opt: SaliencyMap,
    gamma: tuple[float, float, float, float],
) -> SaliencyMap:
    """Convex combination of the four maps; stays in [0, 1] by construction."""
    if len(gamma) != 4 or abs(sum(gamma) - 1.0) > 1e-9:
        raise ValueError(f"gamma must hold 4 weights summing to 1, got {gamma!r}")
    maps = (intra, inter, intra_opt, inter_opt)
    scores = sum(g * m.scores for g, m in zip(gamma, maps))
    return SaliencyMap(scores=scores, labels=intra.labels, origin="fused")
