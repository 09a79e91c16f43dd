"""End-to-end processing of one image group."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
from skimage.color import rgb2gray

from . import clp, correspondence, inter_saliency
from .dataset_io import (
    DatasetError,
    GroupManifest,
    RgbdImage,
    RunConfig,
    load_gray,
    load_semantic,
    save_saliency,
)
from .depth_analysis import DepthConfidence, depth_confidence
from .image_descriptors import (
    ImageDescriptor,
    PairSimilarity,
    describe_image,
    pair_similarity,
    texton_histograms,
)
from .intra_saliency import SaliencyMap, intra_baseline, intra_from_file
from .superpixel import SuperpixelMap, segment

MAP_FAMILIES = ("intra", "inter", "intra_opt", "inter_opt", "cosal")


@dataclass
class GroupResult:
    manifest: GroupManifest
    config: RunConfig
    images: list[RgbdImage]
    superpixels: list[SuperpixelMap]
    confidences: list[DepthConfidence]
    intra: list[SaliencyMap]
    descriptors: list[ImageDescriptor]
    pair_sims: dict[tuple[int, int], PairSimilarity]
    matches: dict[tuple[int, int], correspondence.MatchMatrix]
    inter: list[SaliencyMap]
    intra_opt: list[SaliencyMap]
    inter_opt: list[SaliencyMap]
    fused: list[SaliencyMap]
    timings: dict[str, float]

    def maps_of(self, family: str) -> list[SaliencyMap]:
        maps = {
            "intra": self.intra,
            "inter": self.inter,
            "intra_opt": self.intra_opt,
            "inter_opt": self.inter_opt,
            "cosal": self.fused,
        }
        return maps[family]


def _intra_provider(
    manifest: GroupManifest,
    images: list[RgbdImage],
    superpixels: list[SuperpixelMap],
    confidences: list[DepthConfidence],
    config: RunConfig,
) -> list[SaliencyMap]:
    maps = []
    for entry, image, sp, conf in zip(manifest.entries, images, superpixels, confidences):
        if config.intra_provider == "file":
            if entry.intra_path is None:
                raise DatasetError(
                    f"{manifest.group_name}/{entry.stem}: intra provider 'file' "
                    "requires an intra/ sidecar raster"
                )
            raster = load_gray(entry.intra_path)
            if raster.shape != image.shape:
                raise DatasetError(
                    f"{manifest.group_name}/{entry.stem}: intra raster shape "
                    f"{raster.shape} does not match image {image.shape}"
                )
            maps.append(intra_from_file(sp, raster))
        else:
            maps.append(intra_baseline(image, sp, conf))
    return maps


def process_group(
    manifest: GroupManifest, images: list[RgbdImage], config: RunConfig
) -> GroupResult:
    """Run the full pipeline on one loaded group.

    Stages: segmentation, depth confidence, intra saliency, descriptors,
    pairwise matching, inter saliency, propagation refinement, fusion.
    Wall-clock seconds per stage are collected in the result's timings.
    """
    n = len(images)
    if n < 2:
        raise DatasetError(f"group {manifest.group_name} needs at least 2 images")
    timings: dict[str, float] = {}

    def timed(stage):
        class _Timer:
            def __enter__(self):
                self.start = time.perf_counter()

            def __exit__(self, *exc):
                timings[stage] = timings.get(stage, 0.0) + time.perf_counter() - self.start

        return _Timer()

    with timed("segment"):
        superpixels = [segment(im, config.superpixel_count, config.rng_seed) for im in images]

    with timed("depth_confidence"):
        confidences = [
            depth_confidence(im.depth, cv_convention=config.cv_convention) for im in images
        ]
        if not config.use_depth:
            confidences = [replace(c, lambda_d=0.0) for c in confidences]

    with timed("intra"):
        intra = _intra_provider(manifest, images, superpixels, confidences, config)

    with timed("descriptors"):
        grays = [rgb2gray(im.rgb) for im in images]
        textons = texton_histograms(grays, rng_seed=config.rng_seed)
        semantics = [
            load_semantic(e.semantic_path) if e.semantic_path is not None else None
            for e in manifest.entries
        ]
        descriptors = [
            describe_image(im, sal, conf, semantic=sem, texton_hist=tex)
            for im, sal, conf, sem, tex in zip(images, intra, confidences, semantics, textons)
        ]

    with timed("matching"):
        pair_sims: dict[tuple[int, int], PairSimilarity] = {}
        for i in range(n):
            for j in range(i + 1, n):
                ps = pair_similarity(
                    descriptors[i], descriptors[j], config.t2, use_depth=config.use_depth
                )
                pair_sims[(i, j)] = pair_sims[(j, i)] = ps
        clusters = [
            correspondence.cluster_superpixels(
                superpixels[i], confidences[i], config.cluster_count, config.rng_seed + i
            )
            for i in range(n)
        ]
        matches: dict[tuple[int, int], correspondence.MatchMatrix] = {}
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                sim = correspondence.similarity_matrix(
                    superpixels[i],
                    superpixels[j],
                    confidences[i],
                    confidences[j],
                    config.sigma_sq,
                    pair=(i, j),
                )
                phi1 = correspondence.phi1_knn(sim, config.max_matches)
                phi2 = correspondence.phi2_saliency_consistent(intra[i], intra[j], config.t1)
                phi3 = correspondence.phi3_cluster_match(clusters[i], clusters[j])
                matches[(i, j)] = correspondence.match_matrix(phi1, phi2, phi3, pair=(i, j))

    with timed("inter"):
        phis = {key: ps.phi for key, ps in pair_sims.items()}
        inter = [
            inter_saliency.inter_map(superpixels, intra, matches, phis, i) for i in range(n)
        ]

    with timed("optimize"):
        intra_opt, inter_opt = [], []
        for i in range(n):
            graph = clp.affinity(superpixels[i], confidences[i], config.sigma_sq)
            opt_intra, opt_inter = clp.optimize(
                intra[i],
                inter[i],
                graph,
                config.optimizer,
                config.t_min,
                config.t_max,
                config.use_optimized_inter_seeds,
            )
            intra_opt.append(opt_intra)
            inter_opt.append(opt_inter)

    with timed("fuse"):
        fused = [
            clp.fuse(intra[i], inter[i], intra_opt[i], inter_opt[i], config.gamma)
            for i in range(n)
        ]

    return GroupResult(
        manifest=manifest,
        config=config,
        images=images,
        superpixels=superpixels,
        confidences=confidences,
        intra=intra,
        descriptors=descriptors,
        pair_sims=pair_sims,
        matches=matches,
        inter=inter,
        intra_opt=intra_opt,
        inter_opt=inter_opt,
        fused=fused,
        timings=timings,
    )


def save_group_maps(result: GroupResult, out_dir) -> dict:
    """Persist the five map families as PNGs; returns a manifest fragment."""
    from pathlib import Path

    out_dir = Path(out_dir)
    fragment: dict = {}
    for family in MAP_FAMILIES:
        for entry, smap in zip(result.manifest.entries, result.maps_of(family)):
            path = out_dir / family / f"{entry.stem}.png"
            save_saliency(smap, path)
            fragment.setdefault(entry.stem, {})[family] = str(
                Path(family) / f"{entry.stem}.png"
            )
    return fragment
