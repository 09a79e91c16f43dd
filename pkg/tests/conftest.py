"""Shared synthetic data builders for the test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from cosal.dataset_io import GroupManifest, ManifestEntry, RgbdImage

SQUARE_SIZE = 16
SQUARE_COLOR = (220, 40, 40)
BASE_COLORS = ((60, 120, 60), (120, 120, 180), (150, 140, 100))
DEPTH_LEVELS = (0.30, 0.35, 0.25)
POSITIONS = ((10, 10), (24, 28), (36, 20))


def square_group(
    scrambled_depth: bool = False, seed: int = 7
) -> tuple[GroupManifest, list[RgbdImage]]:
    """Three 64x64 images sharing one flat-color square on textured backgrounds.

    The square sits at a distinct position per image with consistent near
    depth (0.9); backgrounds are noisy around per-image base colors and
    depth levels. scrambled_depth replaces the background depth with
    uniform noise, destroying any depth ordering outside the square.
    """
    rng = np.random.default_rng(seed)
    images = []
    for base, pos, level in zip(BASE_COLORS, POSITIONS, DEPTH_LEVELS):
        rgb = np.clip(
            np.asarray(base) + rng.integers(-18, 19, size=(64, 64, 3)), 0, 255
        ).astype(np.uint8)
        rows = slice(pos[0], pos[0] + SQUARE_SIZE)
        cols = slice(pos[1], pos[1] + SQUARE_SIZE)
        rgb[rows, cols] = SQUARE_COLOR
        depth = np.clip(level + rng.uniform(-0.12, 0.12, size=(64, 64)), 0.0, 1.0)
        gt = np.zeros((64, 64), np.uint8)
        gt[rows, cols] = 1
        if scrambled_depth:
            depth[gt == 0] = rng.uniform(0.0, 1.0, size=int((gt == 0).sum()))
        depth[gt == 1] = 0.9
        images.append(RgbdImage(rgb=rgb, depth=depth, gt=gt))
    entries = tuple(
        ManifestEntry(stem=f"im{i}", rgb_path=None, depth_path=None) for i in range(3)
    )
    return GroupManifest(group_name="squares", entries=entries), images


def write_square_group(
    root: Path, scrambled_depth: bool = False, seed: int = 7, with_gt: bool = True
) -> Path:
    """Persist the synthetic group in the on-disk dataset layout."""
    _, images = square_group(scrambled_depth=scrambled_depth, seed=seed)
    for sub in ("rgb", "depth") + (("gt",) if with_gt else ()):
        (root / sub).mkdir(parents=True, exist_ok=True)
    for i, image in enumerate(images):
        Image.fromarray(image.rgb).save(root / "rgb" / f"im{i}.png")
        depth8 = np.floor(image.depth * 255.0 + 0.5).astype(np.uint8)
        Image.fromarray(depth8, mode="L").save(root / "depth" / f"im{i}.png")
        if with_gt:
            Image.fromarray(image.gt * 255, mode="L").save(root / "gt" / f"im{i}.png")
    return root


def flat_group(seed: int = 0) -> tuple[GroupManifest, list[RgbdImage]]:
    """Two small flat images, useful for degenerate-path checks."""
    rng = np.random.default_rng(seed)
    images = []
    for value in (90, 160):
        rgb = np.full((32, 32, 3), value, np.uint8)
        rgb[4:12, 4:12] = (value + 60) % 256
        depth = rng.uniform(0.2, 0.8, size=(32, 32))
        images.append(RgbdImage(rgb=rgb, depth=depth, gt=None))
    entries = tuple(
        ManifestEntry(stem=f"im{i}", rgb_path=None, depth_path=None) for i in range(2)
    )
    return GroupManifest(group_name="flat", entries=entries), images
