"""Dataset loading, depth normalization, saliency persistence, and run configuration.

A group lives in one directory with the layout::

    group/
        rgb/       <stem>.png   8-bit RGB
        depth/     <stem>.png   8-bit grayscale, min-max normalized on load
        gt/        <stem>.png   optional binary ground-truth masks
        intra/     <stem>.png   optional precomputed per-image saliency maps
        semantic/  <stem>.bin|.txt  optional 4096-float semantic vectors

Stems in rgb/ and depth/ must match one to one; the optional folders may
cover any subset of stems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np
from PIL import Image

if TYPE_CHECKING:
    from .intra_saliency import SaliencyMap

SEMANTIC_DIM = 4096
MIN_IMAGE_SIDE = 16

OPTIMIZERS = ("LP", "SLP", "CLP")
DEPTH_POLARITIES = ("near_is_high", "near_is_low")
INTRA_PROVIDERS = ("file", "baseline")
CV_CONVENTIONS = ("mean_over_std", "std_over_mean")


class DatasetError(ValueError):
    """The on-disk group layout or raster contents are invalid."""


class ConfigError(ValueError):
    """A run configuration value is out of range or malformed."""


@dataclass(frozen=True)
class ManifestEntry:
    stem: str
    rgb_path: Path
    depth_path: Path
    gt_path: Path | None = None
    intra_path: Path | None = None
    semantic_path: Path | None = None


@dataclass(frozen=True)
class GroupManifest:
    group_name: str
    entries: tuple[ManifestEntry, ...]


@dataclass(frozen=True)
class RgbdImage:
    """Aligned RGB raster, normalized depth raster, and optional ground truth.

    rgb is HxWx3 uint8, depth is HxW float64 in [0, 1] where larger means
    nearer, gt (when present) is HxW uint8 holding only {0, 1}.
    """

    rgb: np.ndarray
    depth: np.ndarray
    gt: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.rgb.shape[0], self.rgb.shape[1]


@dataclass(frozen=True)
class RunConfig:
    """Pipeline parameters; defaults match the published operating point."""

    superpixel_count: int = 200
    cluster_count: int = 10
    max_matches: int = 40
    sigma_sq: float = 0.1
    t1: float = 0.3
    t2: float = 0.2
    t_min: float = 0.6
    t_max: float = 0.2
    gamma: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    beta_sq: float = 0.3
    optimizer: str = "CLP"
    depth_polarity: str = "near_is_high"
    rng_seed: int = 0
    use_depth: bool = True
    use_optimized_inter_seeds: bool = False
    cv_convention: str = "mean_over_std"
    intra_provider: str = "baseline"

    def __post_init__(self) -> None:
        if len(self.gamma) != 4:
            raise ConfigError("gamma must hold exactly 4 weights")
        if abs(sum(self.gamma) - 1.0) > 1e-9:
            raise ConfigError(f"gamma must sum to 1, got {sum(self.gamma)!r}")
        for name in ("t1", "t2", "t_min", "t_max"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value!r}")
        if self.max_matches < 1:
            raise ConfigError("max_matches must be >= 1")
        if self.cluster_count < 2:
            raise ConfigError("cluster_count must be >= 2")
        if self.superpixel_count < 4:
            raise ConfigError("superpixel_count must be >= 4")
        if self.sigma_sq <= 0:
            raise ConfigError("sigma_sq must be positive")
        if self.beta_sq <= 0:
            raise ConfigError("beta_sq must be positive")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}")
        if self.depth_polarity not in DEPTH_POLARITIES:
            raise ConfigError(f"depth_polarity must be one of {DEPTH_POLARITIES}")
        if self.intra_provider not in INTRA_PROVIDERS:
            raise ConfigError(f"intra_provider must be one of {INTRA_PROVIDERS}")
        if self.cv_convention not in CV_CONVENTIONS:
            raise ConfigError(f"cv_convention must be one of {CV_CONVENTIONS}")


_BOOL_FIELDS = {"use_depth", "use_optimized_inter_seeds"}
_INT_FIELDS = {"superpixel_count", "cluster_count", "max_matches", "rng_seed"}
_FLOAT_FIELDS = {"sigma_sq", "t1", "t2", "t_min", "t_max", "beta_sq"}
_STR_FIELDS = {"optimizer", "depth_polarity", "cv_convention", "intra_provider"}


def load_config(path: str | Path) -> RunConfig:
    """Parse a ``key = value`` config file into a RunConfig.

    Blank lines and ``#`` comments are ignored; ``gamma`` takes four
    comma-separated weights; booleans accept true/false.
    """
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, text = line.partition("=")
        key, text = key.strip(), text.strip()
        if key in _INT_FIELDS:
            values[key] = int(text)
        elif key in _FLOAT_FIELDS:
            values[key] = float(text)
        elif key in _BOOL_FIELDS:
            if text.lower() not in ("true", "false"):
                raise ConfigError(f"{path}:{lineno}: {key} must be true or false")
            values[key] = text.lower() == "true"
        elif key in _STR_FIELDS:
            values[key] = text
        elif key == "gamma":
            values[key] = tuple(float(part) for part in text.split(","))
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    return RunConfig(**values)


def _read_raster(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img)
    except OSError as exc:
        raise DatasetError(f"unreadable raster {path}: {exc}") from exc


def _read_rgb(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except OSError as exc:
        raise DatasetError(f"unreadable raster {path}: {exc}") from exc


def _to_gray(raster: np.ndarray, path: Path) -> np.ndarray:
    if raster.ndim == 3:
        raster = raster[..., 0]
    if raster.ndim != 2:
        raise DatasetError(f"{path}: expected a single-channel raster")
    return raster


def normalize_depth(raw: np.ndarray, polarity: str = "near_is_high") -> np.ndarray:
    """Min-max normalize a raw depth raster to [0, 1], higher = nearer.

    A constant raster maps to all zeros, which downstream yields zero
    depth confidence and disables the depth cue.
    """
    raw = np.asarray(raw, dtype=np.float64)
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return np.zeros_like(raw)
    depth = (raw - lo) / (hi - lo)
    if polarity == "near_is_low":
        depth = 1.0 - depth
    return depth


def _stems(folder: Path, suffixes: Sequence[str] = (".png",)) -> dict[str, Path]:
    return {
        p.stem: p
        for p in sorted(folder.iterdir())
        if p.is_file() and p.suffix.lower() in suffixes
    }


def load_group(root_dir: str | Path, config: RunConfig) -> tuple[GroupManifest, list[RgbdImage]]:
    """Load one image group from its directory.

    Entries are sorted by file stem so repeated loads are deterministic.
    Raises DatasetError on missing folders, stem mismatches between rgb/
    and depth/, unreadable rasters, or dimension mismatches within an entry.
    """
    root = Path(root_dir)
    rgb_dir, depth_dir = root / "rgb", root / "depth"
    for folder in (rgb_dir, depth_dir):
        if not folder.is_dir():
            raise DatasetError(f"missing folder {folder}")

    rgb_stems = _stems(rgb_dir)
    depth_stems = _stems(depth_dir)
    if set(rgb_stems) != set(depth_stems):
        odd = sorted(set(rgb_stems) ^ set(depth_stems))
        raise DatasetError(f"stem mismatch between rgb/ and depth/ in {root}: {odd}")
    if len(rgb_stems) < 2:
        raise DatasetError(f"group {root} needs at least 2 images, found {len(rgb_stems)}")

    gt_stems = _stems(root / "gt") if (root / "gt").is_dir() else {}
    intra_stems = _stems(root / "intra") if (root / "intra").is_dir() else {}
    semantic_stems = (
        _stems(root / "semantic", (".bin", ".txt")) if (root / "semantic").is_dir() else {}
    )

    entries: list[ManifestEntry] = []
    images: list[RgbdImage] = []
    for stem in sorted(rgb_stems):
        entry = ManifestEntry(
            stem=stem,
            rgb_path=rgb_stems[stem],
            depth_path=depth_stems[stem],
            gt_path=gt_stems.get(stem),
            intra_path=intra_stems.get(stem),
            semantic_path=semantic_stems.get(stem),
        )
        rgb = _read_rgb(entry.rgb_path)
        h, w = rgb.shape[0], rgb.shape[1]
        if min(h, w) < MIN_IMAGE_SIDE:
            raise DatasetError(f"{entry.rgb_path}: image sides must be >= {MIN_IMAGE_SIDE}")
        raw_depth = _to_gray(_read_raster(entry.depth_path), entry.depth_path)
        if raw_depth.shape != (h, w):
            raise DatasetError(
                f"{stem}: depth raster {raw_depth.shape} does not match rgb {(h, w)}"
            )
        depth = normalize_depth(raw_depth, config.depth_polarity)
        gt = None
        if entry.gt_path is not None:
            gt_raw = _to_gray(_read_raster(entry.gt_path), entry.gt_path)
            if gt_raw.shape != (h, w):
                raise DatasetError(
                    f"{stem}: gt raster {gt_raw.shape} does not match rgb {(h, w)}"
                )
            gt = (gt_raw != 0).astype(np.uint8)
        entries.append(entry)
        images.append(RgbdImage(rgb=rgb, depth=depth, gt=gt))

    manifest = GroupManifest(group_name=root.name, entries=tuple(entries))
    return manifest, images


def load_gray(path: str | Path) -> np.ndarray:
    """Load a grayscale raster as HxW uint8 (first channel if multi-channel)."""
    path = Path(path)
    raster = _to_gray(_read_raster(path), path)
    if raster.dtype != np.uint8:
        raster = np.clip(raster, 0, 255).astype(np.uint8)
    return raster


def load_semantic(path: str | Path) -> np.ndarray:
    """Load a 4096-float semantic sidecar (.bin little-endian f32 or .txt).

    Binary values round-trip bit exactly; text mode parses one value per line.
    """
    path = Path(path)
    if path.suffix.lower() == ".bin":
        vec = np.fromfile(path, dtype="<f4")
    elif path.suffix.lower() == ".txt":
        vec = np.loadtxt(path, dtype=np.float32).reshape(-1)
    else:
        raise DatasetError(f"semantic sidecar {path} must end in .bin or .txt")
    if vec.size != SEMANTIC_DIM:
        raise DatasetError(f"{path}: expected {SEMANTIC_DIM} values, found {vec.size}")
    if not np.all(np.isfinite(vec)):
        raise DatasetError(f"{path}: semantic vector holds non-finite values")
    return vec


def save_saliency(smap: "SaliencyMap | np.ndarray", path: str | Path) -> None:
    """Write a saliency map (or bare [0, 1] raster) as an 8-bit grayscale PNG.

    Pixel value is round(score * 255) with halves rounding up, so a save/load
    round trip moves any score by at most 1/255.
    """
    raster = np.asarray(getattr(smap, "raster", smap), dtype=np.float64)
    if raster.min() < 0.0 or raster.max() > 1.0:
        raise ValueError("saliency scores must lie in [0, 1]")
    encoded = np.floor(raster * 255.0 + 0.5).astype(np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(encoded, mode="L").save(path)
