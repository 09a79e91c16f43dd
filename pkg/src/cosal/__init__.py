"""Co-saliency detection for groups of RGBD images."""

from .dataset_io import GroupManifest, RgbdImage, RunConfig, load_group, save_saliency
from .depth_analysis import DepthConfidence, depth_confidence
from .intra_saliency import SaliencyMap, intra_baseline, intra_from_file, minmax_normalize
from .pipeline import GroupResult, process_group
from .superpixel import SuperpixelMap, segment

__all__ = [
    "DepthConfidence",
    "GroupManifest",
    "GroupResult",
    "RgbdImage",
    "RunConfig",
    "SaliencyMap",
    "SuperpixelMap",
    "depth_confidence",
    "intra_baseline",
    "intra_from_file",
    "load_group",
    "minmax_normalize",
    "process_group",
    "save_saliency",
    "segment",
]

__version__ = "0.1.0"
