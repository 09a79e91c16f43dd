"""Pretrained-CNN feature extraction producing 4096-dim vectors per image.

The network is VGG16; the exported vector is the rectified output of the
second fully-connected layer. Weights come from torchvision's ImageNet
checkpoint, from a local state-dict file, or (for offline smoke testing
only) from a seeded random initialization.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torch import nn
from torchvision import models, transforms

FEATURE_DIM = 4096
RANDOM_INIT_SEED = 0

# resize the short side to 256, center-crop 224, normalize per the
# checkpoint's training convention
PREPROCESS = transforms.Compose(
    [
        transforms.Resize(256),
        transforms.CenterCrop(224),
        transforms.ToTensor(),
        transforms.Normalize(
            mean=[0.485, 0.456, 0.406], std=[0.229, 0.224, 0.225]
        ),
    ]
)


class WeightsError(RuntimeError):
    """Pretrained weights are missing or unloadable."""


def build_extractor(weights: str | Path = "imagenet") -> nn.Module:
    """Build the truncated network that maps a preprocessed batch to features.

    weights is "imagenet" (torchvision download/cache), a path to a VGG16
    state dict, or "none" for a deterministic random initialization that
    exercises the full pipeline without any checkpoint.
    """
    if weights == "imagenet":
        try:
            net = models.vgg16(weights=models.VGG16_Weights.IMAGENET1K_V1)
        except Exception as exc:  # download or cache failure
            raise WeightsError(
                f"could not obtain the ImageNet checkpoint: {exc}; "
                "pass --weights <state-dict path> instead"
            ) from exc
    elif weights == "none":
        torch.manual_seed(RANDOM_INIT_SEED)
        net = models.vgg16(weights=None)
    else:
        path = Path(weights)
        if not path.is_file():
            raise WeightsError(f"weights file {path} does not exist")
        net = models.vgg16(weights=None)
        try:
            net.load_state_dict(torch.load(path, map_location="cpu"))
        except Exception as exc:
            raise WeightsError(f"could not load weights from {path}: {exc}") from exc
    # keep everything through the second fully-connected layer and its ReLU;
    # dropout layers are identities in eval mode
    extractor = nn.Sequential(
        net.features, net.avgpool, nn.Flatten(), *list(net.classifier)[:5]
    )
    extractor.eval()
    for param in extractor.parameters():
        param.requires_grad_(False)
    return extractor


def extract_image(extractor: nn.Module, path: str | Path) -> np.ndarray:
    """Forward one image file; returns a (4096,) float32 vector."""
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
    except Exception as exc:
        raise OSError(f"unreadable image {path}: {exc}") from exc
    batch = PREPROCESS(rgb).unsqueeze(0)
    with torch.no_grad():
        features = extractor(batch)
    vec = features.squeeze(0).numpy().astype(np.float32)
    if vec.shape != (FEATURE_DIM,):
        raise RuntimeError(f"expected {FEATURE_DIM} features, got {vec.shape}")
    return vec


def write_sidecar(vec: np.ndarray, path: Path, fmt: str) -> Path:
    """Write the vector next to its stem as .bin (little-endian f32) or .txt."""
    if fmt == "bin":
        out = path.with_suffix(".bin")
        vec.astype("<f4").tofile(out)
    elif fmt == "txt":
        out = path.with_suffix(".txt")
        np.savetxt(out, vec, fmt="%.9e")
    else:
        raise ValueError(f"format must be bin or txt, got {fmt!r}")
    return out
