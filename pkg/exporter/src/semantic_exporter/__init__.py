"""Offline semantic feature sidecar exporter."""

from .extractor import FEATURE_DIM, build_extractor, extract_image, write_sidecar

__all__ = ["FEATURE_DIM", "build_extractor", "extract_image", "write_sidecar"]

__version__ = "0.1.0"
