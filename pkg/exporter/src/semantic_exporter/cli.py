"""Batch CLI: export one semantic sidecar file per RGB image."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .extractor import WeightsError, build_extractor, extract_image, write_sidecar

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")


def export_directory(rgb_dir: Path, out_dir: Path, fmt: str, weights: str) -> list[Path]:
    images = sorted(
        p for p in rgb_dir.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not images:
        raise FileNotFoundError(f"no images found under {rgb_dir}")
    extractor = build_extractor(weights)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for image_path in images:
        vec = extract_image(extractor, image_path)
        written.append(write_sidecar(vec, out_dir / image_path.stem, fmt))
    return written


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="semantic-export",
        description="Export a 4096-dim semantic feature sidecar per image",
    )
    parser.add_argument("--rgb", required=True, help="directory of input images")
    parser.add_argument("--out", required=True, help="directory for sidecar files")
    parser.add_argument("--format", choices=["bin", "txt"], default="bin")
    parser.add_argument(
        "--weights",
        default="imagenet",
        help="'imagenet', a VGG16 state-dict path, or 'none' (seeded random "
        "init, smoke testing only)",
    )
    args = parser.parse_args(argv)
    rgb_dir = Path(args.rgb)
    if not rgb_dir.is_dir():
        print(f"error: {rgb_dir} is not a directory", file=sys.stderr)
        return 1
    try:
        written = export_directory(rgb_dir, Path(args.out), args.format, args.weights)
    except (WeightsError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
