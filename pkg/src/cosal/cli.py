"""Command-line entry point: run the pipeline, evaluate outputs, inspect internals."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import clp, evaluation
from .dataset_io import (
    ConfigError,
    DatasetError,
    RunConfig,
    load_config,
    load_group,
)
from .pipeline import MAP_FAMILIES, process_group, save_group_maps

log = logging.getLogger("cosal")


def _discover_groups(dataset_root: Path) -> list[Path]:
    """A dataset root is either one group (has rgb/) or a folder of groups."""
    if not dataset_root.is_dir():
        raise DatasetError(f"dataset root {dataset_root} does not exist")
    if (dataset_root / "rgb").is_dir():
        return [dataset_root]
    groups = sorted(
        child for child in dataset_root.iterdir() if (child / "rgb").is_dir()
    )
    if not groups:
        raise DatasetError(f"no groups found under {dataset_root}")
    return groups


def _build_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    overrides: dict = {}
    if getattr(args, "regime", None):
        overrides["optimizer"] = args.regime.upper()
    if getattr(args, "seed", None) is not None:
        overrides["rng_seed"] = args.seed
    if getattr(args, "no_depth", False):
        overrides["use_depth"] = False
    if getattr(args, "intra", None):
        overrides["intra_provider"] = args.intra
    return dataclasses.replace(config, **overrides) if overrides else config


def _log_timings(group: str, timings: dict[str, float]) -> None:
    total = sum(timings.values())
    if total <= 0:
        return
    breakdown = ", ".join(
        f"{stage} {seconds:.2f}s ({100.0 * seconds / total:.1f}%)"
        for stage, seconds in timings.items()
    )
    log.info("%s: %.2fs total [%s]", group, total, breakdown)


def cmd_run(args: argparse.Namespace) -> int:
    config = _build_config(args)
    out_dir = Path(args.out)
    manifest_doc: dict = {}
    try:
        groups = _discover_groups(Path(args.dataset))
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for group_dir in groups:
        stage = "load"
        try:
            manifest, images = load_group(group_dir, config)
            stage = "process"
            result = process_group(manifest, images, config)
            stage = "save"
            fragment = save_group_maps(result, out_dir / manifest.group_name)
        except (DatasetError, ValueError) as exc:
            print(f"error: group {group_dir.name}: stage {stage}: {exc}", file=sys.stderr)
            return 1
        manifest_doc[manifest.group_name] = fragment
        _log_timings(manifest.group_name, result.timings)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(json.dumps(manifest_doc, indent=2, sort_keys=True))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    methods = args.methods or list(MAP_FAMILIES)
    if not methods:
        print("error: empty methods list", file=sys.stderr)
        return 1
    config = _build_config(args)
    out_dir = Path(args.out)
    rows = []
    try:
        groups = _discover_groups(Path(args.dataset))
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for group_dir in groups:
        try:
            manifest, images = load_group(group_dir, config)
        except DatasetError as exc:
            print(f"error: group {group_dir.name}: {exc}", file=sys.stderr)
            return 1
        for entry, image in zip(manifest.entries, images):
            if image.gt is None:
                print(
                    f"error: {manifest.group_name}/{entry.stem}: missing ground truth",
                    file=sys.stderr,
                )
                return 1
            for method in methods:
                map_path = out_dir / manifest.group_name / method / f"{entry.stem}.png"
                if not map_path.is_file():
                    print(f"error: missing saliency map {map_path}", file=sys.stderr)
                    return 1
                with Image.open(map_path) as img:
                    saliency = np.asarray(img.convert("L"))
                rows.append(
                    evaluation.evaluate_image(
                        saliency,
                        image.gt,
                        manifest.group_name,
                        entry.stem,
                        method,
                        config.beta_sq,
                    )
                )
    report = evaluation.EvalReport(rows=tuple(rows))
    report_dir = Path(args.report) if args.report else out_dir
    evaluation.write_scores_csv(report, report_dir / "scores.csv")
    evaluation.write_pr_csv(report, report_dir / "pr_curves.csv")
    for summary in report.group_summary():
        print(
            f"{summary['group']:20s} {summary['method']:10s} "
            f"f_adaptive={summary['f_adaptive']:.4f} f_max={summary['f_max']:.4f} "
            f"mae={summary['mae']:.4f} ({summary['images']} images)"
        )
    if args.plot:
        written = evaluation.plot_pr_curves(report, report_dir)
        for path in written:
            log.info("wrote %s", path)
    return 0


def _label_colors(n: int) -> np.ndarray:
    rng = np.random.default_rng(0)
    return rng.integers(0, 256, size=(n, 3), dtype=np.uint8)


def cmd_inspect(args: argparse.Namespace) -> int:
    config = _build_config(args)
    print("effective config:")
    for field in dataclasses.fields(config):
        print(f"  {field.name} = {getattr(config, field.name)}")
    if not args.dataset:
        return 0

    csv_dir = Path(args.csv_dir) if args.csv_dir else None
    try:
        groups = _discover_groups(Path(args.dataset))
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for group_dir in groups:
        try:
            manifest, images = load_group(group_dir, config)
            result = process_group(manifest, images, config)
        except (DatasetError, ValueError) as exc:
            print(f"error: group {group_dir.name}: {exc}", file=sys.stderr)
            return 1
        stems = [e.stem for e in manifest.entries]
        print(f"\ngroup {manifest.group_name}: {len(images)} images")
        print("  depth confidence:")
        for stem, conf in zip(stems, result.confidences):
            print(
                f"    {stem}: lambda_d={conf.lambda_d:.4f} m_d={conf.m_d:.4f} "
                f"sigma_d={conf.sigma_d:.4f} H={conf.entropy_h:.4f}"
            )
        print("  pair similarity phi:")
        for (i, j), ps in sorted(result.pair_sims.items()):
            if i < j:
                print(f"    ({stems[i]}, {stems[j]}): phi={ps.phi:.4f}")
        print("  match sparsity (fraction of nonzero entries):")
        for (i, j), match in sorted(result.matches.items()):
            density = float(match.ml.mean())
            print(f"    {stems[i]} -> {stems[j]}: {density:.4f}")
        print("  seeds (foreground/background counts):")
        for stem, intra, inter in zip(stems, result.intra, result.inter):
            seeds_intra = clp.select_seeds(intra, config.t_min, config.t_max)
            seeds_inter = clp.select_seeds(inter, config.t_min, config.t_max)
            print(
                f"    {stem}: intra {seeds_intra.foreground.size}/"
                f"{seeds_intra.background.size}, inter {seeds_inter.foreground.size}/"
                f"{seeds_inter.background.size}"
            )
        if csv_dir is not None:
            _dump_inspect_csvs(result, stems, csv_dir / manifest.group_name)
        if args.labels:
            label_dir = Path(args.labels) / manifest.group_name
            label_dir.mkdir(parents=True, exist_ok=True)
            for stem, sp in zip(stems, result.superpixels):
                colors = _label_colors(sp.count)
                Image.fromarray(colors[sp.labels]).save(label_dir / f"{stem}.png")
    return 0


def _dump_inspect_csvs(result, stems: list[str], out_dir: Path) -> None:
    import csv as _csv

    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "depth_confidence.csv").open("w", newline="") as handle:
        writer = _csv.writer(handle)
        writer.writerow(["image", "lambda_d", "m_d", "sigma_d", "cv", "entropy_h"])
        for stem, conf in zip(stems, result.confidences):
            writer.writerow(
                [stem, conf.lambda_d, conf.m_d, conf.sigma_d, conf.cv, conf.entropy_h]
            )
    with (out_dir / "pair_similarity.csv").open("w", newline="") as handle:
        writer = _csv.writer(handle)
        writer.writerow(
            ["image_i", "image_j", "phi", "d_c1", "d_c2", "d_c3", "d_c4", "d_d", "d_s"]
        )
        for (i, j), ps in sorted(result.pair_sims.items()):
            if i < j:
                writer.writerow(
                    [
                        stems[i],
                        stems[j],
                        ps.phi,
                        ps.d_c1,
                        ps.d_c2,
                        "" if ps.d_c3 is None else ps.d_c3,
                        ps.d_c4,
                        ps.d_d,
                        ps.d_s,
                    ]
                )
    for (i, j), match in sorted(result.matches.items()):
        with (out_dir / f"matches_{stems[i]}_{stems[j]}.csv").open("w", newline="") as handle:
            writer = _csv.writer(handle)
            writer.writerow(["m", "n"])
            for m, n in zip(*np.nonzero(match.ml)):
                writer.writerow([int(m), int(n)])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cosal",
        description="Co-saliency detection for groups of RGBD images",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log stage timings")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, dataset_required: bool = True) -> None:
        # SUPPRESS keeps a subcommand-level flag from clobbering the
        # top-level -v when only the latter is given
        p.add_argument(
            "-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
            help="log stage timings",
        )
        p.add_argument("--dataset", required=dataset_required, help="dataset or group root")
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--regime", choices=["lp", "slp", "clp"], help="optimization regime")
        p.add_argument("--seed", type=int, help="rng seed override")
        p.add_argument("--no-depth", action="store_true", help="disable the depth cue")
        p.add_argument("--intra", choices=["file", "baseline"], help="intra saliency provider")

    run_p = sub.add_parser("run", help="run the pipeline and persist all saliency maps")
    add_common(run_p)
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.set_defaults(func=cmd_run)

    eval_p = sub.add_parser("eval", help="score saved maps against ground truth")
    add_common(eval_p)
    eval_p.add_argument("--out", required=True, help="directory holding run outputs")
    eval_p.add_argument("--report", help="directory for CSV/plot output (default: --out)")
    eval_p.add_argument(
        "--methods",
        nargs="+",
        choices=list(MAP_FAMILIES),
        help="map families to evaluate (default: all)",
    )
    eval_p.add_argument("--plot", action="store_true", help="render PR curve plots")
    eval_p.set_defaults(func=cmd_eval)

    inspect_p = sub.add_parser(
        "inspect", help="print the effective config and per-group diagnostics"
    )
    add_common(inspect_p, dataset_required=False)
    inspect_p.add_argument("--csv-dir", help="also dump diagnostics as CSV files")
    inspect_p.add_argument("--labels", help="write color-coded label rasters here")
    inspect_p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
