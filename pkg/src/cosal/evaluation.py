"""Saliency evaluation: PR curves over 256 thresholds, F-measure, MAE.

Conventions at the threshold extremes: precision of an empty prediction is
1, recall over an empty ground truth is an input error, and F at
precision = recall = 0 is 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

THRESHOLDS = 256
DEFAULT_BETA_SQ = 0.3


@dataclass(frozen=True)
class ImageEval:
    group: str
    image: str
    method: str
    f_adaptive: float
    f_max: float
    mae: float
    precision: np.ndarray
    recall: np.ndarray


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[ImageEval, ...]

    def group_summary(self) -> list[dict]:
        """Unweighted per-(group, method) means of the per-image scores."""
        buckets: dict[tuple[str, str], list[ImageEval]] = {}
        for row in self.rows:
            buckets.setdefault((row.group, row.method), []).append(row)
        summary = []
        for (group, method), rows in sorted(buckets.items()):
            summary.append(
                {
                    "group": group,
                    "method": method,
                    "f_adaptive": float(np.mean([r.f_adaptive for r in rows])),
                    "f_max": float(np.mean([r.f_max for r in rows])),
                    "mae": float(np.mean([r.mae for r in rows])),
                    "images": len(rows),
                }
            )
        return summary


def _as_uint8(saliency: np.ndarray) -> np.ndarray:
    saliency = np.asarray(saliency)
    if saliency.dtype == np.uint8:
        return saliency
    raster = saliency.astype(np.float64)
    if raster.min() < 0.0 or raster.max() > 1.0:
        raise ValueError("float saliency rasters must lie in [0, 1]")
    return np.floor(raster * 255.0 + 0.5).astype(np.uint8)


def _as_float(saliency: np.ndarray) -> np.ndarray:
    saliency = np.asarray(saliency)
    if saliency.dtype == np.uint8:
        return saliency.astype(np.float64) / 255.0
    return saliency.astype(np.float64)


def _check_gt(saliency: np.ndarray, gt: np.ndarray) -> np.ndarray:
    gt = np.asarray(gt)
    if gt.shape != saliency.shape:
        raise ValueError(f"gt shape {gt.shape} does not match map {saliency.shape}")
    return gt != 0


def confusion_counts(saliency: np.ndarray, gt: np.ndarray) -> np.ndarray:
    """(256, 3) int64 array of (TP, FP, FN) at each threshold 0..255.

    The prediction at threshold t is (pixel >= t); float maps in [0, 1] are
    first quantized exactly like the saved 8-bit rasters.
    """
    values = _as_uint8(saliency)
    positive = _check_gt(values, gt)
    n_pos = int(positive.sum())
    # reverse cumulative histograms: counts of pixels >= t
    pos_hist = np.bincount(values[positive].ravel(), minlength=256)
    all_hist = np.bincount(values.ravel(), minlength=256)
    tp = np.cumsum(pos_hist[::-1])[::-1]
    predicted = np.cumsum(all_hist[::-1])[::-1]
    fp = predicted - tp
    fn = n_pos - tp
    return np.stack([tp, fp, fn], axis=1).astype(np.int64)


def pr_curve(saliency: np.ndarray, gt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(precision, recall) arrays indexed by threshold 0..255.

    Requires at least one positive ground-truth pixel.
    """
    counts = confusion_counts(saliency, gt)
    if counts[0, 0] + counts[0, 2] == 0:
        raise ValueError("ground truth has no positive pixels")
    tp = counts[:, 0].astype(np.float64)
    fp = counts[:, 1].astype(np.float64)
    fn = counts[:, 2].astype(np.float64)
    predicted = tp + fp
    precision = np.where(predicted > 0, tp / np.where(predicted > 0, predicted, 1.0), 1.0)
    recall = tp / (tp + fn)
    return precision, recall


def f_measure(precision: float, recall: float, beta_sq: float = DEFAULT_BETA_SQ) -> float:
    """(1 + b2) * P * R / (b2 * P + R), defined as 0 when P = R = 0."""
    if precision == 0.0 and recall == 0.0:
        return 0.0
    return (1.0 + beta_sq) * precision * recall / (beta_sq * precision + recall)


def max_f(
    precision: np.ndarray, recall: np.ndarray, beta_sq: float = DEFAULT_BETA_SQ
) -> float:
    """Best F over the 256-threshold PR curve."""
    return max(f_measure(float(p), float(r), beta_sq) for p, r in zip(precision, recall))


def mae(saliency: np.ndarray, gt: np.ndarray) -> float:
    """Mean absolute difference between a [0, 1] map and binary ground truth."""
    values = _as_float(saliency)
    positive = _check_gt(values, gt)
    return float(np.abs(values - positive.astype(np.float64)).mean())


def adaptive_f(
    saliency: np.ndarray, gt: np.ndarray, beta_sq: float = DEFAULT_BETA_SQ
) -> float:
    """F-measure after binarizing at twice the map's mean value."""
    values = _as_float(saliency)
    positive = _check_gt(values, gt)
    predicted = values >= 2.0 * values.mean()
    tp = int((predicted & positive).sum())
    n_pred = int(predicted.sum())
    n_pos = int(positive.sum())
    precision = tp / n_pred if n_pred else 1.0
    recall = tp / n_pos if n_pos else 0.0
    return f_measure(precision, recall, beta_sq)


def evaluate_image(
    saliency: np.ndarray,
    gt: np.ndarray,
    group: str,
    image: str,
    method: str,
    beta_sq: float = DEFAULT_BETA_SQ,
) -> ImageEval:
    precision, recall = pr_curve(saliency, gt)
    return ImageEval(
        group=group,
        image=image,
        method=method,
        f_adaptive=adaptive_f(saliency, gt, beta_sq),
        f_max=max_f(precision, recall, beta_sq),
        mae=mae(saliency, gt),
        precision=precision,
        recall=recall,
    )


def write_scores_csv(report: EvalReport, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["group", "image", "method", "f_adaptive", "f_max", "mae"])
        for row in report.rows:
            writer.writerow(
                [
                    row.group,
                    row.image,
                    row.method,
                    f"{row.f_adaptive:.6f}",
                    f"{row.f_max:.6f}",
                    f"{row.mae:.6f}",
                ]
            )


def write_pr_csv(report: EvalReport, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["group", "image", "method", "threshold", "precision", "recall"])
        for row in report.rows:
            for tau in range(THRESHOLDS):
                writer.writerow(
                    [
                        row.group,
                        row.image,
                        row.method,
                        tau,
                        f"{row.precision[tau]:.6f}",
                        f"{row.recall[tau]:.6f}",
                    ]
                )


def plot_pr_curves(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """One PR plot per group with a curve per method; returns written paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups: dict[str, dict[str, list[ImageEval]]] = {}
    for row in report.rows:
        groups.setdefault(row.group, {}).setdefault(row.method, []).append(row)
    written = []
    for group, methods in sorted(groups.items()):
        fig, ax = plt.subplots(figsize=(6, 5))
        for method, rows in sorted(methods.items()):
            precision = np.mean([r.precision for r in rows], axis=0)
            recall = np.mean([r.recall for r in rows], axis=0)
            ax.plot(recall, precision, label=method)
        ax.set_xlabel("Recall")
        ax.set_ylabel("Precision")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1.05)
        ax.set_title(group)
        ax.legend()
        path = out_dir / f"pr_{group}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
