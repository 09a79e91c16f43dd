"""Image-level hybrid descriptors and the self-adaptive pairwise similarity.

Six features describe each image: an RGB histogram, a texton histogram, an
optional semantic vector from a pretrained CNN (produced offline by the
exporter tool), a GIST vector, and value histograms of the depth map and
the rendered intra saliency map. Their distances fuse into a single scalar
similarity with a depth weight that adapts to depth-map reliability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage.color import rgb2gray
from skimage.transform import resize

from .dataset_io import RgbdImage, SEMANTIC_DIM
from .depth_analysis import DepthConfidence
from .intra_saliency import SaliencyMap
from .kmeans import kmeans

CHI_SQUARE_EPS = 1e-12
VALUE_BINS = 512
TEXTON_K = 15
TEXTON_SAMPLE_CAP = 50_000
GIST_SIZE = 256
GIST_SCALES = 4
GIST_ORIENTATIONS = 8
GIST_BLOCKS = 4
GIST_PAD = 32


@dataclass(frozen=True)
class ImageDescriptor:
    h_c: np.ndarray
    t: np.ndarray
    s_vec: np.ndarray | None
    g: np.ndarray
    h_d: np.ndarray
    h_s: np.ndarray
    conf: DepthConfidence


@dataclass(frozen=True)
class PairSimilarity:
    """Fused image similarity phi plus the distances and weights behind it.

    d_c3 is None when either image lacks a semantic vector; the color term
    then averages the remaining three color distances. alpha_c equals
    alpha_s and the three weights sum to 1.
    """

    phi: float
    d_c1: float
    d_c2: float
    d_c3: float | None
    d_c4: float
    d_d: float
    d_s: float
    alpha_c: float
    alpha_d: float
    alpha_s: float


def chi_square(h1: np.ndarray, h2: np.ndarray) -> float:
    """0.5 * sum (a-b)^2 / (a+b+eps); in [0, 1] for L1-normalized inputs."""
    h1 = np.asarray(h1, dtype=np.float64)
    h2 = np.asarray(h2, dtype=np.float64)
    if h1.shape != h2.shape:
        raise ValueError(f"histogram length mismatch: {h1.shape} vs {h2.shape}")
    return float(0.5 * ((h1 - h2) ** 2 / (h1 + h2 + CHI_SQUARE_EPS)).sum())


def cosine_distance(v1: np.ndarray, v2: np.ndarray) -> float:
    """1 - cos(v1, v2); a zero vector is defined to be at distance 1."""
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    if v1.shape != v2.shape:
        raise ValueError(f"vector length mismatch: {v1.shape} vs {v2.shape}")
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    if n1 == 0.0 or n2 == 0.0:
        return 1.0
    return float(1.0 - v1.dot(v2) / (n1 * n2))


def rgb_histogram(rgb: np.ndarray) -> np.ndarray:
    """Joint 8x8x8 RGB histogram, L1-normalized to 512 bins."""
    rgb = np.asarray(rgb)
    idx = (
        (rgb[..., 0].astype(np.int64) >> 5) * 64
        + (rgb[..., 1].astype(np.int64) >> 5) * 8
        + (rgb[..., 2].astype(np.int64) >> 5)
    )
    counts = np.bincount(idx.ravel(), minlength=512).astype(np.float64)
    return counts / counts.sum()


def value_histogram(raster: np.ndarray, bins: int = VALUE_BINS) -> np.ndarray:
    """L1-normalized histogram of a [0, 1] raster over uniform bins."""
    counts, _ = np.histogram(np.asarray(raster, dtype=np.float64), bins=bins, range=(0.0, 1.0))
    return counts.astype(np.float64) / counts.sum()


# --- texton histogram -------------------------------------------------------

_TEXTON_ANGLES = (0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4)
_TEXTON_SIGMAS = (1.0, 2.0)


def texton_responses(gray: np.ndarray) -> np.ndarray:
    """Per-pixel filter-bank responses, shape (H*W, 11).

    Bank: Gaussians at two scales, first-order Gaussian derivatives at four
    orientations and two scales, and one Laplacian of Gaussian.
    """
    gray = np.asarray(gray, dtype=np.float64)
    responses = [ndimage.gaussian_filter(gray, sigma) for sigma in _TEXTON_SIGMAS]
    for sigma in _TEXTON_SIGMAS:
        dy = ndimage.gaussian_filter(gray, sigma, order=(1, 0))
        dx = ndimage.gaussian_filter(gray, sigma, order=(0, 1))
        for theta in _TEXTON_ANGLES:
            responses.append(np.cos(theta) * dx + np.sin(theta) * dy)
    responses.append(ndimage.gaussian_laplace(gray, _TEXTON_SIGMAS[0]))
    return np.stack([r.ravel() for r in responses], axis=1)


def texton_histograms(
    grays: list[np.ndarray], k: int = TEXTON_K, rng_seed: int = 0
) -> list[np.ndarray]:
    """Group-level texton histograms, one (k,) L1-normalized vector per image.

    The codebook is one k-means clustering fitted over the pooled responses
    of every image in the group, so bins are comparable across the group.
    Fitting subsamples at most TEXTON_SAMPLE_CAP vectors (fixed stride);
    assignment always covers every pixel.
    """
    per_image = [texton_responses(g) for g in grays]
    pooled = np.concatenate(per_image, axis=0)
    if pooled.shape[0] > TEXTON_SAMPLE_CAP:
        sample = pooled[np.linspace(0, pooled.shape[0] - 1, TEXTON_SAMPLE_CAP).astype(int)]
    else:
        sample = pooled
    _, centers = kmeans(sample, k, rng_seed)
    center_sq = (centers**2).sum(axis=1)
    histograms = []
    for block in per_image:
        # expanded squared distance keeps the temporary at (pixels, k)
        d2 = (block**2).sum(axis=1)[:, None] - 2.0 * block @ centers.T + center_sq
        assigned = d2.argmin(axis=1)
        counts = np.bincount(assigned, minlength=k).astype(np.float64)
        histograms.append(counts / counts.sum())
    return histograms


# --- GIST descriptor --------------------------------------------------------


def _gabor_bank(n: int) -> np.ndarray:
    """Frequency-domain Gabor transfer functions, (scales*orientations, n, n)."""
    params = []
    for scale in range(GIST_SCALES):
        for orient in range(GIST_ORIENTATIONS):
            params.append(
                (
                    0.35,
                    0.3 / (1.85**scale),
                    16.0 * GIST_ORIENTATIONS**2 / 32**2,
                    np.pi / GIST_ORIENTATIONS * orient,
                )
            )
    half = n // 2
    fx, fy = np.meshgrid(np.arange(-half, half), np.arange(-half, half))
    fr = np.fft.fftshift(np.sqrt(fx**2 + fy**2))
    angle = np.fft.fftshift(np.arctan2(fy, fx))
    bank = np.empty((len(params), n, n))
    for idx, (a, b, c, theta) in enumerate(params):
        tr = angle + theta
        tr += 2 * np.pi * (tr < -np.pi) - 2 * np.pi * (tr > np.pi)
        bank[idx] = np.exp(-10.0 * a * (fr / n / b - 1.0) ** 2 - 2.0 * c * np.pi * tr**2)
    return bank


def _prefilter(img: np.ndarray, fc: float = 4.0) -> np.ndarray:
    """Local contrast normalization ahead of the Gabor bank."""
    w = 5
    s1 = fc / np.sqrt(np.log(2.0))
    img = np.log(img + 1.0)
    img = np.pad(img, w, mode="symmetric")
    sn, sm = img.shape
    n = max(sn, sm)
    n += n % 2
    img = np.pad(img, ((0, n - sn), (0, n - sm)), mode="symmetric")
    half = n // 2
    fx, fy = np.meshgrid(np.arange(-half, half), np.arange(-half, half))
    gf = np.fft.fftshift(np.exp(-(fx**2 + fy**2) / (s1**2)))
    out = img - np.real(np.fft.ifft2(np.fft.fft2(img) * gf))
    local_std = np.sqrt(np.abs(np.fft.ifft2(np.fft.fft2(out**2) * gf)))
    out = out / (0.2 + local_std)
    return out[:sn, :sm][w:-w, w:-w]


def gist_descriptor(gray: np.ndarray) -> np.ndarray:
    """512-dim GIST: 4 scales x 8 orientations x 4x4 spatial grid.

    The grayscale image is resized to a fixed working size, contrast
    normalized, filtered by the Gabor bank in the frequency domain, and
    each response magnitude is averaged over a 4x4 grid.
    """
    gray = np.asarray(gray, dtype=np.float64)
    img = resize(gray, (GIST_SIZE, GIST_SIZE), order=1, mode="reflect", anti_aliasing=True)
    img = _prefilter(img * 255.0)
    img = np.pad(img, GIST_PAD, mode="symmetric")
    n = GIST_SIZE + 2 * GIST_PAD
    bank = _gabor_bank(n)
    spectrum = np.fft.fft2(img)
    cell = GIST_SIZE // GIST_BLOCKS
    out = np.empty(bank.shape[0] * GIST_BLOCKS * GIST_BLOCKS)
    for idx, transfer in enumerate(bank):
        mag = np.abs(np.fft.ifft2(spectrum * transfer))
        mag = mag[GIST_PAD:-GIST_PAD, GIST_PAD:-GIST_PAD]
        blocks = mag.reshape(GIST_BLOCKS, cell, GIST_BLOCKS, cell).mean(axis=(1, 3))
        out[idx * 16 : (idx + 1) * 16] = blocks.ravel()
    return out


# --- descriptor assembly and pair similarity --------------------------------


def describe_image(
    image: RgbdImage,
    intra: SaliencyMap,
    conf: DepthConfidence,
    semantic: np.ndarray | None = None,
    texton_hist: np.ndarray | None = None,
) -> ImageDescriptor:
    """Compute the hybrid descriptor for one image.

    texton_hist should come from the group-level codebook
    (texton_histograms); when omitted, a single-image codebook is fitted,
    which keeps the descriptor self-contained but makes texton distances
    across images less meaningful.
    """
    gray = rgb2gray(image.rgb)
    if semantic is not None:
        semantic = np.asarray(semantic)
        if semantic.size != SEMANTIC_DIM:
            raise ValueError(f"semantic vector must hold {SEMANTIC_DIM} values")
    if texton_hist is None:
        texton_hist = texton_histograms([gray])[0]
    return ImageDescriptor(
        h_c=rgb_histogram(image.rgb),
        t=np.asarray(texton_hist, dtype=np.float64),
        s_vec=semantic,
        g=gist_descriptor(gray),
        h_d=value_histogram(image.depth),
        h_s=value_histogram(intra.raster),
        conf=conf,
    )


def pair_similarity(
    desc_i: ImageDescriptor,
    desc_j: ImageDescriptor,
    t2: float,
    use_depth: bool = True,
) -> PairSimilarity:
    """Fuse the six feature distances into phi = 1 - weighted distance sum.

    The depth weight is the smaller of the two depth confidences when that
    minimum is at most t2 (an unreliable depth map takes itself out of the
    measurement), and 1/3 otherwise; color and saliency split the rest
    evenly. use_depth=False forces the depth weight to zero for ablations.
    """
    d_c1 = chi_square(desc_i.h_c, desc_j.h_c)
    d_c2 = chi_square(desc_i.t, desc_j.t)
    d_c3 = (
        cosine_distance(desc_i.s_vec, desc_j.s_vec)
        if desc_i.s_vec is not None and desc_j.s_vec is not None
        else None
    )
    d_c4 = cosine_distance(desc_i.g, desc_j.g)
    d_d = chi_square(desc_i.h_d, desc_j.h_d)
    d_s = chi_square(desc_i.h_s, desc_j.h_s)

    if use_depth:
        lambda_min = min(desc_i.conf.lambda_d, desc_j.conf.lambda_d)
        alpha_d = lambda_min if lambda_min <= t2 else 1.0 / 3.0
    else:
        alpha_d = 0.0
    alpha_c = alpha_s = 0.5 * (1.0 - alpha_d)

    color_dists = [d_c1, d_c2, d_c4] if d_c3 is None else [d_c1, d_c2, d_c3, d_c4]
    color_term = sum(color_dists) / len(color_dists)
    phi = 1.0 - (alpha_c * color_term + alpha_d * d_d + alpha_s * d_s)
    return PairSimilarity(
        phi=float(phi),
        d_c1=d_c1,
        d_c2=d_c2,
        d_c3=d_c3,
        d_c4=d_c4,
        d_d=d_d,
        d_s=d_s,
        alpha_c=alpha_c,
        alpha_d=alpha_d,
        alpha_s=alpha_s,
    )
