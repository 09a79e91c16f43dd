import math

import numpy as np
import pytest

from cosal.dataset_io import RgbdImage
from cosal.depth_analysis import DepthConfidence, depth_confidence
from cosal.image_descriptors import (
    chi_square,
    cosine_distance,
    describe_image,
    gist_descriptor,
    pair_similarity,
    rgb_histogram,
    texton_histograms,
    texton_responses,
    value_histogram,
)
from cosal.intra_saliency import intra_baseline
from cosal.superpixel import segment


def _conf(lambda_d):
    return DepthConfidence(
        lambda_d=lambda_d, m_d=0.5, sigma_d=0.2, cv=2.5, entropy_h=1.0, levels=256
    )


def _described(rgb, depth, conf=None, semantic=None):
    image = RgbdImage(rgb=rgb, depth=depth)
    sp = segment(image, 25, rng_seed=0)
    if conf is None:
        conf = depth_confidence(depth)
    intra = intra_baseline(image, sp, conf)
    return describe_image(image, intra, conf, semantic=semantic)


# --- scalar distances ---------------------------------------------------------


def test_chi_square_identical_zero():
    h = np.array([0.25, 0.5, 0.25])
    assert chi_square(h, h) == 0.0


def test_chi_square_disjoint_one_hots():
    h1 = np.array([1.0, 0.0])
    h2 = np.array([0.0, 1.0])
    assert chi_square(h1, h2) == pytest.approx(1.0, abs=1e-9)


def test_chi_square_hand_value():
    # 0.5 * ((0.25 / 1.5) + (0.25 / 0.5)) = 1/3
    value = chi_square(np.array([0.5, 0.5]), np.array([1.0, 0.0]))
    assert value == pytest.approx(1.0 / 3.0, abs=1e-9)


def test_chi_square_bruteforce_oracle():
    rng = np.random.default_rng(0)
    for _ in range(5):
        h1 = rng.random(16)
        h2 = rng.random(16)
        h1, h2 = h1 / h1.sum(), h2 / h2.sum()
        expected = 0.5 * sum(
            (a - b) ** 2 / (a + b + 1e-12) for a, b in zip(h1, h2)
        )
        assert chi_square(h1, h2) == pytest.approx(expected, abs=1e-12)


def test_chi_square_length_mismatch():
    with pytest.raises(ValueError):
        chi_square(np.ones(3) / 3, np.ones(4) / 4)


def test_cosine_distance_trivials():
    v = np.array([1.0, 2.0, 3.0])
    assert cosine_distance(v, v) == pytest.approx(0.0, abs=1e-12)
    assert cosine_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(1.0)
    assert cosine_distance(v, -v) == pytest.approx(2.0)
    assert cosine_distance(np.zeros(3), v) == 1.0


def test_cosine_distance_bruteforce_oracle():
    rng = np.random.default_rng(1)
    v1, v2 = rng.normal(size=8), rng.normal(size=8)
    dot = sum(a * b for a, b in zip(v1, v2))
    n1 = math.sqrt(sum(a * a for a in v1))
    n2 = math.sqrt(sum(b * b for b in v2))
    assert cosine_distance(v1, v2) == pytest.approx(1.0 - dot / (n1 * n2), abs=1e-12)


# --- histograms -----------------------------------------------------------------


def test_rgb_histogram_black_one_hot():
    h = rgb_histogram(np.zeros((6, 6, 3), np.uint8))
    assert h[0] == 1.0
    assert h.sum() == pytest.approx(1.0)
    assert np.count_nonzero(h) == 1


def test_rgb_histogram_corner_bin():
    h = rgb_histogram(np.full((4, 4, 3), 255, np.uint8))
    assert h[511] == 1.0


def test_value_histogram_zero_one_hot():
    h = value_histogram(np.zeros((5, 5)))
    assert h[0] == 1.0
    assert h.shape == (512,)


def test_value_histogram_one_goes_to_last_bin():
    h = value_histogram(np.ones((3, 3)))
    assert h[511] == 1.0


# --- textons and GIST ------------------------------------------------------------


def test_texton_responses_shape():
    gray = np.random.default_rng(2).random((20, 20))
    responses = texton_responses(gray)
    assert responses.shape == (400, 11)


def test_texton_histograms_group_codebook():
    rng = np.random.default_rng(3)
    grays = [rng.random((16, 16)) for _ in range(3)]
    hists = texton_histograms(grays, rng_seed=0)
    assert len(hists) == 3
    for h in hists:
        assert h.shape == (15,)
        assert h.sum() == pytest.approx(1.0)
        assert np.all(h >= 0)
    again = texton_histograms(grays, rng_seed=0)
    for a, b in zip(hists, again):
        assert np.array_equal(a, b)


def test_gist_shape_and_determinism():
    rng = np.random.default_rng(4)
    gray = rng.random((40, 50))
    g1 = gist_descriptor(gray)
    g2 = gist_descriptor(gray)
    assert g1.shape == (512,)
    assert np.all(np.isfinite(g1))
    assert np.array_equal(g1, g2)


def test_gist_differs_between_structures():
    flat = np.full((32, 32), 0.5)
    stripes = np.tile(np.array([0.0, 1.0] * 16), (32, 1))
    assert cosine_distance(gist_descriptor(flat) + 1e-9, gist_descriptor(stripes) + 1e-9) > 0.01


# --- descriptors and pair similarity ----------------------------------------------


def test_identical_images_zero_distances_phi_one():
    rng = np.random.default_rng(5)
    rgb = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
    depth = rng.random((32, 32))
    conf = _conf(1.0)  # above t2 -> alpha_d = 1/3
    d1 = _described(rgb, depth, conf)
    d2 = _described(rgb, depth, conf)
    ps = pair_similarity(d1, d2, t2=0.2)
    for dist in (ps.d_c1, ps.d_c2, ps.d_c4, ps.d_d, ps.d_s):
        assert dist == pytest.approx(0.0, abs=1e-12)
    assert ps.d_c3 is None  # no semantic vectors supplied
    assert ps.alpha_d == pytest.approx(1.0 / 3.0)
    assert ps.phi == pytest.approx(1.0)


def test_low_confidence_weights():
    rng = np.random.default_rng(6)
    rgb = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
    d1 = _described(rgb, rng.random((32, 32)), _conf(0.1))
    d2 = _described(rgb, rng.random((32, 32)), _conf(0.9))
    ps = pair_similarity(d1, d2, t2=0.2)
    # min(0.1, 0.9) = 0.1 <= 0.2 -> alpha_d = 0.1, alpha_c = alpha_s = 0.45
    assert ps.alpha_d == pytest.approx(0.1)
    assert ps.alpha_c == pytest.approx(0.45)
    assert ps.alpha_s == pytest.approx(0.45)
    assert ps.alpha_c + ps.alpha_d + ps.alpha_s == pytest.approx(1.0, abs=1e-9)


def test_all_distances_one_gives_phi_zero():
    # alpha_d = 1/3 and every distance 1 -> phi = 1 - (1/3 + 1/3 + 1/3) = 0
    alpha_d = 1.0 / 3.0
    alpha_c = alpha_s = 0.5 * (1 - alpha_d)
    phi = 1.0 - (alpha_c * 1.0 + alpha_d * 1.0 + alpha_s * 1.0)
    assert phi == pytest.approx(0.0, abs=1e-12)


def test_phi_symmetry():
    rng = np.random.default_rng(7)
    d1 = _described(
        rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8), rng.random((32, 32))
    )
    d2 = _described(
        rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8), rng.random((32, 32))
    )
    assert pair_similarity(d1, d2, 0.2).phi == pytest.approx(
        pair_similarity(d2, d1, 0.2).phi, abs=1e-12
    )


def test_semantic_vectors_add_fourth_color_distance():
    rng = np.random.default_rng(8)
    rgb = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
    depth = rng.random((32, 32))
    s1 = np.abs(rng.normal(size=4096))
    s2 = np.abs(rng.normal(size=4096))
    d1 = _described(rgb, depth, semantic=s1)
    d2 = _described(rgb, depth, semantic=s2)
    ps = pair_similarity(d1, d2, 0.2)
    assert ps.d_c3 is not None
    assert ps.d_c3 == pytest.approx(cosine_distance(s1, s2))


def test_semantic_absent_drops_dc3_gracefully():
    rng = np.random.default_rng(9)
    rgb = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
    depth = rng.random((32, 32))
    with_vec = _described(rgb, depth, semantic=np.abs(rng.normal(size=4096)))
    without = _described(rgb, depth)
    ps = pair_similarity(with_vec, without, 0.2)
    assert ps.d_c3 is None
    assert math.isfinite(ps.phi)


def test_semantic_wrong_length_rejected():
    rng = np.random.default_rng(10)
    rgb = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
    with pytest.raises(ValueError):
        _described(rgb, rng.random((32, 32)), semantic=np.ones(100))


def test_no_depth_ablation_weights():
    rng = np.random.default_rng(11)
    rgb = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
    d1 = _described(rgb, rng.random((32, 32)), _conf(5.0))
    d2 = _described(rgb, rng.random((32, 32)), _conf(5.0))
    ps = pair_similarity(d1, d2, 0.2, use_depth=False)
    assert ps.alpha_d == 0.0
    assert ps.alpha_c == ps.alpha_s == 0.5
