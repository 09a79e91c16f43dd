import numpy as np
import pytest
from skimage.color import rgb2lab

from cosal.dataset_io import RgbdImage
from cosal.superpixel import SegmentationError, SuperpixelMap, adjacency_of, segment


def _image(rgb, depth=None):
    if depth is None:
        depth = np.zeros(rgb.shape[:2])
    return RgbdImage(rgb=rgb, depth=depth)


def brute_force_adjacency(labels):
    """Oracle: scan every 4-connected pixel border."""
    n = int(labels.max()) + 1
    adj = [set() for _ in range(n)]
    h, w = labels.shape
    for y in range(h):
        for x in range(w):
            for dy, dx in ((0, 1), (1, 0)):
                yy, xx = y + dy, x + dx
                if yy < h and xx < w and labels[y, x] != labels[yy, xx]:
                    adj[labels[y, x]].add(int(labels[yy, xx]))
                    adj[labels[yy, xx]].add(int(labels[y, x]))
    return [frozenset(s) for s in adj]


def test_uniform_gray_regular_grid():
    image = _image(np.full((100, 100, 3), 128, np.uint8))
    sp = segment(image, 25, rng_seed=0)
    assert 13 <= sp.count <= 37  # within [0.5, 1.5] * target
    # with zero color gradient the cells stay rectangular: each superpixel
    # fills its bounding box
    for sid in range(sp.count):
        ys, xs = np.nonzero(sp.labels == sid)
        box = (ys.max() - ys.min() + 1) * (xs.max() - xs.min() + 1)
        assert sp.pixel_count[sid] / box >= 0.9


def test_flat_halves_respect_color_boundary():
    rgb = np.zeros((64, 64, 3), np.uint8)
    rgb[:, 32:] = 255
    sp = segment(_image(rgb), 4, rng_seed=0)
    # no superpixel spans the boundary by more than one pixel of jitter
    for sid in range(sp.count):
        xs = np.nonzero(sp.labels == sid)[1]
        assert not (xs.min() <= 30 and xs.max() >= 33)


def test_partition_property():
    rng = np.random.default_rng(2)
    image = _image(rng.integers(0, 256, size=(80, 60, 3), dtype=np.uint8))
    sp = segment(image, 200, rng_seed=0)
    assert sp.pixel_count.sum() == 80 * 60
    assert np.all(sp.pixel_count > 0)
    assert set(np.unique(sp.labels)) == set(range(sp.count))


def test_mean_lab_of_flat_color():
    color = np.array([200, 30, 60], np.uint8)
    image = _image(np.tile(color, (40, 40, 1)))
    sp = segment(image, 9, rng_seed=0)
    expected = rgb2lab(color.reshape(1, 1, 3))[0, 0]
    assert np.all(np.abs(sp.mean_lab - expected) < 1e-4)


def test_stats_match_label_raster():
    rng = np.random.default_rng(4)
    rgb = rng.integers(0, 256, size=(48, 48, 3), dtype=np.uint8)
    depth = rng.random((48, 48))
    sp = segment(RgbdImage(rgb=rgb, depth=depth), 30, rng_seed=0)
    lab = rgb2lab(rgb)
    for sid in (0, sp.count // 2, sp.count - 1):
        mask = sp.labels == sid
        assert np.allclose(sp.mean_lab[sid], lab[mask].mean(axis=0))
        assert np.isclose(sp.mean_depth[sid], depth[mask].mean())
        ys, xs = np.nonzero(mask)
        assert np.isclose(sp.centroid[sid][0], xs.mean())
        assert np.isclose(sp.centroid[sid][1], ys.mean())


def test_determinism():
    rng = np.random.default_rng(9)
    image = _image(rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8))
    a = segment(image, 50, rng_seed=1)
    b = segment(image, 50, rng_seed=1)
    assert np.array_equal(a.labels, b.labels)
    assert a.adjacency == b.adjacency


def test_grid_step_larger_than_image_raises():
    # 16x400 with target 4 gives a 40px grid step, wider than the short side
    thin = _image(np.zeros((16, 400, 3), np.uint8))
    with pytest.raises(SegmentationError):
        segment(thin, 4, rng_seed=0)
    with pytest.raises(SegmentationError):
        segment(_image(np.zeros((16, 16, 3), np.uint8)), 3, rng_seed=0)


def test_adjacency_two_cells():
    labels = np.zeros((2, 1), dtype=np.int32)
    labels[1, 0] = 1
    adj = adjacency_of(labels)
    assert adj == (frozenset({1}), frozenset({0}))


def test_adjacency_corner_contact_does_not_count():
    labels = np.array(
        [
            [0, 0, 1, 1],
            [0, 0, 1, 1],
            [2, 2, 3, 3],
            [2, 2, 3, 3],
        ],
        dtype=np.int32,
    )
    adj = adjacency_of(labels)
    assert 3 not in adj[0] and 0 not in adj[3]
    assert 2 not in adj[1] and 1 not in adj[2]
    assert adj[0] == frozenset({1, 2})


def test_adjacency_matches_brute_force_and_is_symmetric():
    rng = np.random.default_rng(7)
    image = _image(rng.integers(0, 256, size=(40, 40, 3), dtype=np.uint8))
    sp = segment(image, 30, rng_seed=0)
    oracle = brute_force_adjacency(sp.labels)
    assert list(sp.adjacency) == oracle
    for u, neighbors in enumerate(sp.adjacency):
        assert u not in neighbors
        for v in neighbors:
            assert u in sp.adjacency[v]


def test_adjacency_accepts_superpixel_map():
    labels = np.array([[0, 1]], dtype=np.int32)
    sp = SuperpixelMap(
        labels=labels,
        mean_lab=np.zeros((2, 3)),
        mean_depth=np.zeros(2),
        centroid=np.zeros((2, 2)),
        pixel_count=np.ones(2, dtype=np.int64),
        adjacency=(frozenset({1}), frozenset({0})),
    )
    assert adjacency_of(sp) == sp.adjacency
