import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import centroid_direct, flood_fill_labels, same_partition
from thermoface.errors import EmptyMask
from thermoface.segmentation import (Centroid, centroid, label_components, labels_to_pgm_array,
                                     largest_component)

binary_images = arrays(np.uint8, st.tuples(st.integers(1, 20), st.integers(1, 20)),
                       elements=st.integers(0, 1))


def test_empty_image():
    lm = label_components(np.zeros((5, 6), np.uint8))
    assert lm.component_count == 0
    assert not lm.labels.any()
    assert lm.areas.sum() == 0


def test_single_pixel():
    img = np.zeros((4, 4), np.uint8)
    img[2, 1] = 1
    lm = label_components(img)
    assert lm.component_count == 1
    assert lm.labels[2, 1] == 1


def test_diagonal_pair_depends_on_connectivity():
    img = np.array([[1, 0], [0, 1]], np.uint8)
    assert label_components(img, 4).component_count == 2
    assert label_components(img, 8).component_count == 1
    assert flood_fill_labels(img.tolist(), 4)[1] == 2
    assert flood_fill_labels(img.tolist(), 8)[1] == 1


def test_u_shape_needs_equivalence_merge():
    # the two arms get different provisional labels and meet in the last row
    img = np.array([[1, 0, 1],
                    [1, 0, 1],
                    [1, 1, 1]], np.uint8)
    lm = label_components(img, 4)
    assert lm.component_count == 1
    assert set(np.unique(lm.labels)) == {0, 1}


def test_bad_connectivity():
    with pytest.raises(ValueError):
        label_components(np.zeros((2, 2), np.uint8), 6)


@pytest.mark.parametrize("connectivity", [4, 8])
def test_matches_flood_fill_on_random_images(connectivity, rng):
    for _ in range(100):
        img = (rng.random((32, 32)) < rng.uniform(0.2, 0.8)).astype(np.uint8)
        lm = label_components(img, connectivity)
        ref, count = flood_fill_labels(img.tolist(), connectivity)
        assert lm.component_count == count
        assert same_partition(lm.labels, ref)


@settings(max_examples=200, deadline=None)
@given(binary_images, st.sampled_from([4, 8]))
def test_label_map_invariants(img, connectivity):
    lm = label_components(img, connectivity)
    # contiguous labels numbered by first raster occurrence
    seen = []
    for v in lm.labels.ravel():
        if v and v not in seen:
            seen.append(int(v))
    assert seen == list(range(1, lm.component_count + 1))
    assert lm.areas.sum() == img.sum()
    for k in range(1, lm.component_count + 1):
        assert lm.areas[k] == (lm.labels == k).sum()
    assert same_partition(lm.labels, flood_fill_labels(img.tolist(), connectivity)[0])


def _blob(img, y0, x0, n):
    """Paint an n-pixel horizontal run."""
    img[y0, x0:x0 + n] = 1


def test_largest_component_picks_max_area():
    img = np.zeros((10, 12), np.uint8)
    _blob(img, 1, 0, 5)
    _blob(img, 4, 0, 9)
    _blob(img, 7, 0, 3)
    lm = label_components(img)
    assert sorted(lm.areas[1:].tolist()) == [3, 5, 9]
    out = largest_component(lm)
    assert out.sum() == 9
    assert out[4, :9].all()


def test_largest_component_tie_goes_to_first_in_raster_order():
    img = np.zeros((6, 10), np.uint8)
    _blob(img, 4, 0, 4)
    _blob(img, 1, 5, 4)   # same area, but starts on an earlier row
    out = largest_component(label_components(img))
    assert out[1, 5:9].all() and out.sum() == 4


def test_largest_component_single_is_identity(rng):
    img = np.zeros((8, 8), np.uint8)
    img[2:6, 3:7] = 1
    assert np.array_equal(largest_component(label_components(img)), img)


def test_largest_component_of_empty_map():
    with pytest.raises(EmptyMask):
        largest_component(label_components(np.zeros((3, 3), np.uint8)))


@settings(max_examples=100, deadline=None)
@given(binary_images)
def test_largest_component_area_is_max(img):
    lm = label_components(img)
    if lm.component_count == 0:
        return
    assert largest_component(lm).sum() == lm.areas.max()


def test_centroid_examples():
    img = np.zeros((5, 5), np.uint8)
    img[3, 2] = 1
    assert centroid(img) == Centroid(2.0, 3.0)
    img = np.zeros((5, 5), np.uint8)
    img[0:2, 0:2] = 1
    assert centroid(img) == Centroid(0.5, 0.5)


def test_centroid_of_symmetric_mask_is_centered(rng):
    for _ in range(20):
        half = (rng.random((9, 6)) < 0.5).astype(np.uint8)
        half[4, 0] = 1
        mask = np.concatenate([half, half[:, ::-1]], axis=1)  # mirrored about x = 5.5
        assert centroid(mask).x == 5.5
        odd = np.concatenate([half, np.ones((9, 1), np.uint8), half[:, ::-1]], axis=1)
        assert centroid(odd).x == 6.0


def test_centroid_matches_direct_sums(rng):
    for _ in range(50):
        mask = (rng.random((23, 31)) < 0.3).astype(np.uint8)
        mask[0, 0] = 1
        c = centroid(mask)
        ex, ey = centroid_direct(mask.tolist())
        assert c.x == pytest.approx(float(ex), rel=1e-12)
        assert c.y == pytest.approx(float(ey), rel=1e-12)


def test_centroid_of_union_is_area_weighted(rng):
    for _ in range(50):
        a = np.zeros((20, 20), np.uint8)
        b = np.zeros((20, 20), np.uint8)
        a[:, :10] = rng.random((20, 10)) < 0.4
        b[:, 10:] = rng.random((20, 10)) < 0.4
        a[0, 0] = b[0, 19] = 1
        ca, cb, cu = centroid(a), centroid(b), centroid(a | b)
        na, nb = a.sum(), b.sum()
        wx = (na * ca.x + nb * cb.x) / (na + nb)
        wy = (na * ca.y + nb * cb.y) / (na + nb)
        assert cu.x == pytest.approx(wx, rel=1e-12)
        assert cu.y == pytest.approx(wy, rel=1e-12)


def test_centroid_of_empty_mask():
    with pytest.raises(EmptyMask):
        centroid(np.zeros((3, 3), np.uint8))


def test_label_dump_scaling():
    img = np.array([[1, 0, 1]], np.uint8)
    lm = label_components(img)
    assert labels_to_pgm_array(lm).tolist() == [[127, 0, 255]]
