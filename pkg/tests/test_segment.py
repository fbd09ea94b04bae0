import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from acnescope.imaging import Image
from acnescope.preprocess import LabImage, rgb_to_lab
from acnescope.segment import (
    KMeansConfig,
    distortion,
    kmeans,
    lloyd,
    mask_overlay,
    nearest_center,
    segment_image,
    select_lesion_cluster,
)

points_2d = arrays(np.float64, st.tuples(st.integers(6, 40), st.just(2)),
                   elements=st.floats(-50, 50, allow_nan=False).map(lambda v: round(v, 3)))


def disk_image(h=32, w=32, radius=9, inside=(0.9, 0.3, 0.35), outside=(0.85, 0.7, 0.6)):
    yy, xx = np.mgrid[:h, :w]
    disk = (yy - h / 2 + 0.5) ** 2 + (xx - w / 2 + 0.5) ** 2 <= radius ** 2
    px = np.where(disk[..., None], inside, outside).astype(float)
    return Image(px), disk


def iou(a, b):
    return np.logical_and(a, b).sum() / np.logical_or(a, b).sum()


class TestKMeans:
    def test_two_obvious_clusters(self):
        res = kmeans([0, 0, 0, 10, 10, 10], KMeansConfig(k=2))
        assert sorted(res.centers.ravel().tolist()) == [0.0, 10.0]
        assert res.distortion == 0.0
        assert len(set(res.assignments[:3])) == 1 and len(set(res.assignments[3:])) == 1

    def test_single_cluster_is_mean(self):
        x = np.random.default_rng(0).normal(size=(50, 3))
        res = kmeans(x, KMeansConfig(k=1))
        assert np.allclose(res.centers[0], x.mean(axis=0), atol=1e-12)
        assert res.distortion == pytest.approx(((x - x.mean(axis=0)) ** 2).sum(), rel=1e-12)

    def test_lloyd_matches_reference_trace(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(30, 2)) + np.repeat([[0, 0], [4, 4], [0, 5]], 10, axis=0)
        init = x[[0, 1, 2]]
        res = lloyd(x, init, 50, 0.0)
        trace = oracles.lloyd(x.tolist(), init.tolist(), 50, 0.0)
        assert len(res.history) == len(trace)
        for j, (_, _, ref_j) in zip(res.history, trace):
            assert j == pytest.approx(ref_j, rel=1e-12)
        assign, centers, _ = trace[-1]
        assert res.assignments.tolist() == assign
        assert np.allclose(res.centers, centers, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(points_2d, st.integers(1, 4), st.integers(0, 2**16))
    def test_distortion_non_increasing_and_nearest(self, x, k, seed):
        if len(np.unique(x, axis=0)) < k:
            return
        res = kmeans(x, KMeansConfig(k=k, seed=seed, restarts=2, tolerance=0.0))
        h = np.array(res.history)
        assert np.all(np.diff(h) <= 1e-9 * (1 + h[:-1]))
        # every point sits with its nearest center at termination
        d2 = ((x[:, None, :] - res.centers[None]) ** 2).sum(axis=2)
        own = d2[np.arange(len(x)), res.assignments]
        assert np.all(own <= d2.min(axis=1) + 1e-9)
        assert res.distortion == pytest.approx(distortion(x, res.assignments, res.centers))

    @settings(max_examples=20, deadline=None)
    @given(points_2d, st.integers(0, 1000))
    def test_deterministic(self, x, seed):
        if len(np.unique(x, axis=0)) < 3:
            return
        cfg = KMeansConfig(k=3, seed=seed)
        a, b = kmeans(x, cfg), kmeans(x, cfg)
        assert np.array_equal(a.assignments, b.assignments)
        assert np.array_equal(a.centers, b.centers)

    def test_more_restarts_never_worse(self):
        x = np.random.default_rng(2).random((200, 2))
        prev = np.inf
        for r in (1, 2, 4, 8):
            d = kmeans(x, KMeansConfig(k=5, restarts=r, seed=3)).distortion
            assert d <= prev + 1e-12
            prev = d

    def test_nearest_tie_goes_to_lowest(self):
        idx, _ = nearest_center(np.array([[0.5]]), np.array([[0.0], [1.0]]))
        assert idx[0] == 0

    def test_empty_cluster_is_reseeded(self):
        x = np.array([[0.0], [0.1], [5.0], [5.1]])
        res = lloyd(x, np.array([[0.0], [5.0], [100.0]]), 20, 0.0)
        assert len(np.unique(res.assignments)) == 3

    @pytest.mark.parametrize("k", [0, -1])
    def test_invalid_k(self, k):
        with pytest.raises(ValueError):
            KMeansConfig(k=k)

    def test_k_exceeds_distinct_points(self):
        with pytest.raises(ValueError, match="distinct"):
            kmeans([1.0, 1.0, 2.0], KMeansConfig(k=3))


class TestSegmentation:
    def test_two_value_image(self):
        img, disk = disk_image()
        res = segment_image(rgb_to_lab(img), KMeansConfig(k=2))
        assert np.array_equal(res.lesion_mask, disk)

    def test_constant_image_single_cluster(self):
        lab = rgb_to_lab(Image(np.full((6, 6, 3), 0.4)))
        res = segment_image(lab, KMeansConfig(k=1))
        assert res.lesion_mask.all()
        with pytest.raises(ValueError):
            segment_image(lab, KMeansConfig(k=2))

    def test_noisy_disk_iou(self):
        img, disk = disk_image(48, 48, 12)
        noisy = np.clip(img.pixels + np.random.default_rng(1).normal(0, 0.02, img.pixels.shape), 0, 1)
        res = segment_image(rgb_to_lab(Image(noisy)), KMeansConfig(k=2))
        assert iou(res.lesion_mask, disk) >= 0.95

    def test_three_regions_pick_reddest(self):
        img, disk = disk_image(40, 40, 8)
        px = np.array(img.pixels)
        px[:, :6] = (0.1, 0.1, 0.1)
        res = segment_image(rgb_to_lab(Image(px)), KMeansConfig(k=3))
        assert np.array_equal(res.lesion_mask, disk)

    def test_lesion_rule_ties_break_on_lightness(self):
        lab = LabImage(np.array([[[20.0, 10.0, 0.0], [60.0, 10.0, 0.0], [50.0, 5.0, 0.0]]]))
        assert select_lesion_cluster(np.array([0, 1, 2]), lab, 3) == 1
        assert select_lesion_cluster(np.array([1, 0, 2]), lab, 3) == 0

    def test_lesion_rule_highest_a(self):
        lab = LabImage(np.array([[[90.0, 1.0, 0.0], [10.0, 30.0, 0.0]]]))
        assert select_lesion_cluster(np.array([0, 1]), lab, 2) == 1

    def test_overlay_only_touches_mask(self):
        img, disk = disk_image(16, 16, 4)
        out = mask_overlay(img, disk).pixels
        assert np.array_equal(out[~disk], img.pixels[~disk])
        assert np.allclose(out[disk], 0.5 * img.pixels[disk] + 0.5 * np.array([0, 1, 0]))
