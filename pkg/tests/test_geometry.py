"""Homography estimation, warping, and cascading behavior."""

from __future__ import annotations

import numpy as np
import pytest

import oracles
from conftest import near_identity, translation
from uavmotion.errors import (
    DegenerateConfiguration,
    InsufficientInliers,
    PointAtInfinity,
    SingularComposition,
    UavMotionError,
)
from uavmotion.geometry import (
    Homography,
    PointMatch,
    RansacParams,
    cascade_homographies,
    dlt_solve,
    estimate_homography_ransac,
    project_point,
    project_points,
    valid_region_mask,
    warp_perspective,
    warp_with_coverage,
)


def matches_from(h: Homography, pts: np.ndarray, score: float = 0.0):
    return [
        PointMatch(p_cur=(float(x), float(y)), p_ref=project_point(h, (x, y)), score=score)
        for x, y in pts
    ]


class TestDltSolve:
    def test_unit_square_to_itself_is_identity(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        h = dlt_solve(matches_from(Homography.identity(), pts))
        np.testing.assert_allclose(h.m, np.eye(3), atol=1e-9)

    def test_pure_translation_recovered_exactly(self):
        pts = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]])
        h = dlt_solve(matches_from(translation(5.0, -3.0), pts))
        expected = np.array([[1.0, 0.0, 5.0], [0.0, 1.0, -3.0], [0.0, 0.0, 1.0]])
        np.testing.assert_allclose(h.m, expected, atol=1e-9)

    def test_six_noiseless_points_reproject_below_1e6(self):
        rng = np.random.default_rng(5)
        h_true = near_identity(rng, scale=5e-3)
        pts = rng.uniform(10.0, 200.0, size=(6, 2))
        h = dlt_solve(matches_from(h_true, pts))
        corners = np.array([[0.0, 0.0], [319.0, 0.0], [0.0, 239.0], [319.0, 239.0]])
        err = np.sqrt(
            ((project_points(h, corners) - project_points(h_true, corners)) ** 2).sum(axis=1)
        )
        assert err.max() < 1e-6

    def test_collinear_points_rejected(self):
        pts = np.array([[0.0, 0.0], [10.0, 10.0], [20.0, 20.0], [30.0, 30.0]])
        with pytest.raises(DegenerateConfiguration):
            dlt_solve(matches_from(Homography.identity(), pts))

    def test_fewer_than_four_matches_rejected(self):
        pts = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
        with pytest.raises(UavMotionError):
            dlt_solve(matches_from(Homography.identity(), pts))


class TestRansac:
    def test_noiseless_translation_all_inliers(self):
        rng = np.random.default_rng(7)
        h_true = translation(5.0, -3.0)
        pts = rng.uniform(20.0, 300.0, size=(100, 2))
        h, inliers = estimate_homography_ransac(matches_from(h_true, pts), RansacParams())
        assert len(inliers) == 100
        np.testing.assert_allclose(h.m, h_true.m, atol=1e-6)

    def test_forty_percent_outliers_rejected(self):
        rng = np.random.default_rng(11)
        h_true = near_identity(rng, scale=2e-3)
        good_pts = rng.uniform(20.0, 300.0, size=(60, 2))
        good = matches_from(h_true, good_pts)
        bad = [
            PointMatch(
                p_cur=(float(x), float(y)),
                p_ref=(float(u), float(v)),
            )
            for x, y, u, v in rng.uniform(20.0, 300.0, size=(40, 4))
        ]
        h, inliers = estimate_homography_ransac(good + bad, RansacParams())
        true_recovered = sum(1 for i in inliers if i < 60)
        assert true_recovered >= 58
        corners = np.array([[0.0, 0.0], [319.0, 0.0], [0.0, 239.0], [319.0, 239.0]])
        err = np.sqrt(
            ((project_points(h, corners) - project_points(h_true, corners)) ** 2).sum(axis=1)
        )
        assert err.max() < 0.5

    def test_collinear_sources_fail(self):
        pts = np.array([[float(i * 10), float(i * 10)] for i in range(5)])
        matches = matches_from(Homography.identity(), pts)
        with pytest.raises((InsufficientInliers, DegenerateConfiguration)):
            estimate_homography_ransac(matches, RansacParams(min_inliers=4))

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(13)
        h_true = near_identity(rng)
        good = matches_from(h_true, rng.uniform(20.0, 300.0, size=(50, 2)))
        bad = [
            PointMatch(p_cur=(float(x), float(y)), p_ref=(float(u), float(v)))
            for x, y, u, v in rng.uniform(20.0, 300.0, size=(30, 4))
        ]
        h1, in1 = estimate_homography_ransac(good + bad, RansacParams(rng_seed=9))
        h2, in2 = estimate_homography_ransac(good + bad, RansacParams(rng_seed=9))
        np.testing.assert_array_equal(h1.m, h2.m)
        np.testing.assert_array_equal(in1, in2)

    def test_too_few_matches_rejected(self):
        pts = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]])
        with pytest.raises(InsufficientInliers):
            estimate_homography_ransac(
                matches_from(Homography.identity(), pts), RansacParams(min_inliers=12)
            )


class TestProjectPoint:
    def test_identity(self):
        assert project_point(Homography.identity(), (10.0, 20.0)) == (10.0, 20.0)

    def test_translation(self):
        assert project_point(translation(5.0, -3.0), (0.0, 0.0)) == (5.0, -3.0)

    def test_pure_scale(self):
        h = Homography(np.diag([2.0, 2.0, 1.0]))
        assert project_point(h, (3.0, 4.0)) == (6.0, 8.0)

    def test_point_at_infinity(self):
        h = Homography(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 1.0]]))
        with pytest.raises(PointAtInfinity):
            project_point(h, (1.0, 0.0))

    def test_round_trip_through_inverse(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            h = near_identity(rng, scale=2e-3)
            pts = rng.uniform(30.0, 200.0, size=(10, 2))
            back = project_points(h.inverse(), project_points(h, pts))
            np.testing.assert_allclose(back, pts, atol=1e-9)


class TestWarpPerspective:
    def test_identity_is_bit_exact(self):
        rng = np.random.default_rng(19)
        img = rng.uniform(0.0, 255.0, size=(48, 64)).astype(np.float32)
        out = warp_perspective(img, Homography.identity())
        np.testing.assert_array_equal(out, img)

    def test_integer_shift_matches_index_oracle(self):
        rng = np.random.default_rng(23)
        img = rng.uniform(0.0, 255.0, size=(64, 64)).astype(np.float32)
        out = warp_perspective(img, translation(5.0, 0.0))
        np.testing.assert_array_equal(out, oracles.shift_warp(img, 5, 0))
        assert np.all(out[:, 59:] == 0.0)

    def test_constant_image_stays_constant_on_valid_region(self):
        img = np.full((64, 64), 77.0, dtype=np.float32)
        h = translation(3.25, -1.5)
        out, region = warp_with_coverage(img, h, img.shape)
        inside = region.data.astype(bool)
        np.testing.assert_allclose(out[inside], 77.0, atol=1e-4)

    def test_output_dims_follow_request(self):
        img = np.zeros((32, 40), dtype=np.float32)
        out = warp_perspective(img, Homography.identity(), (20, 50))
        assert out.shape == (20, 50)


class TestValidRegionMask:
    def test_identity_all_ones(self):
        mask = valid_region_mask(Homography.identity(), (64, 64))
        assert mask.data.min() == 1

    def test_translation_zeroes_right_band(self):
        mask = valid_region_mask(translation(5.0, 0.0), (64, 64))
        assert np.all(mask.data[:, -5:] == 0)
        assert np.all(mask.data[:, :-5] == 1)

    def test_far_translation_all_zero(self):
        mask = valid_region_mask(translation(1000.0, 0.0), (64, 64))
        assert mask.data.max() == 0

    def test_equals_thresholded_warp_of_ones(self):
        rng = np.random.default_rng(29)
        ones = np.ones((60, 80), dtype=np.float32)
        for _ in range(10):
            h = near_identity(rng, scale=5e-3)
            mask = valid_region_mask(h, ones.shape)
            _, cov = warp_with_coverage(ones, h, ones.shape)
            np.testing.assert_array_equal(mask.data, (cov.data > 0.999).astype(np.uint8))


class TestCascade:
    def test_identity_window(self):
        h = cascade_homographies([Homography.identity()] * 5)
        np.testing.assert_allclose(h.m, np.eye(3), atol=1e-12)

    def test_translations_compose_additively(self):
        h = cascade_homographies([translation(1.0, 0.0), translation(2.0, 0.0)])
        np.testing.assert_allclose(h.m, translation(3.0, 0.0).m, atol=1e-12)

    def test_five_random_steps_match_fold_oracle(self):
        rng = np.random.default_rng(31)
        steps = [near_identity(rng, scale=2e-3) for _ in range(5)]
        h = cascade_homographies(steps)
        np.testing.assert_allclose(h.m, oracles.fold_cascade(steps), atol=1e-12)

    def test_fold_property_window_lengths_1_to_10(self):
        rng = np.random.default_rng(37)
        for k in range(1, 11):
            steps = [near_identity(rng, scale=1e-3) for _ in range(k)]
            h = cascade_homographies(steps)
            np.testing.assert_allclose(h.m, oracles.fold_cascade(steps), atol=1e-12)

    def test_single_step_round_trips(self):
        rng = np.random.default_rng(41)
        h0 = near_identity(rng)
        np.testing.assert_allclose(cascade_homographies([h0]).m, h0.m, atol=1e-15)

    def test_empty_window_rejected(self):
        with pytest.raises(UavMotionError):
            cascade_homographies([])


class TestHomographyType:
    def test_normalizes_bottom_right_to_one(self):
        h = Homography(2.0 * np.eye(3))
        assert h.m[2, 2] == 1.0

    def test_frobenius_fallback_when_pivot_vanishes(self):
        m = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
        h = Homography(m)
        assert h.m[2, 2] == 0.0
        assert abs(np.linalg.norm(h.m) - 1.0) < 1e-12

    def test_singular_matrix_rejected(self):
        with pytest.raises(DegenerateConfiguration):
            Homography(np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]]))

    def test_singular_composition_detected(self):
        shrink = Homography(np.diag([1e-5, 1e-5, 1.0]))
        with pytest.raises(SingularComposition):
            cascade_homographies([shrink, shrink])
