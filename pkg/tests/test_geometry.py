from __future__ import annotations

import math

import numpy as np
import pytest

from deeppoint.errors import DegenerateCloud, InvalidInput
from deeppoint.geometry import (
    RESAMPLE_JITTER_BOUND_CM,
    PointCloud,
    Rng,
    bounding_box,
    denormalize,
    farthest_point_indices,
    normalize,
    resample,
)


def test_rng_streams_are_reproducible_and_independent() -> None:
    a = Rng(7).child("scene", 3).random(5)
    b = Rng(7).child("scene", 3).random(5)
    c = Rng(7).child("scene", 4).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert Rng(7).child("x").derive_seed() == Rng(7).child("x").derive_seed()


def test_rng_rejects_seeds_outside_64_bits() -> None:
    assert Rng(2**64 - 1).random(1).shape == (1,)
    with pytest.raises(InvalidInput):
        Rng(2**64)
    with pytest.raises(InvalidInput):
        Rng(-1)
    with pytest.raises(InvalidInput):
        Rng(0).child(-1)


def test_point_cloud_rejects_bad_shapes() -> None:
    with pytest.raises(InvalidInput):
        PointCloud(np.zeros((0, 3)))
    with pytest.raises(InvalidInput):
        PointCloud(np.zeros((4, 2)))
    with pytest.raises(InvalidInput):
        PointCloud(np.array([[0.0, np.nan, 0.0]]))


def test_resample_same_size_is_identity() -> None:
    cloud = PointCloud(Rng(0).normal(10.0, size=(4, 3)))
    assert resample(cloud, 4, Rng(1)).same_points(cloud)


def test_resample_farthest_point_subset() -> None:
    cloud = PointCloud(np.array([[0.0, 0.0, 0.0], [100.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
    out = resample(cloud, 2, Rng(0), start=0)
    assert out.points.tolist() == [[0.0, 0.0, 0.0], [100.0, 0.0, 0.0]]


def test_farthest_point_ties_take_lowest_index() -> None:
    points = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
    assert farthest_point_indices(points, 2, 0).tolist() == [0, 1]


def test_resample_upsampling_jitters_existing_points() -> None:
    cloud = PointCloud(np.array([[0.0, 0.0, 0.0], [50.0, 0.0, 0.0]]))
    moved = 0
    for seed in range(1000):
        out = resample(cloud, 3, Rng(seed))
        assert out.n == 3
        assert np.array_equal(out.points[:2], cloud.points)
        offset = np.min(np.abs(cloud.points - out.points[2]).max(axis=1))
        assert offset <= RESAMPLE_JITTER_BOUND_CM
        moved += offset > 0.0
    assert moved == 1000


def test_resampled_box_stays_inside_source_box() -> None:
    for seed in range(50):
        rng = Rng(seed)
        n = int(rng.integers(2, 200))
        cloud = PointCloud(rng.uniform(-100.0, 100.0, size=(n, 3)))
        m = int(rng.integers(1, n + 1))
        box = bounding_box(cloud)
        out = resample(cloud, m, rng.child("resample"))
        assert out.n == m
        assert box.contains(bounding_box(out))
        assert box.contains_points(out.points)


def test_resample_rejects_zero_count() -> None:
    with pytest.raises(InvalidInput):
        resample(PointCloud(np.eye(3)), 0, Rng(0))


def test_normalize_already_unit_cloud() -> None:
    cloud = PointCloud(np.array([[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
    out, center, scale = normalize(cloud)
    assert np.allclose(center, 0.0)
    assert scale == pytest.approx(1.0)
    assert np.allclose(out.points, cloud.points)


def test_normalize_car_extent_scale() -> None:
    cloud = PointCloud(np.array([[0.0, 0.0, 0.0], [445.0, 175.0, 158.0]]))
    out, center, scale = normalize(cloud)
    assert scale == pytest.approx(0.5 * math.sqrt(445**2 + 175**2 + 158**2))
    assert scale == pytest.approx(251.8, abs=0.01)
    assert np.all(np.abs(out.points) <= 1.0 + 1e-12)
    back = denormalize(out, center, scale)
    assert np.max(np.abs(back.points - cloud.points)) < 1e-9


def test_normalize_degenerate_cloud() -> None:
    with pytest.raises(DegenerateCloud):
        normalize(PointCloud(np.ones((8, 3))))


def test_bounding_box() -> None:
    box = bounding_box(PointCloud(np.array([[1.0, 2.0, 3.0], [-1.0, 0.0, 5.0]])))
    assert box.min.tolist() == [-1.0, 0.0, 3.0]
    assert box.max.tolist() == [1.0, 2.0, 5.0]
    single = bounding_box(PointCloud(np.zeros((1, 3))))
    assert np.array_equal(single.min, single.max)
