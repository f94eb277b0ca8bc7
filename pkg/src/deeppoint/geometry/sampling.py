"""Resampling, normalization and bounding boxes for point clouds."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateCloud, InvalidInput
from .rng import Rng
from .types import Aabb, PointCloud

RESAMPLE_JITTER_CM = 0.5
# upsampling jitter is clipped per coordinate to three standard deviations
RESAMPLE_JITTER_BOUND_CM = 3.0 * RESAMPLE_JITTER_CM


def _distances_to(points: np.ndarray, origin: np.ndarray) -> np.ndarray:
    delta = points - origin
    return np.sqrt(np.einsum("ij,ij->i", delta, delta))


def farthest_point_indices(points: np.ndarray, m: int, start: int) -> np.ndarray:
    """Greedy farthest-point order beginning at ``start``; ties go to the lowest index."""
    n = points.shape[0]
    if not 0 <= start < n:
        raise InvalidInput(f"start index {start} out of range for {n} points")
    m = min(m, n)
    selected = np.empty(m, dtype=np.int64)
    selected[0] = start
    nearest = _distances_to(points, points[start])
    for i in range(1, m):
        idx = int(np.argmax(nearest))
        selected[i] = idx
        np.minimum(nearest, _distances_to(points, points[idx]), out=nearest)
    return selected


def resample(cloud: PointCloud, m: int, rng: Rng, start: int | None = None) -> PointCloud:
    """Return exactly ``m`` points.

    Downsampling keeps a farthest-point subset (in original order) whose first
    pick is ``start`` or an rng-drawn index. Upsampling keeps every point and
    fills the deficit with jittered copies of rng-drawn points.
    """
    if m < 1:
        raise InvalidInput("resample count must be >= 1")
    n = cloud.n
    if m == n:
        return cloud
    if m < n:
        first = int(rng.integers(0, n)) if start is None else start
        keep = np.sort(farthest_point_indices(cloud.points, m, first))
        return PointCloud(cloud.points[keep])
    sources = rng.integers(0, n, size=m - n)
    jitter = np.clip(rng.normal(RESAMPLE_JITTER_CM, size=(m - n, 3)), -RESAMPLE_JITTER_BOUND_CM, RESAMPLE_JITTER_BOUND_CM)
    extra = cloud.points[sources] + jitter
    return PointCloud(np.vstack([cloud.points, extra]))


def bounding_box(cloud: PointCloud) -> Aabb:
    if cloud.n == 0:
        raise InvalidInput("bounding box of an empty cloud")
    return Aabb(cloud.points.min(axis=0), cloud.points.max(axis=0))


def normalize(cloud: PointCloud) -> tuple[PointCloud, np.ndarray, float]:
    """Center on the bounding-box center and divide by half the box diagonal.

    The output bounding box lies inside [-1, 1]^3.
    """
    box = bounding_box(cloud)
    scale = box.diagonal / 2.0
    if scale == 0.0:
        raise DegenerateCloud("all points are identical; cannot normalize")
    center = box.center
    return apply_frame(cloud, center, scale), center, scale


def apply_frame(cloud: PointCloud, center: np.ndarray, scale: float) -> PointCloud:
    """Map ``cloud`` into the normalized frame defined by ``(center, scale)``."""
    if not scale > 0:
        raise DegenerateCloud("normalization scale must be > 0")
    return PointCloud((cloud.points - np.asarray(center)) / scale)


def denormalize(cloud: PointCloud, center: np.ndarray, scale: float) -> PointCloud:
    return PointCloud(cloud.points * scale + np.asarray(center))
