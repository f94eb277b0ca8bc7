"""Pinhole depth rendering and back-projection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyView, InvalidInput
from ..geometry import PointCloud, Viewpoint

SENTINEL = -1.0
DEFAULT_MAX_RANGE_CM = 2000.0


@dataclass(frozen=True, eq=False)
class DepthImage:
    """Camera-frame z-depth per pixel (cm); ``SENTINEL`` marks no return."""

    ranges: np.ndarray
    view: Viewpoint
    max_range: float = DEFAULT_MAX_RANGE_CM

    def __post_init__(self) -> None:
        ranges = np.array(self.ranges, dtype=np.float64, copy=True)
        if ranges.shape != (self.view.height, self.view.width):
            raise InvalidInput(
                f"depth grid shape {ranges.shape} does not match view size {(self.view.height, self.view.width)}"
            )
        valid = ranges != SENTINEL
        if not np.isfinite(ranges).all():
            raise InvalidInput("depth image has non-finite values")
        if np.any(ranges[valid] <= 0.0) or np.any(ranges[valid] > self.max_range):
            raise InvalidInput("depth values must lie in (0, max_range]")
        ranges.setflags(write=False)
        object.__setattr__(self, "ranges", ranges)

    @property
    def valid(self) -> np.ndarray:
        return self.ranges != SENTINEL

    @property
    def valid_count(self) -> int:
        return int(self.valid.sum())


def look_at(
    position: np.ndarray,
    target: np.ndarray,
    *,
    focal: float,
    height: int,
    width: int,
    up: tuple[float, float, float] = (0.0, 0.0, 1.0),
) -> Viewpoint:
    position = np.asarray(position, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - position
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, np.asarray(up, dtype=np.float64))
    norm = np.linalg.norm(right)
    if norm == 0.0:
        raise InvalidInput("viewing direction is parallel to the up vector")
    right /= norm
    down = np.cross(forward, right)
    rotation = np.column_stack([right, down, forward])
    return Viewpoint(position, rotation, focal, width / 2.0, height / 2.0, height, width)


def orbit_viewpoints(
    k: int,
    *,
    distance: float = 600.0,
    elevation_deg: float = 15.0,
    target: tuple[float, float, float] = (0.0, 0.0, 79.0),
    focal: float = 45.0,
    height: int = 64,
    width: int = 64,
) -> list[Viewpoint]:
    """``k`` cameras at equal azimuth steps around ``target``."""
    if k < 1:
        raise InvalidInput("need at least one viewpoint")
    elevation = math.radians(elevation_deg)
    center = np.asarray(target, dtype=np.float64)
    views = []
    for i in range(k):
        azimuth = 2.0 * math.pi * i / k
        offset = distance * np.array(
            [math.cos(elevation) * math.cos(azimuth), math.cos(elevation) * math.sin(azimuth), math.sin(elevation)]
        )
        views.append(look_at(center + offset, center, focal=focal, height=height, width=width))
    return views


def project(view: Viewpoint, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Continuous pixel coordinates (u, v) and depth z for world points."""
    cam = view.world_to_camera(points)
    z = cam[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = view.focal * cam[:, 0] / z + view.cx
        v = view.focal * cam[:, 1] / z + view.cy
    return u, v, z


def render_depth(cloud: PointCloud, view: Viewpoint, max_range: float = DEFAULT_MAX_RANGE_CM) -> DepthImage:
    """Z-buffer splat: every pixel keeps the nearest point that lands on it."""
    u, v, z = project(view, cloud.points)
    in_front = (z > 0.0) & (z <= max_range)
    cols = np.rint(u[in_front]).astype(np.int64) if in_front.any() else np.empty(0, dtype=np.int64)
    rows = np.rint(v[in_front]).astype(np.int64) if in_front.any() else np.empty(0, dtype=np.int64)
    depth = z[in_front]
    inside = (cols >= 0) & (cols < view.width) & (rows >= 0) & (rows < view.height)

    buffer = np.full(view.height * view.width, np.inf)
    np.minimum.at(buffer, rows[inside] * view.width + cols[inside], depth[inside])
    ranges = np.where(np.isinf(buffer), SENTINEL, buffer).reshape(view.height, view.width)
    return DepthImage(ranges, view, max_range)


def backproject(img: DepthImage) -> PointCloud:
    rows, cols = np.nonzero(img.valid)
    if rows.size == 0:
        raise EmptyView("depth image has no returns")
    view = img.view
    depth = img.ranges[rows, cols]
    cam = np.stack(
        [(cols - view.cx) * depth / view.focal, (rows - view.cy) * depth / view.focal, depth],
        axis=1,
    )
    return PointCloud(view.camera_to_world(cam))
