"""Point clouds, viewpoints and bounding boxes.

All coordinates are centimeters. Arrays held by these types are made
read-only at construction so values can be shared between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput

ROTATION_TOLERANCE = 1e-9


def _frozen(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise InvalidInput(f"point cloud must be an n x 3 array, got shape {points.shape}")
        if points.shape[0] == 0:
            raise InvalidInput("point cloud is empty")
        if not np.isfinite(points).all():
            raise InvalidInput("point cloud has non-finite coordinates")
        object.__setattr__(self, "points", _frozen(points))

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    def __len__(self) -> int:
        return self.n

    def transformed(self, rotation: np.ndarray, translation: np.ndarray) -> "PointCloud":
        return PointCloud(self.points @ np.asarray(rotation).T + np.asarray(translation))

    def same_points(self, other: "PointCloud") -> bool:
        return self.points.shape == other.points.shape and bool(np.array_equal(self.points, other.points))


@dataclass(frozen=True, eq=False)
class Aabb:
    min: np.ndarray
    max: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.min, dtype=np.float64).reshape(3)
        hi = np.asarray(self.max, dtype=np.float64).reshape(3)
        if np.any(lo > hi):
            raise InvalidInput("bounding box min must be <= max componentwise")
        object.__setattr__(self, "min", _frozen(lo))
        object.__setattr__(self, "max", _frozen(hi))

    @property
    def center(self) -> np.ndarray:
        return (self.min + self.max) / 2.0

    @property
    def extent(self) -> np.ndarray:
        return self.max - self.min

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.extent))

    def contains(self, other: "Aabb", tolerance: float = 0.0) -> bool:
        return bool(np.all(other.min >= self.min - tolerance) and np.all(other.max <= self.max + tolerance))

    def contains_points(self, points: np.ndarray, tolerance: float = 0.0) -> bool:
        pts = np.asarray(points)
        return bool(np.all(pts >= self.min - tolerance) and np.all(pts <= self.max + tolerance))

    def union(self, other: "Aabb") -> "Aabb":
        return Aabb(np.minimum(self.min, other.min), np.maximum(self.max, other.max))

    def inflated(self, margin: float) -> "Aabb":
        return Aabb(self.min - margin, self.max + margin)


@dataclass(frozen=True, eq=False)
class Viewpoint:
    """Pinhole camera. ``rotation`` maps camera-frame vectors to the world frame.

    Camera frame: +z along the optical axis, +x to the right, +y down the image.
    """

    position: np.ndarray
    rotation: np.ndarray
    focal: float
    cx: float
    cy: float
    height: int
    width: int

    def __post_init__(self) -> None:
        position = np.asarray(self.position, dtype=np.float64).reshape(3)
        rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        if not np.isfinite(position).all() or not np.isfinite(rotation).all():
            raise InvalidInput("viewpoint pose must be finite")
        if np.abs(rotation.T @ rotation - np.eye(3)).max() > ROTATION_TOLERANCE:
            raise InvalidInput("viewpoint rotation is not orthonormal")
        if abs(np.linalg.det(rotation) - 1.0) > ROTATION_TOLERANCE:
            raise InvalidInput("viewpoint rotation must have determinant +1")
        if self.height < 8 or self.width < 8:
            raise InvalidInput("image size must be at least 8 x 8")
        if not self.focal > 0:
            raise InvalidInput("focal length must be > 0")
        object.__setattr__(self, "position", _frozen(position))
        object.__setattr__(self, "rotation", _frozen(rotation))
        object.__setattr__(self, "focal", float(self.focal))
        object.__setattr__(self, "cx", float(self.cx))
        object.__setattr__(self, "cy", float(self.cy))
        object.__setattr__(self, "height", int(self.height))
        object.__setattr__(self, "width", int(self.width))

    def world_to_camera(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points) - self.position) @ self.rotation

    def camera_to_world(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points) @ self.rotation.T + self.position


def nearest_rotation(matrix: np.ndarray) -> np.ndarray:
    """Closest proper rotation in the Frobenius sense (used after float32 storage)."""
    u, _, vt = np.linalg.svd(np.asarray(matrix, dtype=np.float64).reshape(3, 3))
    rotation = u @ vt
    if np.linalg.det(rotation) < 0:
        u[:, -1] = -u[:, -1]
        rotation = u @ vt
    return rotation


def yaw_rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
