"""Core geometry types and point-cloud utilities."""

from .rng import Rng
from .sampling import (
    RESAMPLE_JITTER_BOUND_CM,
    RESAMPLE_JITTER_CM,
    apply_frame,
    bounding_box,
    denormalize,
    farthest_point_indices,
    normalize,
    resample,
)
from .types import Aabb, PointCloud, Viewpoint, nearest_rotation, yaw_rotation

__all__ = [
    "Aabb",
    "PointCloud",
    "RESAMPLE_JITTER_BOUND_CM",
    "RESAMPLE_JITTER_CM",
    "Rng",
    "Viewpoint",
    "apply_frame",
    "bounding_box",
    "denormalize",
    "farthest_point_indices",
    "nearest_rotation",
    "normalize",
    "resample",
    "yaw_rotation",
]
