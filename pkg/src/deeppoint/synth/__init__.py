"""Synthetic car scenes, depth rendering, corruption and view fusion.

``deeppoint.synth.dataset`` is imported explicitly; it depends on ``deeppoint.io``,
which itself needs ``DepthImage`` from this package.
"""

from .camera import DEFAULT_MAX_RANGE_CM, SENTINEL, DepthImage, backproject, look_at, orbit_viewpoints, project, render_depth
from .corruption import corrupt_depth
from .fusion import fuse_views
from .scene import FAMILIES, Box, Cylinder, SceneSpec, make_scene, sample_surface

__all__ = [
    "Box",
    "Cylinder",
    "DEFAULT_MAX_RANGE_CM",
    "DepthImage",
    "FAMILIES",
    "SENTINEL",
    "SceneSpec",
    "backproject",
    "corrupt_depth",
    "fuse_views",
    "look_at",
    "make_scene",
    "orbit_viewpoints",
    "project",
    "render_depth",
    "sample_surface",
]
