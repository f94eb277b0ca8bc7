"""Parametric car scenes and area-weighted surface sampling.

A car is an axis-aligned body box, a cabin box on top of it and four wheel
cylinders (axles along y). Scenes are built in a local frame with the car
centered on x/y and the wheels resting on z = 0, then posed by a yaw about the
vertical axis and a translation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Protocol

import numpy as np

from ..errors import InvalidInput
from ..geometry import PointCloud, Rng, yaw_rotation

NOMINAL_EXTENT_CM = np.array([445.0, 175.0, 158.0])
EXTENT_JITTER = 0.2
POSE_TRANSLATION_CM = 50.0


@dataclass(frozen=True)
class FamilyShape:
    name: str
    cabin_length: float
    cabin_offset: float
    body_height: float
    wheel_radius: float
    cabin_width: float


# Fractions of the full length / width / height.
FAMILIES: tuple[FamilyShape, ...] = (
    FamilyShape("sedan", 0.45, -0.05, 0.42, 0.20, 0.88),
    FamilyShape("hatchback", 0.50, -0.12, 0.44, 0.19, 0.90),
    FamilyShape("suv", 0.62, -0.08, 0.50, 0.23, 0.94),
    FamilyShape("coupe", 0.38, -0.02, 0.40, 0.19, 0.86),
    FamilyShape("wagon", 0.66, -0.10, 0.43, 0.20, 0.92),
    FamilyShape("pickup", 0.30, 0.12, 0.52, 0.24, 0.95),
    FamilyShape("van", 0.80, 0.02, 0.46, 0.18, 0.96),
    FamilyShape("roadster", 0.28, -0.15, 0.38, 0.18, 0.80),
)

WHEEL_WIDTH_FRACTION = 0.12
BODY_CLEARANCE_FRACTION = 0.55


class Primitive(Protocol):
    @property
    def area(self) -> float: ...

    def sample(self, count: int, rng: Rng) -> np.ndarray: ...

    def surface_residual(self, points: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class Box:
    center: tuple[float, float, float]
    size: tuple[float, float, float]

    @property
    def area(self) -> float:
        a, b, c = self.size
        return 2.0 * (a * b + b * c + c * a)

    def sample(self, count: int, rng: Rng) -> np.ndarray:
        half = np.asarray(self.size) / 2.0
        a, b, c = self.size
        face_areas = np.array([b * c, b * c, a * c, a * c, a * b, a * b])
        faces = rng.generator.choice(6, size=count, p=face_areas / face_areas.sum())
        local = rng.uniform(-half, half, size=(count, 3))
        axis = faces // 2
        sign = np.where(faces % 2 == 0, -1.0, 1.0)
        rows = np.arange(count)
        local[rows, axis] = sign * half[axis]
        return local + np.asarray(self.center)

    def surface_residual(self, points: np.ndarray) -> np.ndarray:
        half = np.asarray(self.size) / 2.0
        return np.max(np.abs(np.asarray(points) - np.asarray(self.center)) - half, axis=1)


@dataclass(frozen=True)
class Cylinder:
    """Closed cylinder with its axis along y."""

    center: tuple[float, float, float]
    radius: float
    width: float

    @property
    def area(self) -> float:
        return 2.0 * math.pi * self.radius * self.width + 2.0 * math.pi * self.radius**2

    def sample(self, count: int, rng: Rng) -> np.ndarray:
        lateral = 2.0 * math.pi * self.radius * self.width
        cap = math.pi * self.radius**2
        part = rng.generator.choice(3, size=count, p=np.array([lateral, cap, cap]) / self.area)
        theta = rng.uniform(0.0, 2.0 * math.pi, size=count)
        radial = np.where(part == 0, self.radius, self.radius * np.sqrt(rng.random(size=count)))
        along = rng.uniform(-self.width / 2.0, self.width / 2.0, size=count)
        along = np.where(part == 1, -self.width / 2.0, along)
        along = np.where(part == 2, self.width / 2.0, along)
        local = np.stack([radial * np.cos(theta), along, radial * np.sin(theta)], axis=1)
        return local + np.asarray(self.center)

    def surface_residual(self, points: np.ndarray) -> np.ndarray:
        delta = np.asarray(points) - np.asarray(self.center)
        radial = np.sqrt(delta[:, 0] ** 2 + delta[:, 2] ** 2) - self.radius
        along = np.abs(delta[:, 1]) - self.width / 2.0
        return np.maximum(radial, along)


@dataclass(frozen=True)
class SceneSpec:
    family: int
    body_size: tuple[float, float, float]
    cabin_size: tuple[float, float, float]
    cabin_offset: tuple[float, float, float]
    wheel_radius: float
    wheel_width: float
    yaw: float = 0.0
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        sizes = (*self.body_size, *self.cabin_size, self.wheel_radius, self.wheel_width)
        if any(not s > 0 for s in sizes):
            raise InvalidInput("scene extents must be > 0")

    @property
    def full_extent(self) -> np.ndarray:
        """Length, width, height of the unposed car."""
        length, width, _ = self.body_size
        height = self.cabin_offset[2] + self.cabin_size[2] / 2.0
        return np.array([length, width, height])

    @property
    def rotation(self) -> np.ndarray:
        return yaw_rotation(self.yaw)

    def unposed(self) -> "SceneSpec":
        return replace(self, yaw=0.0, translation=(0.0, 0.0, 0.0))

    def extent_tuple(self) -> tuple[float, ...]:
        return (*self.body_size, *self.cabin_size, *self.cabin_offset, self.wheel_radius, self.wheel_width)

    def primitives(self) -> list[Box | Cylinder]:
        length, width, body_height = self.body_size
        clearance = BODY_CLEARANCE_FRACTION * self.wheel_radius
        body = Box((0.0, 0.0, clearance + body_height / 2.0), self.body_size)
        cabin = Box(self.cabin_offset, self.cabin_size)
        wheel_x = length / 2.0 - 1.4 * self.wheel_radius
        wheel_y = width / 2.0 - self.wheel_width / 2.0
        wheels = [
            Cylinder((sx * wheel_x, sy * wheel_y, self.wheel_radius), self.wheel_radius, self.wheel_width)
            for sx in (-1.0, 1.0)
            for sy in (-1.0, 1.0)
        ]
        return [body, cabin, *wheels]


def make_scene(family: int, rng: Rng) -> SceneSpec:
    """Draw one car of ``family`` with extents jittered ±20% around the nominal size."""
    if not isinstance(family, (int, np.integer)) or not 0 <= family < len(FAMILIES):
        raise InvalidInput(f"unknown shape family {family!r}; expected 0..{len(FAMILIES) - 1}")
    shape = FAMILIES[int(family)]
    factors = rng.uniform(1.0 - EXTENT_JITTER, 1.0 + EXTENT_JITTER, size=3)
    length, width, height = (NOMINAL_EXTENT_CM * factors).tolist()

    wheel_radius = shape.wheel_radius * height
    clearance = BODY_CLEARANCE_FRACTION * wheel_radius
    body_height = shape.body_height * height
    cabin_height = height - clearance - body_height
    cabin_size = (shape.cabin_length * length, shape.cabin_width * width, cabin_height)
    cabin_offset = (shape.cabin_offset * length, 0.0, clearance + body_height + cabin_height / 2.0)

    yaw = float(rng.uniform(0.0, 2.0 * math.pi))
    tx, ty = rng.uniform(-POSE_TRANSLATION_CM, POSE_TRANSLATION_CM, size=2).tolist()
    return SceneSpec(
        family=int(family),
        body_size=(length, width, body_height),
        cabin_size=cabin_size,
        cabin_offset=cabin_offset,
        wheel_radius=wheel_radius,
        wheel_width=WHEEL_WIDTH_FRACTION * width,
        yaw=yaw,
        translation=(tx, ty, 0.0),
    )


def sample_primitives(primitives: list[Box | Cylinder], n: int, rng: Rng) -> np.ndarray:
    """``n`` points spread over the primitives in proportion to surface area."""
    if n < 1:
        raise InvalidInput("sample count must be >= 1")
    areas = np.array([p.area for p in primitives])
    owner = rng.generator.choice(len(primitives), size=n, p=areas / areas.sum())
    counts = np.bincount(owner, minlength=len(primitives))
    chunks = [p.sample(int(c), rng.child("primitive", i)) for i, (p, c) in enumerate(zip(primitives, counts)) if c]
    return np.vstack(chunks)


def sample_surface(scene: SceneSpec, n: int, rng: Rng) -> PointCloud:
    local = sample_primitives(scene.primitives(), n, rng)
    return PointCloud(local @ scene.rotation.T + np.asarray(scene.translation))
