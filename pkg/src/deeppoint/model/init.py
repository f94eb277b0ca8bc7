"""Deterministic Glorot initialization of network parameters."""

from __future__ import annotations

import math

import numpy as np

from ..autodiff import ParamStore
from ..config import DiscriminatorConfig, GeneratorConfig
from ..errors import InvalidConfig
from ..geometry import Rng
from .blocks import Shape
from .discriminator import PREFIX as DISCRIMINATOR
from .discriminator import discriminator_shapes
from .generator import PREFIX as GENERATOR
from .generator import generator_shapes


def glorot_bound(fan_in: int, fan_out: int) -> float:
    return math.sqrt(6.0 / (fan_in + fan_out))


def _build(name: str, shapes: list[tuple[str, Shape]], rng: Rng) -> ParamStore:
    store = ParamStore(name)
    for param_name, (rows, cols) in shapes:
        if param_name.endswith("/bias"):
            store.add(param_name, np.zeros((rows, cols)))
        else:
            bound = glorot_bound(rows, cols)
            # one rng stream per parameter name
            store.add(param_name, rng.child(param_name).uniform(-bound, bound, size=(rows, cols)))
    return store


def init_model(cfg: GeneratorConfig | DiscriminatorConfig, rng: Rng) -> ParamStore:
    if isinstance(cfg, GeneratorConfig):
        return _build(GENERATOR, generator_shapes(cfg), rng.child(GENERATOR))
    if isinstance(cfg, DiscriminatorConfig):
        return _build(DISCRIMINATOR, discriminator_shapes(cfg), rng.child(DISCRIMINATOR))
    raise InvalidConfig(f"cannot initialize a model from {type(cfg).__name__}")
