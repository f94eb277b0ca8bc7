"""Depth-image corruption standing in for imperfect radar-derived depth.

Dropout removes surface returns (specular misses), ghosts add spurious returns
in empty pixels (multi-path), then every remaining value gets range noise and
quantization.
"""

from __future__ import annotations

import numpy as np

from ..config import CorruptionSpec
from ..geometry import Rng
from .camera import SENTINEL, DepthImage


def corrupt_depth(img: DepthImage, spec: CorruptionSpec, rng: Rng) -> DepthImage:
    shape = img.ranges.shape
    valid = img.valid
    # every stream is drawn even when disabled, so each stays fixed per seed
    drop_draw = rng.child("dropout").random(size=shape)
    ghost_draw = rng.child("ghost").random(size=shape)
    ghost_unit = rng.child("ghost_range").random(size=shape)
    noise = rng.child("noise").normal(1.0, size=shape)

    keep = valid & (drop_draw >= spec.dropout)
    out = np.where(keep, img.ranges, SENTINEL)

    if valid.any() and spec.ghost > 0.0:
        lo = float(img.ranges[valid].min()) - spec.ghost_offset_cm
        hi = float(img.ranges[valid].max()) + spec.ghost_offset_cm
        ghosts = ~valid & (ghost_draw < spec.ghost)
        out = np.where(ghosts, lo + ghost_unit * (hi - lo), out)

    returns = out != SENTINEL
    if spec.noise_sigma_cm > 0.0:
        out = np.where(returns, out + spec.noise_sigma_cm * noise, out)
    if spec.quantization_cm > 0.0:
        out = np.where(returns, np.round(out / spec.quantization_cm) * spec.quantization_cm, out)
        floor = spec.quantization_cm
    else:
        floor = np.finfo(np.float64).tiny
    out = np.where(returns, np.clip(out, floor, img.max_range), out)
    return DepthImage(out, img.view, img.max_range)
