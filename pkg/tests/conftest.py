from __future__ import annotations

from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from deeppoint.config import RunConfig, validate_config


def numeric_gradient(fn: Callable[[np.ndarray], float], x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function of an array."""
    base = np.array(x, dtype=np.float64, copy=True)
    grad = np.zeros_like(base)
    for idx in np.ndindex(base.shape):
        original = base[idx]
        base[idx] = original + eps
        plus = fn(base.copy())
        base[idx] = original - eps
        minus = fn(base.copy())
        base[idx] = original
        grad[idx] = (plus - minus) / (2.0 * eps)
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    scale = np.maximum(np.abs(analytic) + np.abs(numeric), floor)
    return float(np.max(np.abs(analytic - numeric) / scale))


def tiny_raw(tmp_path: Path, **sections: Any) -> dict[str, Any]:
    raw: dict[str, Any] = {
        "out_dir": str(tmp_path / "run"),
        "dataset": {
            "root": str(tmp_path / "data"),
            "models": 2,
            "per_model": 2,
            "train_size": 3,
            "test_size": 1,
            "points": 32,
            "render_points": 1024,
            "seed": 0,
            "camera": {"views": 2, "height": 16, "width": 16, "focal_px": 12.0},
        },
        "model": {
            "generator": {"blocks": [{"widths": [8]}], "head_widths": [8, 3], "points": 32},
            "discriminator": {"mlp_widths": [8], "pooling": "mix", "fc_widths": [8, 1]},
        },
        "training": {"epochs": 1, "batch_size": 2, "decay_start_epoch": 1, "checkpoint_every": 1, "eval_slice": 1},
        "logging": {"logs_dir": str(tmp_path / "logs")},
    }
    for key, value in sections.items():
        if isinstance(value, dict) and isinstance(raw.get(key), dict):
            raw[key] = {**raw[key], **value}
        else:
            raw[key] = value
    return raw


@pytest.fixture
def tiny_config(tmp_path: Path) -> RunConfig:
    return validate_config(tiny_raw(tmp_path))
