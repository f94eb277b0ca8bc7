"""Configuration loading and strict validation for DeepPoint runs."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import InvalidConfig, IoError


class StrictModel(BaseModel):
    """Base model that rejects unknown keys."""

    model_config = ConfigDict(extra="forbid")


# ---- synthetic data ----


class CorruptionSpec(StrictModel):
    """Per-pixel corruption applied to rendered depth images."""

    dropout: float = Field(0.3, ge=0.0, le=1.0)
    ghost: float = Field(0.02, ge=0.0, le=1.0)
    ghost_offset_cm: float = Field(50.0, ge=0.0)
    noise_sigma_cm: float = Field(3.0, ge=0.0)
    quantization_cm: float = Field(1.0, ge=0.0)

    @classmethod
    def none(cls) -> "CorruptionSpec":
        return cls(dropout=0.0, ghost=0.0, ghost_offset_cm=0.0, noise_sigma_cm=0.0, quantization_cm=0.0)


class CameraConfig(StrictModel):
    views: int = Field(4, ge=1)
    distance_cm: float = Field(600.0, gt=0.0)
    elevation_deg: float = 15.0
    target_height_cm: float = 79.0
    focal_px: float = Field(45.0, gt=0.0)
    height: int = Field(64, ge=8)
    width: int = Field(64, ge=8)
    max_range_cm: float = Field(2000.0, gt=0.0)


class DatasetConfig(StrictModel):
    root: str = "data/deeppoint"
    models: int = Field(8, ge=1, le=8)
    per_model: int = Field(200, ge=1)
    train_size: int = Field(1520, ge=0)
    test_size: int = Field(80, ge=0)
    points: int = Field(1024, ge=1)
    render_points: int = Field(16384, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    workers: int = Field(1, ge=1)
    camera: CameraConfig = Field(default_factory=CameraConfig)

    @property
    def total(self) -> int:
        return self.models * self.per_model


# ---- networks ----


class BlockConfig(StrictModel):
    widths: list[int] = Field(min_length=1)

    @field_validator("widths")
    @classmethod
    def _positive(cls, widths: list[int]) -> list[int]:
        if any(w < 1 for w in widths):
            raise ValueError("block widths must be >= 1")
        return widths

    @property
    def mlp_out(self) -> int:
        return self.widths[-1]


BLOCK_PRESETS: dict[int, list[int]] = {
    1: [128],
    2: [128, 256],
    5: [64, 128, 256, 128, 64],
    7: [64, 128, 256, 512, 256, 128, 64],
}

THREE_SKIPS: list[tuple[int, int]] = [(1, 7), (2, 6), (3, 5)]


class GeneratorConfig(StrictModel):
    blocks: list[BlockConfig] = Field(default_factory=lambda: [BlockConfig(widths=[w]) for w in BLOCK_PRESETS[5]])
    xyz_skip: bool = True
    cross_block_skips: list[tuple[int, int]] = Field(default_factory=list)
    head_widths: list[int] = Field(default_factory=lambda: [64, 3])
    points: int = Field(1024, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "GeneratorConfig":
        if not self.blocks:
            raise ValueError("generator needs at least one block")
        if not self.head_widths or self.head_widths[-1] != 3:
            raise ValueError("generator head must end at dimension 3")
        if any(w < 1 for w in self.head_widths):
            raise ValueError("head widths must be >= 1")
        seen: set[tuple[int, int]] = set()
        for src, dst in self.cross_block_skips:
            if not (1 <= src < dst <= len(self.blocks)):
                raise ValueError(f"skip ({src}, {dst}) must satisfy 1 <= source < destination <= {len(self.blocks)}")
            if (src, dst) in seen:
                raise ValueError(f"duplicate skip ({src}, {dst})")
            seen.add((src, dst))
        return self

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @classmethod
    def preset(cls, num_blocks: int, **overrides: Any) -> "GeneratorConfig":
        if num_blocks not in BLOCK_PRESETS:
            raise InvalidConfig(f"no width preset for {num_blocks} blocks; choose from {sorted(BLOCK_PRESETS)}")
        return cls(blocks=[BlockConfig(widths=[w]) for w in BLOCK_PRESETS[num_blocks]], **overrides)


class DiscriminatorConfig(StrictModel):
    mlp_widths: list[int] = Field(default_factory=lambda: [64, 128, 256], min_length=1)
    pooling: Literal["max", "avg", "mix"] = "mix"
    fc_widths: list[int] = Field(default_factory=lambda: [256, 1])

    @model_validator(mode="after")
    def _check(self) -> "DiscriminatorConfig":
        if len(self.fc_widths) != 2 or self.fc_widths[-1] != 1:
            raise ValueError("discriminator needs exactly two fully connected layers ending at 1")
        if any(w < 1 for w in (*self.mlp_widths, *self.fc_widths)):
            raise ValueError("discriminator widths must be >= 1")
        return self


class ModelConfig(StrictModel):
    generator: GeneratorConfig = Field(default_factory=GeneratorConfig)
    discriminator: DiscriminatorConfig = Field(default_factory=DiscriminatorConfig)


# ---- optimization ----


class LossWeights(StrictModel):
    cf: float = Field(100.0, ge=0.0)
    emd: float = Field(1.0, ge=0.0)


class AdamConfig(StrictModel):
    beta1: float = Field(0.5, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    eps: float = Field(1e-8, gt=0.0)


class TrainConfig(StrictModel):
    epochs: int = Field(200, ge=1)
    batch_size: int = Field(4, gt=0)
    base_lr: float = Field(2e-4, ge=0.0)
    decay_start_epoch: int = Field(100, ge=0)
    loss_weights: LossWeights = Field(default_factory=LossWeights)
    adam: AdamConfig = Field(default_factory=AdamConfig)
    grad_clip_norm: float = Field(10.0, gt=0.0)
    seed: int = Field(0, ge=0, lt=2**64)
    checkpoint_every: int = Field(10, ge=1)
    eval_slice: int = Field(8, ge=0)
    max_consecutive_errors: int = Field(3, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "TrainConfig":
        if self.decay_start_epoch > self.epochs:
            raise ValueError("decay_start_epoch must be <= epochs")
        return self


class EMDConfig(StrictModel):
    exact_max_points: int = Field(256, ge=1)
    auction_max_iterations: int = Field(200_000, ge=1)


class EvaluationConfig(StrictModel):
    tau_cm: float = Field(1.0, gt=0.0)
    outlier_tau_cm: float = Field(10.0, gt=0.0)
    workers: int = Field(1, ge=1)


class LoggingConfig(StrictModel):
    logs_dir: str = "logs"
    event_file_name: str = "events.jsonl"
    summary_file_name: str = "summary.jsonl"


class RunConfig(StrictModel):
    out_dir: str = "runs/default"
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    corruption: CorruptionSpec = Field(default_factory=CorruptionSpec)
    model: ModelConfig = Field(default_factory=ModelConfig)
    training: TrainConfig = Field(default_factory=TrainConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    emd: EMDConfig = Field(default_factory=EMDConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if self.model.generator.points != self.dataset.points:
            raise ValueError(
                f"model.generator.points ({self.model.generator.points}) must equal dataset.points ({self.dataset.points})"
            )
        if self.dataset.train_size + self.dataset.test_size > self.dataset.total:
            raise ValueError(
                f"split {self.dataset.train_size}/{self.dataset.test_size} exceeds {self.dataset.total} samples"
            )
        return self


def load_config(config_path: str | Path = "config/config.yaml") -> RunConfig:
    """Load and strictly validate YAML config."""
    path = Path(config_path)
    try:
        with path.open("r", encoding="utf-8") as f:
            raw: dict[str, Any] = yaml.safe_load(f) or {}
    except FileNotFoundError as exc:
        raise InvalidConfig(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise InvalidConfig(f"config file is not valid YAML: {path}: {exc}") from exc
    return validate_config(raw)


def validate_config(raw: Any) -> RunConfig:
    if not isinstance(raw, dict):
        raise InvalidConfig("config root must be a mapping")
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ()))
        raise InvalidConfig(f"{where}: {first.get('msg')}" if where else str(first.get("msg"))) from exc


def config_to_dict(config: RunConfig) -> dict[str, Any]:
    return config.model_dump(mode="json")


def write_resolved_config(config: RunConfig, directory: str | Path) -> Path:
    """Write the fully resolved config beside a command's outputs."""
    target = Path(directory) / "resolved_config.yaml"
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(yaml.safe_dump(config_to_dict(config), sort_keys=True), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write resolved config {target}: {exc}") from exc
    return target


def with_overrides(config: RunConfig, overrides: dict[str, Any]) -> RunConfig:
    """Apply dotted-key overrides (``training.seed``) and revalidate."""
    raw = config_to_dict(config)
    for dotted, value in overrides.items():
        node = raw
        parts = dotted.split(".")
        for part in parts[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                raise InvalidConfig(f"unknown config section: {dotted}")
            node = child
        if parts[-1] not in node:
            raise InvalidConfig(f"unknown config key: {dotted}")
        node[parts[-1]] = value
    return validate_config(raw)
