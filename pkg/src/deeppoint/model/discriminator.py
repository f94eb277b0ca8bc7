"""Two-stream conditional discriminator scoring (condition, candidate) cloud pairs."""

from __future__ import annotations

from collections.abc import Mapping

from ..autodiff import ParamStore, Tape, Tensor, concat_cols, leaky_relu, linear, max_pool_points, mean_pool_points, shared_mlp
from ..config import DiscriminatorConfig
from ..errors import ShapeError
from ..geometry import PointCloud
from .blocks import Shape, mlp_layers, mlp_shapes

PREFIX = "discriminator"


def global_dim(cfg: DiscriminatorConfig) -> int:
    """Width of one stream's pooled feature."""
    width = cfg.mlp_widths[-1]
    return 2 * width if cfg.pooling == "mix" else width


def discriminator_shapes(cfg: DiscriminatorConfig) -> list[tuple[str, Shape]]:
    # both streams share the point MLP
    shapes = mlp_shapes(f"{PREFIX}/stream", 3, cfg.mlp_widths)
    fc_in = 2 * global_dim(cfg)
    for j, width in enumerate(cfg.fc_widths):
        shapes.append((f"{PREFIX}/fc{j}/weight", (fc_in, width)))
        shapes.append((f"{PREFIX}/fc{j}/bias", (1, width)))
        fc_in = width
    return shapes


def _pool(features: Tensor, pooling: str) -> Tensor:
    if pooling == "max":
        return max_pool_points(features)
    if pooling == "avg":
        return mean_pool_points(features)
    return concat_cols(max_pool_points(features), mean_pool_points(features))


def stream_feature(points: Tensor, cfg: DiscriminatorConfig, params: Mapping[str, Tensor]) -> Tensor:
    layers = mlp_layers(params, f"{PREFIX}/stream", len(cfg.mlp_widths))
    return _pool(shared_mlp(points, layers), cfg.pooling)


def discriminator_tensor(cond: Tensor, cand: Tensor, cfg: DiscriminatorConfig, params: Mapping[str, Tensor]) -> Tensor:
    """Raw 1×1 score; least-squares targets are 1 for real pairs and 0 for fakes."""
    if cond.cols != 3 or cand.cols != 3:
        raise ShapeError(f"discriminator streams must be n x 3, got {cond.shape} and {cand.shape}")
    if cond.rows != cand.rows:
        raise ShapeError(f"condition has {cond.rows} points, candidate {cand.rows}")
    h = concat_cols(stream_feature(cond, cfg, params), stream_feature(cand, cfg, params))
    h = leaky_relu(linear(h, params[f"{PREFIX}/fc0/weight"], params[f"{PREFIX}/fc0/bias"]))
    return linear(h, params[f"{PREFIX}/fc1/weight"], params[f"{PREFIX}/fc1/bias"])


def discriminator_forward(cond: PointCloud, cand: PointCloud, cfg: DiscriminatorConfig, store: ParamStore) -> float:
    tape = Tape(record=False)
    score = discriminator_tensor(tape.constant(cond.points), tape.constant(cand.points), cfg, store.bind(tape, trainable=False))
    return score.item()
