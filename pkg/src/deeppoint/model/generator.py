"""N-block generator mapping a normalized coarse cloud to a refined one of the same size."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

from ..autodiff import ParamStore, Tape, Tensor, concat_cols, shared_mlp
from ..config import GeneratorConfig
from ..errors import ShapeError
from ..geometry import PointCloud
from .blocks import Shape, mlp_layers, mlp_shapes, point_features, with_global_feature

PREFIX = "generator"


@dataclass(frozen=True)
class BlockLayout:
    index: int
    in_dim: int
    widths: tuple[int, ...]
    point_dim: int
    skip_sources: tuple[int, ...]

    @property
    def out_dim(self) -> int:
        return 2 * self.point_dim


def generator_layout(cfg: GeneratorConfig) -> list[BlockLayout]:
    """Input and output widths of every block, skip inputs included."""
    layouts: list[BlockLayout] = []
    in_dim = 3
    for k, block in enumerate(cfg.blocks, start=1):
        sources = tuple(src for src, dst in sorted(cfg.cross_block_skips) if dst == k)
        width = in_dim + sum(layouts[src - 1].point_dim for src in sources)
        point_dim = block.mlp_out + (3 if cfg.xyz_skip else 0)
        layouts.append(BlockLayout(k, width, tuple(block.widths), point_dim, sources))
        in_dim = 2 * point_dim
    return layouts


def generator_shapes(cfg: GeneratorConfig) -> list[tuple[str, Shape]]:
    shapes: list[tuple[str, Shape]] = []
    layouts = generator_layout(cfg)
    for layout in layouts:
        shapes += mlp_shapes(f"{PREFIX}/block{layout.index}", layout.in_dim, layout.widths)
    shapes += mlp_shapes(f"{PREFIX}/head", layouts[-1].out_dim, cfg.head_widths)
    return shapes


def generator_tensor(xyz: Tensor, cfg: GeneratorConfig, params: Mapping[str, Tensor]) -> Tensor:
    """Run every block on ``xyz`` (n×3) and project back to n×3."""
    if xyz.cols != 3:
        raise ShapeError(f"generator input must be n x 3, got {xyz.shape}")
    saved: dict[int, Tensor] = {}
    features = xyz
    for layout in generator_layout(cfg):
        block_in = features
        for src in layout.skip_sources:
            block_in = concat_cols(block_in, saved[src])
        if block_in.cols != layout.in_dim:
            raise ShapeError(f"block {layout.index} expects width {layout.in_dim}, got {block_in.cols}")
        layers = mlp_layers(params, f"{PREFIX}/block{layout.index}", len(layout.widths))
        f = point_features(block_in, xyz, layers, xyz_skip=cfg.xyz_skip)
        saved[layout.index] = f
        features = with_global_feature(f)
    head = mlp_layers(params, f"{PREFIX}/head", len(cfg.head_widths))
    return shared_mlp(features, head, linear_output=True)


def generator_forward(cloud: PointCloud, cfg: GeneratorConfig, store: ParamStore) -> PointCloud:
    """Inference on a normalized cloud; no gradients are recorded."""
    if cloud.n != cfg.points:
        raise ShapeError(f"generator expects {cfg.points} points, got {cloud.n}")
    tape = Tape(record=False)
    out = generator_tensor(tape.constant(cloud.points), cfg, store.bind(tape, trainable=False))
    return PointCloud(out.values)
