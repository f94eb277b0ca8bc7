"""The DeepPoint block: shared MLP, coordinate skip, max-pooled global feature."""

from __future__ import annotations

from collections.abc import Mapping, Sequence

from ..autodiff import Tensor, broadcast_rows, concat_cols, max_pool_points, shared_mlp
from ..errors import ShapeError

Shape = tuple[int, int]


def mlp_shapes(prefix: str, in_dim: int, widths: Sequence[int]) -> list[tuple[str, Shape]]:
    """Parameter names and shapes for a shared MLP, layer by layer."""
    shapes: list[tuple[str, Shape]] = []
    for j, width in enumerate(widths):
        shapes.append((f"{prefix}/mlp{j}/weight", (in_dim, width)))
        shapes.append((f"{prefix}/mlp{j}/bias", (1, width)))
        in_dim = width
    return shapes


def mlp_layers(params: Mapping[str, Tensor], prefix: str, depth: int) -> list[tuple[Tensor, Tensor]]:
    try:
        return [(params[f"{prefix}/mlp{j}/weight"], params[f"{prefix}/mlp{j}/bias"]) for j in range(depth)]
    except KeyError as exc:
        raise ShapeError(f"missing parameter {exc.args[0]}") from exc


def point_features(f_in: Tensor, xyz: Tensor, layers: Sequence[tuple[Tensor, Tensor]], *, xyz_skip: bool = True) -> Tensor:
    """Per-point features ``f = [mlp(F_in) | xyz]``; without the skip just ``mlp(F_in)``."""
    if f_in.rows != xyz.rows or xyz.cols != 3:
        raise ShapeError(f"block input {f_in.shape} and coordinates {xyz.shape} disagree")
    h = shared_mlp(f_in, layers)
    return concat_cols(h, xyz) if xyz_skip else h


def with_global_feature(f: Tensor) -> Tensor:
    """``[f | broadcast(maxpool(f))]``, doubling the width."""
    return concat_cols(f, broadcast_rows(max_pool_points(f), f.rows))


def deeppoint_block(
    f_in: Tensor, xyz: Tensor, layers: Sequence[tuple[Tensor, Tensor]], *, xyz_skip: bool = True
) -> Tensor:
    return with_global_feature(point_features(f_in, xyz, layers, xyz_skip=xyz_skip))
