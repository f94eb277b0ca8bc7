"""Minimal float64 tensor engine with tape-based reverse-mode gradients."""

from .checkpoint import Checkpoint, decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint
from .ops import (
    LEAKY_SLOPE,
    add,
    add_row,
    add_scalar,
    broadcast_rows,
    concat_cols,
    external_loss,
    leaky_relu,
    linear,
    matmul,
    max_pool_points,
    mean_all,
    mean_pool_points,
    scale,
    shared_mlp,
    square,
    sub,
    sum_all,
)
from .params import Parameter, ParamStore, adam_step
from .tape import Node, Tape, Tensor, backward

__all__ = [
    "Checkpoint",
    "LEAKY_SLOPE",
    "Node",
    "ParamStore",
    "Parameter",
    "Tape",
    "Tensor",
    "adam_step",
    "add",
    "add_row",
    "add_scalar",
    "backward",
    "broadcast_rows",
    "concat_cols",
    "decode_checkpoint",
    "encode_checkpoint",
    "external_loss",
    "leaky_relu",
    "linear",
    "matmul",
    "max_pool_points",
    "mean_all",
    "mean_pool_points",
    "read_checkpoint",
    "scale",
    "shared_mlp",
    "square",
    "sub",
    "sum_all",
    "write_checkpoint",
]
