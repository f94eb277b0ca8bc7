"""Differentiable operators on 2-D tensors and their backward rules."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any, Literal

import numpy as np

from ..errors import InvalidInput, ShapeError
from .tape import Tape, Tensor, register_rule

LEAKY_SLOPE = 0.2

Activation = Literal["leaky_relu", "linear"]


def _tape_of(*tensors: Tensor) -> Tape:
    for tensor in tensors:
        if tensor.tape is not None:
            return tensor.tape
    return Tape(record=False)


def _apply(op: str, inputs: Sequence[Tensor], values: np.ndarray, **context: Any) -> Tensor:
    return _tape_of(*inputs).apply(op, inputs, values, **context)


# ---- linear algebra ----


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.cols != b.rows:
        raise ShapeError(f"matmul: {a.shape} @ {b.shape}")
    return _apply("matmul", [a, b], a.values @ b.values)


@register_rule("matmul")
def _matmul_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    a, b = inputs
    return [up @ b.T, a.T @ up]


def add_row(x: Tensor, bias: Tensor) -> Tensor:
    """Add a 1×d bias row to every row of ``x``."""
    if bias.rows != 1 or bias.cols != x.cols:
        raise ShapeError(f"add_row: bias {bias.shape} does not fit {x.shape}")
    return _apply("add_row", [x, bias], x.values + bias.values)


@register_rule("add_row")
def _add_row_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    return [up, up.sum(axis=0, keepdims=True)]


def leaky_relu(x: Tensor, slope: float = LEAKY_SLOPE) -> Tensor:
    return _apply("leaky_relu", [x], np.where(x.values > 0.0, x.values, slope * x.values), slope=slope)


@register_rule("leaky_relu")
def _leaky_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    return [up * np.where(inputs[0] > 0.0, 1.0, ctx["slope"])]


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    return add_row(matmul(x, weight), bias)


def shared_mlp(
    points: Tensor,
    layers: Sequence[tuple[Tensor, Tensor]],
    activation: Activation = "leaky_relu",
    *,
    linear_output: bool = False,
) -> Tensor:
    """Apply the same stack of affine layers to every row.

    ``layers`` holds (weight d_in×d_out, bias 1×d_out) pairs. With
    ``linear_output`` the last layer skips the activation.
    """
    if activation not in ("leaky_relu", "linear"):
        raise InvalidInput(f"unknown activation {activation!r}")
    h = points
    for i, (weight, bias) in enumerate(layers):
        h = linear(h, weight, bias)
        last = i == len(layers) - 1
        if activation == "leaky_relu" and not (last and linear_output):
            h = leaky_relu(h)
    return h


# ---- point-set structure ----


def concat_cols(a: Tensor, b: Tensor) -> Tensor:
    if a.rows != b.rows:
        raise ShapeError(f"concat_cols: row counts {a.rows} and {b.rows} differ")
    return _apply("concat_cols", [a, b], np.concatenate([a.values, b.values], axis=1), split=a.cols)


@register_rule("concat_cols")
def _concat_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    split = ctx["split"]
    return [up[:, :split], up[:, split:]]


def broadcast_rows(g: Tensor, n: int) -> Tensor:
    if g.rows != 1:
        raise ShapeError(f"broadcast_rows needs a 1xd tensor, got {g.shape}")
    if n < 1:
        raise ShapeError("broadcast_rows needs n >= 1")
    return _apply("broadcast_rows", [g], np.repeat(g.values, n, axis=0))


@register_rule("broadcast_rows")
def _broadcast_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    return [up.sum(axis=0, keepdims=True)]


def max_pool_points(features: Tensor) -> Tensor:
    """Column-wise max over points; ties resolve to the lowest row."""
    if features.rows < 1:
        raise ShapeError("max_pool_points needs at least one row")
    argmax = np.argmax(features.values, axis=0)
    pooled = features.values[argmax, np.arange(features.cols)][None, :]
    return _apply("max_pool_points", [features], pooled, argmax=argmax)


@register_rule("max_pool_points")
def _max_pool_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    grad = np.zeros_like(inputs[0])
    grad[ctx["argmax"], np.arange(grad.shape[1])] = up[0]
    return [grad]


def mean_pool_points(features: Tensor) -> Tensor:
    if features.rows < 1:
        raise ShapeError("mean_pool_points needs at least one row")
    return _apply("mean_pool_points", [features], features.values.mean(axis=0, keepdims=True))


@register_rule("mean_pool_points")
def _mean_pool_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    n = inputs[0].shape[0]
    return [np.repeat(up / n, n, axis=0)]


# ---- elementwise and reductions ----


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)
    return _apply("add", [a, b], a.values + b.values)


@register_rule("add")
def _add_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    return [up, up]


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("sub", a, b)
    return _apply("sub", [a, b], a.values - b.values)


@register_rule("sub")
def _sub_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    return [up, -up]


def scale(x: Tensor, factor: float) -> Tensor:
    return _apply("scale", [x], x.values * factor, factor=factor)


@register_rule("scale")
def _scale_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    return [up * ctx["factor"]]


def add_scalar(x: Tensor, value: float) -> Tensor:
    return _apply("add_scalar", [x], x.values + value)


@register_rule("add_scalar")
def _add_scalar_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    return [up]


def square(x: Tensor) -> Tensor:
    return _apply("square", [x], x.values * x.values)


@register_rule("square")
def _square_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    return [2.0 * inputs[0] * up]


def sum_all(x: Tensor) -> Tensor:
    return _apply("sum_all", [x], np.array([[x.values.sum()]]))


@register_rule("sum_all")
def _sum_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    return [np.full_like(inputs[0], up[0, 0])]


def mean_all(x: Tensor) -> Tensor:
    return scale(sum_all(x), 1.0 / x.values.size)


def external_loss(pred: Tensor, value: float, grad: np.ndarray) -> Tensor:
    """A 1×1 loss computed outside the tape, with its gradient wrt ``pred`` supplied.

    Chamfer and EMD enter training this way: the nearest-neighbor or matching
    assignment is fixed at forward time.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != pred.shape:
        raise ShapeError(f"external_loss: gradient {grad.shape} does not match {pred.shape}")
    return _apply("external_loss", [pred], np.array([[value]], dtype=np.float64), grad=grad)


@register_rule("external_loss")
def _external_rule(up: np.ndarray, inputs: list[np.ndarray], out: np.ndarray, ctx: dict[str, Any]) -> list[np.ndarray]:
    return [up[0, 0] * ctx["grad"]]
