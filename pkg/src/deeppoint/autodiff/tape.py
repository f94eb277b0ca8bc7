"""Dense 2-D tensors and the operation tape used for reverse-mode gradients.

Each recording op appends a ``Node`` (op name, input ids, output id, saved
context). ``backward`` walks the nodes in reverse and applies the rule
registered for each op name, Wengert-list style.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import NumericalError, ShapeError

# rule(upstream, input values, output value, context) -> one gradient (or None) per input
BackwardRule = Callable[[np.ndarray, list[np.ndarray], np.ndarray, dict[str, Any]], Sequence["np.ndarray | None"]]

_RULES: dict[str, BackwardRule] = {}


def register_rule(op: str) -> Callable[[BackwardRule], BackwardRule]:
    def decorate(rule: BackwardRule) -> BackwardRule:
        _RULES[op] = rule
        return rule

    return decorate


@dataclass(frozen=True)
class Node:
    op: str
    op_id: int
    inputs: tuple[int, ...]
    output: int
    context: dict[str, Any] = field(default_factory=dict)
    # input values at record time, untracked constants included
    saved: tuple[np.ndarray, ...] = ()


class Tensor:
    """A rows×cols float64 matrix, optionally tracked on a tape."""

    __slots__ = ("values", "tape", "node_id", "generation")

    def __init__(self, values: np.ndarray, tape: "Tape | None" = None, node_id: int | None = None) -> None:
        array = np.asarray(values, dtype=np.float64)
        if array.ndim != 2:
            raise ShapeError(f"tensors are 2-D, got shape {array.shape}")
        self.values = array
        self.tape = tape
        self.node_id = node_id
        self.generation = tape.generation if tape is not None else 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def tracked(self) -> bool:
        return self.node_id is not None

    def item(self) -> float:
        if self.shape != (1, 1):
            raise ShapeError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.values[0, 0])

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, tracked={self.tracked})"


class Tape:
    """Append-only record of differentiable ops for one forward pass.

    With ``record=False`` ops still run and are checked for finiteness, but
    nothing is stored; use it for inference.
    """

    def __init__(self, *, record: bool = True) -> None:
        self.record_ops = record
        self.nodes: list[Node] = []
        self.values: list[np.ndarray] = []
        self.leaves: dict[int, str] = {}
        self.op_count = 0
        self.generation = 0

    def _new_id(self, values: np.ndarray) -> int:
        self.values.append(values)
        return len(self.values) - 1

    def leaf(self, values: np.ndarray, name: str) -> Tensor:
        """A named trainable input; its gradient is returned by ``backward``."""
        tensor = Tensor(values, self)
        if self.record_ops:
            tensor.node_id = self._new_id(tensor.values)
            self.leaves[tensor.node_id] = name
        return tensor

    def constant(self, values: np.ndarray) -> Tensor:
        return Tensor(values, self)

    def apply(self, op: str, inputs: Sequence[Tensor], values: np.ndarray, **context: Any) -> Tensor:
        """Wrap an op result, checking it is finite and recording it when needed."""
        op_id = self.op_count
        self.op_count += 1
        if not np.isfinite(values).all():
            raise NumericalError(f"non-finite output from {op}", op_id=op_id)
        for tensor in inputs:
            if tensor.tape is not None and tensor.tape is not self:
                raise ShapeError(f"{op}: inputs come from different tapes")
            if tensor.tracked and tensor.generation != self.generation:
                raise ShapeError(f"{op}: input was recorded before the tape was cleared")
        out = Tensor(values, self)
        if self.record_ops and any(t.tracked for t in inputs):
            out.node_id = self._new_id(out.values)
            input_ids = tuple(t.node_id if t.node_id is not None else -1 for t in inputs)
            self.nodes.append(Node(op, op_id, input_ids, out.node_id, dict(context), tuple(t.values for t in inputs)))
        return out

    def clear(self) -> None:
        self.nodes.clear()
        self.values.clear()
        self.leaves.clear()
        self.op_count = 0
        self.generation += 1


def backward(loss: Tensor) -> dict[str, np.ndarray]:
    """Gradients of a 1×1 ``loss`` with respect to every named leaf; clears the tape.

    Leaves the loss does not reach get zero gradients.
    """
    if loss.shape != (1, 1):
        raise ShapeError(f"loss must be 1x1, got {loss.shape}")
    tape = loss.tape
    if tape is None or not tape.record_ops:
        raise ShapeError("loss was not produced on a recording tape")
    if loss.generation != tape.generation:
        raise ShapeError("loss belongs to a tape pass that was already consumed")

    grads: dict[int, np.ndarray] = {}
    if loss.node_id is not None:
        grads[loss.node_id] = np.ones((1, 1))
    for node in reversed(tape.nodes):
        upstream = grads.pop(node.output, None)
        if upstream is None:
            continue
        rule = _RULES[node.op]
        input_grads = rule(upstream, list(node.saved), tape.values[node.output], node.context)
        for input_id, grad in zip(node.inputs, input_grads):
            if input_id < 0 or grad is None:
                continue
            if not np.isfinite(grad).all():
                raise NumericalError(f"non-finite gradient through {node.op}", op_id=node.op_id)
            if input_id in grads:
                grads[input_id] = grads[input_id] + grad
            else:
                grads[input_id] = grad

    result = {
        name: grads[node_id] if node_id in grads else np.zeros_like(tape.values[node_id])
        for node_id, name in tape.leaves.items()
    }
    tape.clear()
    return result
