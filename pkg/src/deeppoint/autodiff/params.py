"""Named parameters with gradient and Adam moment buffers."""

from __future__ import annotations

import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigMismatch, ShapeError
from .tape import Tape, Tensor


@dataclass
class Parameter:
    name: str
    value: np.ndarray
    grad: np.ndarray = field(init=False)
    m: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.value = np.array(self.value, dtype=np.float64, copy=True)
        if self.value.ndim != 2:
            raise ShapeError(f"parameter {self.name} must be 2-D, got shape {self.value.shape}")
        self.grad = np.zeros_like(self.value)
        self.m = np.zeros_like(self.value)
        self.v = np.zeros_like(self.value)


@dataclass(frozen=True)
class StoreSnapshot:
    step: int
    tensors: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]


class ParamStore:
    """Ordered, uniquely named parameters of one network."""

    def __init__(self, name: str) -> None:
        self.name = name
        self.step = 0
        self._params: dict[str, Parameter] = {}

    def add(self, name: str, value: np.ndarray) -> Parameter:
        if name in self._params:
            raise ConfigMismatch(f"duplicate parameter name {name}")
        param = Parameter(name, value)
        self._params[name] = param
        return param

    def __contains__(self, name: object) -> bool:
        return name in self._params

    def __getitem__(self, name: str) -> Parameter:
        return self._params[name]

    def __iter__(self) -> Iterator[Parameter]:
        return iter(self._params.values())

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return list(self._params)

    def parameter_count(self) -> int:
        return sum(p.value.size for p in self)

    def bind(self, tape: Tape, *, trainable: bool = True) -> dict[str, Tensor]:
        """Expose every parameter on ``tape``; frozen networks enter as constants."""
        if trainable:
            return {p.name: tape.leaf(p.value, p.name) for p in self}
        return {p.name: tape.constant(p.value) for p in self}

    def accumulate(self, grads: Mapping[str, np.ndarray]) -> None:
        for name, grad in grads.items():
            param = self._params.get(name)
            if param is None:
                continue
            if grad.shape != param.value.shape:
                raise ShapeError(f"gradient for {name} has shape {grad.shape}, expected {param.value.shape}")
            param.grad += grad

    def zero_grad(self) -> None:
        for p in self:
            p.grad.fill(0.0)

    def grad_norm(self) -> float:
        return math.sqrt(sum(float(np.sum(p.grad * p.grad)) for p in self))

    def clip_grad_norm(self, max_norm: float) -> float:
        """Rescale gradients so their global L2 norm is at most ``max_norm``; returns the norm before."""
        norm = self.grad_norm()
        if norm > max_norm:
            factor = max_norm / norm
            for p in self:
                p.grad *= factor
        return norm

    def values(self) -> dict[str, np.ndarray]:
        return {p.name: p.value.copy() for p in self}

    def load_values(self, values: Mapping[str, np.ndarray]) -> None:
        """Replace every parameter value; names and shapes must match exactly."""
        expected, found = set(self._params), set(values)
        if expected != found:
            missing = sorted(expected - found)
            extra = sorted(found - expected)
            raise ConfigMismatch(f"{self.name}: missing parameters {missing[:3]}, unexpected {extra[:3]}")
        for name, value in values.items():
            param = self._params[name]
            if value.shape != param.value.shape:
                raise ConfigMismatch(f"{name}: checkpoint shape {value.shape} != model shape {param.value.shape}")
            param.value = np.array(value, dtype=np.float64, copy=True)

    def snapshot(self) -> StoreSnapshot:
        return StoreSnapshot(self.step, {p.name: (p.value.copy(), p.m.copy(), p.v.copy()) for p in self})

    def restore(self, snapshot: StoreSnapshot) -> None:
        self.step = snapshot.step
        for name, (value, m, v) in snapshot.tensors.items():
            param = self._params[name]
            param.value, param.m, param.v = value.copy(), m.copy(), v.copy()
        self.zero_grad()

    def fingerprint(self) -> bytes:
        return b"".join(p.value.tobytes() for p in self)


def adam_step(store: ParamStore, lr: float, beta1: float = 0.5, beta2: float = 0.999, eps: float = 1e-8) -> None:
    """One bias-corrected Adam update from the accumulated gradients; gradients are zeroed."""
    store.step += 1
    t = store.step
    correction1 = 1.0 - beta1**t
    correction2 = 1.0 - beta2**t
    for p in store:
        p.m = beta1 * p.m + (1.0 - beta1) * p.grad
        p.v = beta2 * p.v + (1.0 - beta2) * p.grad * p.grad
        m_hat = p.m / correction1
        v_hat = p.v / correction2
        p.value = p.value - lr * m_hat / (np.sqrt(v_hat) + eps)
    store.zero_grad()
