"""Deterministic counter-based random streams."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput


def _stream_key(key: int | str) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if key < 0:
        raise InvalidInput("stream keys must be >= 0")
    return int(key)


@dataclass(eq=False)
class Rng:
    """Philox stream addressed by ``(seed, stream)``.

    Equal ``(seed, stream)`` pairs give bit-identical draws on every platform.
    ``child`` derives an independent stream without consuming this one.
    """

    seed: int
    stream: tuple[int, ...] = ()
    _generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.seed < 0 or self.seed >= 2**64:
            raise InvalidInput("seed must be a 64-bit unsigned integer")
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self._generator = np.random.Generator(np.random.Philox(sequence))

    def child(self, *keys: int | str) -> "Rng":
        return Rng(self.seed, self.stream + tuple(_stream_key(k) for k in keys))

    def derive_seed(self) -> int:
        """64-bit seed identifying this stream, stable across runs."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return int(sequence.generate_state(1, dtype=np.uint64)[0])

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def integers(self, low: int, high: int, size: int | tuple[int, ...] | None = None) -> np.ndarray:
        return self._generator.integers(low, high, size=size)

    def uniform(
        self, low: float | np.ndarray = 0.0, high: float | np.ndarray = 1.0, size: int | tuple[int, ...] | None = None
    ) -> np.ndarray:
        return self._generator.uniform(low, high, size=size)

    def normal(self, scale: float = 1.0, size: int | tuple[int, ...] | None = None) -> np.ndarray:
        return self._generator.normal(0.0, scale, size=size)

    def random(self, size: int | tuple[int, ...] | None = None) -> np.ndarray:
        return self._generator.random(size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)
