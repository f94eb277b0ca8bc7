"""Binary parameter checkpoints (``.dpck``).

Layout, little-endian:

    b"DPCK", u32 version, u32 count
    count × (u32 name_len, utf-8 name, u32 rows, u32 cols, f64[rows*cols])
    optional moment section:
    b"MOMS", u32 count, entries as above named "m:<param>", "v:<param>"
    and "t:<store>" (1×1, the store's Adam step count)
"""

from __future__ import annotations

import os
import struct
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigMismatch, IoError, ParseError
from .params import ParamStore

MAGIC = b"DPCK"
MOMENTS_MAGIC = b"MOMS"
VERSION = 1
_U32 = struct.Struct("<I")


@dataclass
class Checkpoint:
    params: dict[str, np.ndarray]
    moments: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def has_moments(self) -> bool:
        return bool(self.moments)

    def for_store(self, store: ParamStore) -> dict[str, np.ndarray]:
        prefix = f"{store.name}/"
        return {name: value for name, value in self.params.items() if name.startswith(prefix)}

    def restore(self, store: ParamStore, *, with_moments: bool = False) -> None:
        store.load_values(self.for_store(store))
        if not with_moments:
            return
        if f"t:{store.name}" not in self.moments:
            raise ConfigMismatch(f"checkpoint has no optimizer state for {store.name}")
        for p in store:
            p.m = self.moments[f"m:{p.name}"].copy()
            p.v = self.moments[f"v:{p.name}"].copy()
        store.step = int(self.moments[f"t:{store.name}"][0, 0])


def _entries(named: Iterable[tuple[str, np.ndarray]]) -> list[bytes]:
    chunks = []
    for name, value in named:
        encoded = name.encode("utf-8")
        rows, cols = value.shape
        chunks.append(_U32.pack(len(encoded)) + encoded + struct.pack("<II", rows, cols))
        chunks.append(np.ascontiguousarray(value, dtype="<f8").tobytes())
    return chunks


def encode_checkpoint(stores: Iterable[ParamStore], *, include_moments: bool = True) -> bytes:
    stores = list(stores)
    params = [(p.name, p.value) for store in stores for p in store]
    chunks = [MAGIC, _U32.pack(VERSION), _U32.pack(len(params)), *_entries(params)]
    if include_moments:
        moments: list[tuple[str, np.ndarray]] = []
        for store in stores:
            for p in store:
                moments.append((f"m:{p.name}", p.m))
                moments.append((f"v:{p.name}", p.v))
            moments.append((f"t:{store.name}", np.array([[float(store.step)]])))
        chunks += [MOMENTS_MAGIC, _U32.pack(len(moments)), *_entries(moments)]
    return b"".join(chunks)


class _Reader:
    def __init__(self, payload: bytes, where: str) -> None:
        self.payload = payload
        self.where = where
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.payload):
            raise ParseError(f"truncated at byte {self.offset}", path=self.where)
        chunk = self.payload[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def u32(self) -> int:
        return int(_U32.unpack(self.take(4))[0])

    def entries(self, count: int) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for _ in range(count):
            try:
                name = self.take(self.u32()).decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"bad parameter name: {exc}", path=self.where) from exc
            rows, cols = self.u32(), self.u32()
            data = np.frombuffer(self.take(8 * rows * cols), dtype="<f8").astype(np.float64)
            if name in out:
                raise ParseError(f"duplicate entry {name}", path=self.where)
            out[name] = data.reshape(rows, cols)
        return out

    @property
    def done(self) -> bool:
        return self.offset == len(self.payload)


def decode_checkpoint(payload: bytes, where: str = "<checkpoint>") -> Checkpoint:
    reader = _Reader(payload, where)
    if reader.take(4) != MAGIC:
        raise ParseError("not a DPCK checkpoint", path=where)
    version = reader.u32()
    if version != VERSION:
        raise ParseError(f"unsupported checkpoint version {version}", path=where)
    params = reader.entries(reader.u32())
    moments: dict[str, np.ndarray] = {}
    if not reader.done:
        if reader.take(4) != MOMENTS_MAGIC:
            raise ParseError("unexpected trailing data", path=where)
        moments = reader.entries(reader.u32())
    if not reader.done:
        raise ParseError("unexpected trailing data", path=where)
    return Checkpoint(params, moments)


def write_checkpoint(path: str | Path, stores: Iterable[ParamStore], *, include_moments: bool = True) -> Path:
    target = Path(path)
    payload = encode_checkpoint(stores, include_moments=include_moments)
    tmp = target.with_name(target.name + ".tmp")
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_bytes(payload)
        os.replace(tmp, target)
    except OSError as exc:
        raise IoError(f"cannot write checkpoint {target}: {exc}") from exc
    return target


def read_checkpoint(path: str | Path) -> Checkpoint:
    source = Path(path)
    try:
        payload = source.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read checkpoint {source}: {exc}") from exc
    return decode_checkpoint(payload, where=str(source))
