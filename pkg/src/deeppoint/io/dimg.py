"""Binary depth-image files (``.dimg``).

Layout, little-endian:

    b"DIMG"                     magic
    u32 H, u32 W
    f32[H*W]                    row-major ranges, -1.0 marks no return
    f32[3]                      camera position (cm)
    f32[9]                      camera-to-world rotation, row-major
    f32[4]                      focal (px), cx (px), cy (px), max range (cm)
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import IoError, ParseError
from ..geometry import Viewpoint, nearest_rotation
from ..synth.camera import DepthImage

MAGIC = b"DIMG"
_HEADER = struct.Struct("<4sII")
_RECORD_FLOATS = 3 + 9 + 4


def encode_dimg(img: DepthImage) -> bytes:
    view = img.view
    record = np.concatenate(
        [view.position, view.rotation.reshape(-1), [view.focal, view.cx, view.cy, img.max_range]]
    )
    return b"".join(
        [
            _HEADER.pack(MAGIC, view.height, view.width),
            img.ranges.astype("<f4").tobytes(order="C"),
            record.astype("<f4").tobytes(),
        ]
    )


def decode_dimg(payload: bytes, where: str = "<dimg>") -> DepthImage:
    if len(payload) < _HEADER.size:
        raise ParseError("truncated header", path=where)
    magic, height, width = _HEADER.unpack_from(payload, 0)
    if magic != MAGIC:
        raise ParseError(f"bad magic {magic!r}", path=where)
    grid_bytes = 4 * height * width
    expected = _HEADER.size + grid_bytes + 4 * _RECORD_FLOATS
    if len(payload) != expected:
        raise ParseError(f"expected {expected} bytes, found {len(payload)}", path=where)
    offset = _HEADER.size
    grid = np.frombuffer(payload, dtype="<f4", count=height * width, offset=offset).astype(np.float64)
    record = np.frombuffer(payload, dtype="<f4", count=_RECORD_FLOATS, offset=offset + grid_bytes).astype(np.float64)
    position, rotation, intrinsics = record[:3], record[3:12].reshape(3, 3), record[12:]
    focal, cx, cy, max_range = intrinsics.tolist()
    try:
        view = Viewpoint(position, nearest_rotation(rotation), focal, cx, cy, height, width)
        return DepthImage(grid.reshape(height, width), view, max_range)
    except ValueError as exc:
        raise ParseError(str(exc), path=where) from exc


def write_dimg(path: str | Path, img: DepthImage) -> Path:
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(encode_dimg(img))
    except OSError as exc:
        raise IoError(f"cannot write {target}: {exc}") from exc
    return target


def read_dimg(path: str | Path) -> DepthImage:
    source = Path(path)
    try:
        payload = source.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {source}: {exc}") from exc
    return decode_dimg(payload, where=str(source))
