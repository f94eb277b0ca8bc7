"""ASCII PLY reading and writing for point clouds (coordinates in cm).

Parsing is done by ``plyfile``. This module only narrows what it accepts
(ascii, a non-empty ``vertex`` element with scalar ``x y z``, finite values)
and turns every failure into a ``ParseError`` carrying the 1-based file line.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from plyfile import PlyData, PlyElement, PlyElementParseError, PlyHeaderParseError, PlyListProperty, PlyParseError

from ..errors import IoError, ParseError
from ..geometry import PointCloud

_AXES = ("x", "y", "z")


def format_ply(cloud: PointCloud, comment: str | None = None) -> str:
    vertices = np.empty(cloud.n, dtype=[(axis, "f8") for axis in _AXES])
    for col, axis in enumerate(_AXES):
        vertices[axis] = cloud.points[:, col]
    comments = ["units cm"]
    if comment:
        comments.append(comment)
    buffer = io.BytesIO()
    PlyData([PlyElement.describe(vertices, "vertex")], text=True, comments=comments).write(buffer)
    return buffer.getvalue().decode("ascii")


def write_ply(path: str | Path, cloud: PointCloud, comment: str | None = None) -> Path:
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(format_ply(cloud, comment), encoding="ascii")
    except OSError as exc:
        raise IoError(f"cannot write {target}: {exc}") from exc
    return target


def read_ply(path: str | Path) -> PointCloud:
    source = Path(path)
    try:
        text = source.read_text(encoding="ascii")
    except UnicodeDecodeError as exc:
        raise ParseError("file is not ASCII", path=str(source)) from exc
    except OSError as exc:
        raise IoError(f"cannot read {source}: {exc}") from exc
    return parse_ply(text, where=str(source))


def _header_length(lines: list[str]) -> int:
    for idx, line in enumerate(lines):
        if line.strip() == "end_header":
            return idx + 1
    return len(lines)


def _keyword_line(lines: list[str], keyword: str) -> int | None:
    for idx, line in enumerate(lines[: _header_length(lines)]):
        if line.split()[:1] == [keyword]:
            return idx + 1
    return None


def _data_line(lines: list[str], element_name: str, row: int) -> int:
    """Map a 0-based row of an element to its 1-based line in the file."""
    header = _header_length(lines)
    preceding = 0
    for line in lines[:header]:
        tokens = line.split()
        if tokens[:1] != ["element"] or len(tokens) != 3:
            continue
        if tokens[1] == element_name:
            break
        preceding += int(tokens[2])
    return header + preceding + row + 1


def parse_ply(text: str, where: str = "<ply>") -> PointCloud:
    lines = text.splitlines()
    try:
        ply = PlyData.read(io.BytesIO(text.encode("ascii")))
    except PlyHeaderParseError as exc:
        raise ParseError(f"malformed header: {exc.message}", line=exc.line, path=where) from exc
    except PlyElementParseError as exc:
        name = exc.element.name if exc.element is not None else "vertex"
        line = _data_line(lines, name, exc.row) if exc.row is not None else None
        raise ParseError(f"malformed {name} row: {exc.message}", line=line, path=where) from exc
    except UnicodeError as exc:
        raise ParseError("file is not ASCII", path=where) from exc
    except (PlyParseError, ValueError) as exc:
        raise ParseError(f"malformed PLY: {exc}", path=where) from exc

    if not ply.text:
        raise ParseError("unsupported binary format; only ascii 1.0", line=_keyword_line(lines, "format"), path=where)
    names = [element.name for element in ply.elements]
    if "vertex" not in names:
        raise ParseError("no vertex element", path=where)
    vertex = ply["vertex"]
    declared = {prop.name: prop for prop in vertex.properties}
    missing = [axis for axis in _AXES if axis not in declared]
    if missing:
        raise ParseError(f"vertex element lacks properties {missing}", path=where)
    if any(isinstance(prop, PlyListProperty) for prop in vertex.properties):
        raise ParseError("list properties on vertex are not supported", path=where)
    if vertex.count == 0:
        raise ParseError("vertex element is empty", path=where)

    points = np.column_stack([np.asarray(vertex[axis], dtype=np.float64) for axis in _AXES])
    bad = np.flatnonzero(~np.all(np.isfinite(points), axis=1))
    if bad.size:
        raise ParseError("non-finite coordinate", line=_data_line(lines, "vertex", int(bad[0])), path=where)
    return PointCloud(points)
