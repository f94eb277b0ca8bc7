"""Point-cloud and depth-image file formats."""

from .dimg import decode_dimg, encode_dimg, read_dimg, write_dimg
from .ply import format_ply, parse_ply, read_ply, write_ply

__all__ = [
    "decode_dimg",
    "encode_dimg",
    "format_ply",
    "parse_ply",
    "read_dimg",
    "read_ply",
    "write_dimg",
    "write_ply",
]
