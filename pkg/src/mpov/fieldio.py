"""MPOVF1 binary field files.

Layout (little-endian)::

    8 bytes   magic b"MPOVF1\\0\\0"
    u32       nx
    u32       ny
    f64       dx in metres
    f64       wavelength in metres
    nx*ny*2   f64 pairs (re, im), row-major (rows along y)
"""

from __future__ import annotations

import io
import os
import struct
from typing import BinaryIO

import numpy as np

from .errors import (
    FieldFormatError,
    MagicMismatchError,
    NonFiniteFieldError,
    TruncatedFieldError,
    ValidationError,
)
from .grid import ComplexField, GridSpec

MAGIC = b"MPOVF1\x00\x00"
_HEADER = struct.Struct("<8sIIdd")


def encode_field(field: ComplexField) -> bytes:
    g = field.grid
    header = _HEADER.pack(MAGIC, g.nx, g.ny, g.dx, g.wavelength)
    payload = np.ascontiguousarray(field.values, dtype="<c16").tobytes()
    return header + payload


def decode_field(data: bytes) -> ComplexField:
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise MagicMismatchError(f"not an MPOVF1 file (magic {data[:8]!r})")
    if len(data) < _HEADER.size:
        raise TruncatedFieldError(f"header truncated: {len(data)} of {_HEADER.size} bytes")
    _, nx, ny, dx, wavelength = _HEADER.unpack_from(data)
    expected = _HEADER.size + nx * ny * 16
    if len(data) < expected:
        raise TruncatedFieldError(f"payload truncated: {len(data)} of {expected} bytes")
    if len(data) > expected:
        raise FieldFormatError(f"{len(data) - expected} trailing bytes after payload")
    try:
        grid = GridSpec(nx, ny, dx, wavelength)
    except ValidationError as exc:
        raise FieldFormatError(f"invalid header: {exc}") from exc
    values = np.frombuffer(data, dtype="<c16", offset=_HEADER.size).reshape(ny, nx)
    if not np.all(np.isfinite(values)):
        raise NonFiniteFieldError("field payload contains NaN or Inf")
    return ComplexField(grid, values)


def write_field(field: ComplexField, path: str | os.PathLike | BinaryIO) -> None:
    data = encode_field(field)
    if isinstance(path, (str, os.PathLike)):
        with open(path, "wb") as fh:
            fh.write(data)
    else:
        path.write(data)


def read_field(path: str | os.PathLike | BinaryIO) -> ComplexField:
    if isinstance(path, (str, os.PathLike)):
        with open(path, "rb") as fh:
            data = fh.read()
    elif isinstance(path, io.IOBase) or hasattr(path, "read"):
        data = path.read()
    else:
        raise TypeError(f"cannot read a field from {type(path).__name__}")
    return decode_field(data)
