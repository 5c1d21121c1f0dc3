"""DLF1 binary field container.

Layout (all little-endian):

* 64-byte magic block: ASCII ``DLF1`` padded with NUL bytes.
* Header: u32 ``d``, u32 ``n``, u32 ``c``, u32 ``nt``, f64 ``L``, f64 ``dt``,
  f64 ``nu``, u32 name length, then the UTF-8 name bytes.
* Payload: ``nt * c * n**d`` f64 samples, row-major with time outermost,
  component next, space innermost.
* Trailer: u32 CRC-32 of the payload bytes.
"""
from __future__ import annotations

import struct
import zlib

import numpy as np

from .fields import PeriodicGrid, SpaceTimeField

__all__ = ["write_field", "read_field", "FieldFormatError"]

_MAGIC = b"DLF1".ljust(64, b"\0")
_HEADER_FMT = "<IIIIdddI"


class FieldFormatError(Exception):
    """Raised for malformed, truncated or corrupted DLF1 data."""


def write_field(path: str, field: SpaceTimeField) -> None:
    """Serialize a field to ``path`` in DLF1 form (bit-exact round trip)."""
    grid = field.grid
    name_bytes = field.name.encode("utf-8")
    payload = np.ascontiguousarray(field.samples, dtype="<f8").tobytes()
    header = struct.pack(
        _HEADER_FMT, grid.d, grid.n, field.components, grid.nt,
        grid.L, grid.dt, field.viscosity, len(name_bytes),
    )
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(header)
        fh.write(name_bytes)
        fh.write(payload)
        fh.write(struct.pack("<I", crc))


def read_field(path: str) -> SpaceTimeField:
    """Read a DLF1 file back into a :class:`SpaceTimeField`."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 64 + struct.calcsize(_HEADER_FMT) + 4:
        raise FieldFormatError("file too short for a DLF1 container")
    if blob[:4] != b"DLF1":
        raise FieldFormatError(f"bad magic {blob[:4]!r}")
    off = 64
    d, n, c, nt, L, dt, nu, name_len = struct.unpack_from(_HEADER_FMT, blob, off)
    off += struct.calcsize(_HEADER_FMT)
    if off + name_len > len(blob):
        raise FieldFormatError("truncated name field")
    try:
        name = blob[off:off + name_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FieldFormatError("name is not valid UTF-8") from exc
    off += name_len
    count = nt * c * n**d
    payload_bytes = count * 8
    if off + payload_bytes + 4 > len(blob):
        raise FieldFormatError(
            f"truncated payload: need {payload_bytes} bytes, have {len(blob) - off - 4}"
        )
    payload = blob[off:off + payload_bytes]
    (crc_stored,) = struct.unpack_from("<I", blob, off + payload_bytes)
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    if crc != crc_stored:
        raise FieldFormatError(f"payload checksum mismatch: {crc:#x} != {crc_stored:#x}")
    try:
        grid = PeriodicGrid(d=d, n=n, L=L, nt=nt, dt=dt if nt > 1 else 1.0)
    except ValueError as exc:
        raise FieldFormatError(f"invalid header: {exc}") from exc
    samples = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(
        (nt, c) + grid.shape_space
    )
    return SpaceTimeField(grid, samples, name=name, viscosity=nu,
                          metadata={"source": path, "format": "DLF1"})
