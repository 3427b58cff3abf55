"""Binary matrix format used by the CLI for exact round-trips.

Layout: 4-byte magic ``RQLP``, then rows and cols as little-endian uint64,
then the payload as little-endian float64 in column-major order.
"""

import struct

import numpy as np

from .errors import CapacityError, NonFiniteError, ParseError
from .validation import as_matrix

__all__ = ["MAGIC", "read_matrix", "write_matrix"]

MAGIC = b"RQLP"
_HEADER = struct.Struct("<4sQQ")


def write_matrix(path, a):
    a = as_matrix(a, "a")
    if not np.isfinite(a).all():
        raise NonFiniteError("refusing to write non-finite entries")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, a.shape[0], a.shape[1]))
        fh.write(np.asfortranarray(a, dtype="<f8").tobytes(order="F"))


def read_matrix(path, mem_cap=None):
    path = str(path)
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ParseError("truncated header", path=path)
        magic, rows, cols = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ParseError(f"bad magic {magic!r}, expected {MAGIC!r}", path=path)
        if rows < 1 or cols < 1:
            raise ParseError(f"bad dimensions {rows}x{cols}", path=path)
        if mem_cap is not None and rows * cols * 8 > mem_cap:
            raise CapacityError(
                f"dense {rows}x{cols} needs {rows * cols * 8} bytes, cap is {mem_cap}"
            )
        payload = fh.read(rows * cols * 8)
    if len(payload) != rows * cols * 8:
        raise ParseError(
            f"payload holds {len(payload)} bytes, expected {rows * cols * 8}", path=path
        )
    data = np.frombuffer(payload, dtype="<f8")
    return data.reshape((rows, cols), order="F").copy(order="F")
