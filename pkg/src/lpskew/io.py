"""Series file formats.

CSV
    A header line ``x`` followed by one value per line, written with
    ``repr`` so values round-trip exactly.
Binary
    The 8-byte magic ``LPSKEWF8``, the count as a little-endian uint64, then
    the values as little-endian float64.
"""

from __future__ import annotations

import io
import os
import struct

import numpy as np

MAGIC = b"LPSKEWF8"
_COUNT = struct.Struct("<Q")


class SeriesFormatError(ValueError):
    pass


def format_csv(x) -> str:
    buf = io.StringIO()
    buf.write("x\n")
    for v in np.asarray(x, dtype=float).tolist():
        buf.write(repr(v))
        buf.write("\n")
    return buf.getvalue()


def parse_csv(text: str) -> np.ndarray:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0].lower() != "x":
        raise SeriesFormatError("CSV series must start with the header 'x'")
    try:
        values = [float(ln.split(",")[0]) for ln in lines[1:]]
    except ValueError as exc:
        raise SeriesFormatError(f"bad CSV value: {exc}") from None
    return np.array(values, dtype=float)


def format_binary(x) -> bytes:
    x = np.asarray(x, dtype="<f8")
    return MAGIC + _COUNT.pack(x.size) + x.tobytes()


def parse_binary(data: bytes) -> np.ndarray:
    head = len(MAGIC) + _COUNT.size
    if len(data) < head or data[: len(MAGIC)] != MAGIC:
        raise SeriesFormatError("missing binary series magic")
    (count,) = _COUNT.unpack_from(data, len(MAGIC))
    if len(data) != head + 8 * count:
        raise SeriesFormatError("binary series length does not match its header")
    return np.frombuffer(data, dtype="<f8", offset=head).astype(float)


def read_series(path: str | os.PathLike, fmt: str = "auto") -> np.ndarray:
    """Read a series written by :func:`write_series` (format sniffed by default)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if fmt == "auto":
        fmt = "bin" if data.startswith(MAGIC) else "csv"
    if fmt == "bin":
        return parse_binary(data)
    if fmt == "csv":
        try:
            return parse_csv(data.decode("utf-8"))
        except UnicodeDecodeError:
            raise SeriesFormatError("series file is neither CSV nor binary") from None
    raise ValueError(f"unknown series format {fmt!r}")


def write_series(path: str | os.PathLike, x, fmt: str = "csv") -> None:
    if fmt == "csv":
        with open(path, "w", newline="\n") as fh:
            fh.write(format_csv(x))
    elif fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(format_binary(x))
    else:
        raise ValueError(f"unknown series format {fmt!r}")
