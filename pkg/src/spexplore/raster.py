"""SSER raster files.

Binary layout (all little-endian)::

    bytes 0-3    magic b"SSER"
    bytes 4-15   uint32 width, height, bands
    bytes 16-    float32 samples, row-major, band-interleaved-by-pixel

The CSV variant starts with the line ``SSER-CSV,<width>,<height>,<bands>``
followed by one pixel per line (``bands`` comma-separated values), in the
same row-major order. Values are float32 in both encodings.
"""

import struct
from pathlib import Path

import numpy as np

from .errors import ParseError

MAGIC = b"SSER"
_HEADER = struct.Struct("<4sIII")
CSV_TAG = "SSER-CSV"


def _is_csv(path) -> bool:
    return Path(path).suffix.lower() == ".csv"


def write_raster(path, data) -> Path:
    """Write an ``(height, width, bands)`` array; ``.csv`` selects the text form."""
    path = Path(path)
    arr = np.asarray(data, dtype=np.float32)
    if arr.ndim != 3:
        raise ValueError(f"raster must be (height, width, bands), got {arr.shape}")
    h, w, d = arr.shape
    if _is_csv(path):
        lines = [f"{CSV_TAG},{w},{h},{d}"]
        lines.extend(",".join(repr(float(v)) for v in px) for px in arr.reshape(-1, d))
        path.write_text("\n".join(lines) + "\n")
    else:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, w, h, d))
            fh.write(arr.astype("<f4").tobytes(order="C"))
    return path


def _read_binary(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ParseError(f"{path}: truncated header at byte offset {len(raw)} (need {_HEADER.size} bytes)")
    magic, w, h, d = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ParseError(f"{path}: bad magic {magic!r} at byte offset 0")
    if w == 0 or h == 0 or d == 0:
        raise ParseError(f"{path}: zero dimension in header (width={w}, height={h}, bands={d})")
    need = _HEADER.size + 4 * w * h * d
    if len(raw) < need:
        raise ParseError(f"{path}: truncated at byte offset {len(raw)}, expected {need} bytes")
    if len(raw) > need:
        raise ParseError(f"{path}: {len(raw) - need} trailing bytes after byte offset {need}")
    arr = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size, count=w * h * d)
    return arr.reshape(h, w, d).astype(np.float64)


def _read_csv(path: Path) -> np.ndarray:
    text = path.read_text()
    lines = text.splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file at byte offset 0")
    head = lines[0].split(",")
    if len(head) != 4 or head[0] != CSV_TAG:
        raise ParseError(f"{path}: bad header line {lines[0]!r} at byte offset 0")
    try:
        w, h, d = (int(v) for v in head[1:])
    except ValueError:
        raise ParseError(f"{path}: non-integer dimensions in header at byte offset 0") from None
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != w * h:
        offset = len(text.encode())
        raise ParseError(f"{path}: expected {w * h} pixel lines, found {len(body)} (file ends at byte offset {offset})")
    out = np.empty((w * h, d), dtype=np.float32)
    offset = len(lines[0]) + 1
    for i, ln in enumerate(body):
        parts = ln.split(",")
        if len(parts) != d:
            raise ParseError(f"{path}: pixel line {i} has {len(parts)} values, expected {d} (byte offset {offset})")
        try:
            out[i] = [float(p) for p in parts]
        except ValueError:
            raise ParseError(f"{path}: unparsable value on pixel line {i} (byte offset {offset})") from None
        offset += len(ln) + 1
    return out.reshape(h, w, d).astype(np.float64)


def read_raster(path) -> np.ndarray:
    """Read an SSER raster (binary or CSV) as a float64 ``(height, width, bands)`` array."""
    path = Path(path)
    try:
        if _is_csv(path):
            return _read_csv(path)
        return _read_binary(path)
    except OSError as exc:
        raise ParseError(f"{path}: cannot read raster ({exc.strerror or exc})") from exc
