"""Minimal OpenEXR codec for 32-bit float scanline images.

Covers exactly what the toolkit needs: single-part scanline files with FLOAT
channels, NONE/ZIPS/ZIP compression on read, ZIP on write. Channel data is
exchanged as (H, W, C) float32 arrays in on-disk row order (top-down).
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .core import FileFormatError

_MAGIC = 20000630
_PT_UINT, _PT_HALF, _PT_FLOAT = 0, 1, 2
_COMP_NONE, _COMP_ZIPS, _COMP_ZIP = 0, 2, 3
_ZIP_BLOCK = 16

_NAMES_BY_COUNT = {1: ("Y",), 2: ("R", "G"), 3: ("R", "G", "B"), 4: ("R", "G", "B", "A")}


def _reorder_predict(raw: bytes) -> bytes:
    buf = np.frombuffer(raw, dtype=np.uint8)
    half = (len(buf) + 1) // 2
    inter = np.empty_like(buf)
    inter[:half] = buf[0::2]
    inter[half:] = buf[1::2]
    out = inter.astype(np.int16)
    out[1:] = (out[1:] - inter[:-1].astype(np.int16) + 128) & 0xFF
    return out.astype(np.uint8).tobytes()


def _unpredict_interleave(data: bytes) -> bytes:
    buf = np.frombuffer(data, dtype=np.uint8).astype(np.int64)
    if len(buf) == 0:
        return b""
    steps = buf.copy()
    steps[1:] -= 128
    plain = (np.cumsum(steps) & 0xFF).astype(np.uint8)
    half = (len(plain) + 1) // 2
    out = np.empty_like(plain)
    out[0::2] = plain[:half]
    out[1::2] = plain[half:]
    return out.tobytes()


def _attr(name: str, type_name: str, payload: bytes) -> bytes:
    return (
        name.encode("ascii") + b"\0"
        + type_name.encode("ascii") + b"\0"
        + struct.pack("<i", len(payload))
        + payload
    )


def write(path, image: np.ndarray) -> None:
    """Write (H, W, C) float32 rows (top-down) as a ZIP-compressed FLOAT EXR."""
    image = np.ascontiguousarray(image, dtype=np.float32)
    if image.ndim == 2:
        image = image[:, :, None]
    h, w, c = image.shape
    try:
        names = _NAMES_BY_COUNT[c]
    except KeyError:
        raise FileFormatError(f"cannot write {c}-channel EXR") from None

    order = sorted(range(c), key=lambda i: names[i])
    chlist = b""
    for i in order:
        chlist += names[i].encode("ascii") + b"\0"
        chlist += struct.pack("<iBBBBii", _PT_FLOAT, 0, 0, 0, 0, 1, 1)
    chlist += b"\0"

    header = b""
    header += _attr("channels", "chlist", chlist)
    header += _attr("compression", "compression", struct.pack("<B", _COMP_ZIP))
    box = struct.pack("<4i", 0, 0, w - 1, h - 1)
    header += _attr("dataWindow", "box2i", box)
    header += _attr("displayWindow", "box2i", box)
    header += _attr("lineOrder", "lineOrder", struct.pack("<B", 0))
    header += _attr("pixelAspectRatio", "float", struct.pack("<f", 1.0))
    header += _attr("screenWindowCenter", "v2f", struct.pack("<2f", 0.0, 0.0))
    header += _attr("screenWindowWidth", "float", struct.pack("<f", 1.0))
    header += b"\0"

    n_blocks = (h + _ZIP_BLOCK - 1) // _ZIP_BLOCK
    blocks = []
    for b in range(n_blocks):
        y0 = b * _ZIP_BLOCK
        y1 = min(y0 + _ZIP_BLOCK, h)
        rows = []
        for y in range(y0, y1):
            for i in order:
                rows.append(image[y, :, i].tobytes())
        raw = b"".join(rows)
        packed = zlib.compress(_reorder_predict(raw), 6)
        if len(packed) >= len(raw):
            packed = raw
        blocks.append((y0, packed))

    prefix = struct.pack("<ii", _MAGIC, 2) + header
    offset = len(prefix) + 8 * n_blocks
    table = []
    for y0, packed in blocks:
        table.append(offset)
        offset += 8 + len(packed)

    with open(path, "wb") as fh:
        fh.write(prefix)
        fh.write(struct.pack(f"<{n_blocks}Q", *table))
        for y0, packed in blocks:
            fh.write(struct.pack("<ii", y0, len(packed)))
            fh.write(packed)


def _read_cstring(buf: bytes, pos: int) -> tuple[str, int]:
    end = buf.index(b"\0", pos)
    return buf[pos:end].decode("latin-1"), end + 1


def _parse_channels(payload: bytes) -> list[str]:
    names = []
    pos = 0
    while pos < len(payload) and payload[pos] != 0:
        name, pos = _read_cstring(payload, pos)
        ptype, _, _, _, _, xs, ys = struct.unpack_from("<iBBBBii", payload, pos)
        pos += 16
        if ptype == _PT_HALF:
            raise FileFormatError(
                "unsupported bit depth: EXR channels must be 32-bit float, found half"
            )
        if ptype != _PT_FLOAT:
            raise FileFormatError(
                f"unsupported EXR channel pixel type {ptype} (expected FLOAT)"
            )
        if xs != 1 or ys != 1:
            raise FileFormatError("subsampled EXR channels are not supported")
        names.append(name)
    return names


def read(path) -> np.ndarray:
    """Read a FLOAT scanline EXR into (H, W, C) float32, rows top-down."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8:
        raise FileFormatError("not an EXR file (truncated)")
    magic, version = struct.unpack_from("<ii", data, 0)
    if magic != _MAGIC:
        raise FileFormatError("not an EXR file (bad magic)")
    if version & 0x200:
        raise FileFormatError("tiled EXR files are not supported")
    if version & 0x1000 or version & 0x800:
        raise FileFormatError("multi-part/deep EXR files are not supported")

    pos = 8
    channels: list[str] | None = None
    compression = None
    data_window = None
    line_order = 0
    while True:
        if data[pos] == 0:
            pos += 1
            break
        name, pos = _read_cstring(data, pos)
        _, pos = _read_cstring(data, pos)
        (size,) = struct.unpack_from("<i", data, pos)
        pos += 4
        payload = data[pos:pos + size]
        pos += size
        if name == "channels":
            channels = _parse_channels(payload)
        elif name == "compression":
            compression = payload[0]
        elif name == "dataWindow":
            data_window = struct.unpack("<4i", payload)
        elif name == "lineOrder":
            line_order = payload[0]

    if channels is None or compression is None or data_window is None:
        raise FileFormatError("EXR header is missing required attributes")
    if compression not in (_COMP_NONE, _COMP_ZIPS, _COMP_ZIP):
        raise FileFormatError(
            f"unsupported EXR compression {compression} (only NONE/ZIPS/ZIP)"
        )
    if line_order not in (0, 1):
        raise FileFormatError("unsupported EXR line order")

    xmin, ymin, xmax, ymax = data_window
    w = xmax - xmin + 1
    h = ymax - ymin + 1
    if w < 1 or h < 1:
        raise FileFormatError("empty EXR data window")

    lines_per_block = _ZIP_BLOCK if compression == _COMP_ZIP else 1
    n_blocks = (h + lines_per_block - 1) // lines_per_block
    table = struct.unpack_from(f"<{n_blocks}Q", data, pos)

    sorted_names = sorted(channels)
    row_bytes = 4 * w
    out = np.empty((h, w, len(sorted_names)), dtype=np.float32)
    for off in table:
        y, size = struct.unpack_from("<ii", data, off)
        payload = data[off + 8:off + 8 + size]
        y_rel = y - ymin
        n_lines = min(lines_per_block, h - y_rel)
        raw_size = n_lines * len(sorted_names) * row_bytes
        if compression != _COMP_NONE and size < raw_size:
            payload = _unpredict_interleave(zlib.decompress(payload))
        if len(payload) != raw_size:
            raise FileFormatError("EXR scanline block has unexpected size")
        block = np.frombuffer(payload, dtype="<f4").reshape(
            n_lines, len(sorted_names), w
        )
        out[y_rel:y_rel + n_lines] = np.moveaxis(block, 1, 2)

    if line_order == 1:
        out = out[::-1]

    # Reorder channels from alphabetical storage to R,G,B,A / Y semantics.
    expect = _NAMES_BY_COUNT.get(len(sorted_names))
    if expect is None or sorted(expect) != sorted_names:
        raise FileFormatError(
            f"unsupported EXR channel set {sorted_names} "
            f"(expected one of {list(_NAMES_BY_COUNT.values())})"
        )
    index = [sorted_names.index(n) for n in expect]
    return np.ascontiguousarray(out[:, :, index])
