"""Bit-exact map and footage I/O plus the filename convention codec.

Files are 32-bit float rasters: TIFF (uncompressed, contiguous) or OpenEXR
(FLOAT scanline, ZIP). No color management is applied in either direction;
samples are raw. On-disk rows are top-down and are flipped to the in-memory
bottom-up order on read (and back on write).

Map filenames follow ``<Type>_<Description>_[n]FOV<degrees>.<ext>`` with
Type one of ViewMap/FootageMap, e.g. ``ViewMap_Cinerama1950_FOV146.tif``.
The ``n`` prefix marks view maps normalized to a common FOV. The FOV token
is mandatory; maps cannot be read or written without it.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

import numpy as np
import tifffile

from . import _exr
from .core import (
    FileFormatError,
    FilenameError,
    FootageMap,
    FovAngle,
    ImageBuffer,
    ViewMap,
)

MAP_EXTENSIONS = ("tif", "exr")

_NAME_RE = re.compile(
    r"^(?P<type>ViewMap|FootageMap)_(?P<desc>.+)_(?P<norm>n?)FOV(?P<fov>[0-9]+)"
    r"\.(?P<ext>[A-Za-z0-9]+)$"
)


@dataclass(frozen=True)
class LdesFilename:
    """Parsed naming-convention components of a map file."""

    map_type: str  # "ViewMap" or "FootageMap"
    description: str
    fov_degrees: int
    normalized: bool = False
    extension: str = "exr"

    def __post_init__(self):
        if self.map_type not in ("ViewMap", "FootageMap"):
            raise FilenameError(f"bad map type {self.map_type!r}")
        if (
            not self.description
            or self.description.startswith("_")
            or self.description.endswith("_")
        ):
            raise FilenameError(
                f"bad description {self.description!r} "
                "(must be non-empty without underscores at the boundaries)"
            )
        if self.fov_degrees <= 0:
            raise FilenameError(f"bad fov {self.fov_degrees} (must be positive)")
        if self.normalized and self.map_type != "ViewMap":
            raise FilenameError("the nFOV prefix is only legal for view maps")
        if self.extension not in MAP_EXTENSIONS:
            raise FilenameError(
                f"bad extension {self.extension!r} (expected one of {MAP_EXTENSIONS})"
            )


def parse_filename(name: str) -> LdesFilename:
    """Parse a map filename into its naming-convention components.

    The split happens on the final ``_FOV``/``_nFOV`` token, so descriptions
    may contain underscores.
    """
    base = os.path.basename(str(name))
    match = _NAME_RE.match(base)
    if not match:
        if "FOV" not in base:
            raise FilenameError(f"{base!r}: missing the mandatory FOV token")
        raise FilenameError(f"{base!r}: does not match <Type>_<Description>_[n]FOV<deg>.<ext>")
    fov_str = match.group("fov")
    if fov_str != str(int(fov_str)):
        raise FilenameError(f"{base!r}: bad fov token {fov_str!r} (leading zeros)")
    return LdesFilename(
        map_type=match.group("type"),
        description=match.group("desc"),
        fov_degrees=int(fov_str),
        normalized=match.group("norm") == "n",
        extension=match.group("ext"),
    )


def format_filename(parts: LdesFilename) -> str:
    """Inverse of :func:`parse_filename`."""
    prefix = "n" if parts.normalized else ""
    return (
        f"{parts.map_type}_{parts.description}_{prefix}FOV{parts.fov_degrees}"
        f".{parts.extension}"
    )


def map_filename(map_obj: ViewMap | FootageMap, description: str, extension: str = "exr") -> str:
    """Conventional filename for a map object."""
    if isinstance(map_obj, ViewMap):
        return format_filename(
            LdesFilename(
                "ViewMap",
                description,
                map_obj.fov.noted_degrees,
                map_obj.normalized,
                extension,
            )
        )
    return format_filename(
        LdesFilename("FootageMap", description, map_obj.fov.noted_degrees, False, extension)
    )


def _check_depth(arr: np.ndarray, path) -> None:
    if arr.dtype != np.float32:
        raise FileFormatError(
            f"{path}: unsupported bit depth {arr.dtype} (expected 32-bit float)"
        )


def _read_pixels(path) -> np.ndarray:
    ext = os.path.splitext(str(path))[1].lower().lstrip(".")
    if ext in ("tif", "tiff"):
        arr = tifffile.imread(path)
        _check_depth(arr, path)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] > 4:
            raise FileFormatError(f"{path}: unsupported TIFF layout {arr.shape}")
    elif ext == "exr":
        arr = _exr.read(path)
    else:
        raise FileFormatError(f"{path}: unsupported extension {ext!r}")
    return arr[::-1]  # disk rows are top-down; memory is bottom-up


def _write_pixels(path, data: np.ndarray) -> None:
    ext = os.path.splitext(str(path))[1].lower().lstrip(".")
    disk = np.ascontiguousarray(data[::-1], dtype=np.float32)
    if ext in ("tif", "tiff"):
        photometric = "rgb" if disk.shape[2] >= 3 else "minisblack"
        if disk.shape[2] == 1:
            tifffile.imwrite(path, disk[:, :, 0], photometric=photometric,
                             compression=None)
        else:
            tifffile.imwrite(path, disk, photometric=photometric,
                             planarconfig="contig", compression=None)
    elif ext == "exr":
        _exr.write(path, disk)
    else:
        raise FileFormatError(f"{path}: unsupported extension {ext!r}")


def read_image(path) -> ImageBuffer:
    """Read footage or any raw raster (no naming rules applied)."""
    return ImageBuffer(_read_pixels(path))


def write_image(path, buffer: ImageBuffer) -> None:
    """Write footage or any raw raster (no naming rules applied)."""
    _write_pixels(path, buffer.data)


def read_map(path) -> ViewMap | FootageMap:
    """Read a map file; type, FOV and the normalized flag come from the name."""
    parts = parse_filename(path)
    pixels = _read_pixels(path)
    channels = pixels.shape[2]
    fov = FovAngle.from_degrees(parts.fov_degrees)
    if parts.map_type == "ViewMap":
        if channels not in (2, 3):
            raise FileFormatError(
                f"{path}: view maps need 2 or 3 channels, found {channels}"
            )
        return ViewMap(ImageBuffer(pixels), fov, normalized=parts.normalized)
    if channels != 4:
        raise FileFormatError(
            f"{path}: footage maps need 4 channels, found {channels}"
        )
    return FootageMap(ImageBuffer(pixels), fov)


def write_map(map_obj: ViewMap | FootageMap, path) -> None:
    """Write a map; the target filename must conform to the convention and
    agree with the map's type, FOV label and normalized flag."""
    parts = parse_filename(path)
    expected = "ViewMap" if isinstance(map_obj, ViewMap) else "FootageMap"
    if parts.map_type != expected:
        raise FilenameError(
            f"{path}: filename declares {parts.map_type} but the map is {expected}"
        )
    if parts.fov_degrees != map_obj.fov.noted_degrees:
        raise FilenameError(
            f"{path}: filename FOV {parts.fov_degrees} does not match the map's "
            f"{map_obj.fov.noted_degrees}"
        )
    normalized = isinstance(map_obj, ViewMap) and map_obj.normalized
    if parts.normalized != normalized:
        raise FilenameError(
            f"{path}: normalized flag mismatch (map {normalized}, name {parts.normalized})"
        )
    _write_pixels(path, map_obj.image.data)
