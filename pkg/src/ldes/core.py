"""Core domain types and coordinate conventions.

Conventions used throughout the package:

* Texture space: ``s`` runs left to right, ``t`` runs bottom to top, both
  normalized so the frame occupies [0, 1]^2. Out-of-frame values are legal
  and simply address positions beyond the footage.
* Pixel centers: pixel column ``i`` of a width-``W`` buffer is centered at
  ``s = (i + 0.5) / W`` (same for rows/``t``).
* Image space: 2-D vectors measured from the frame center, horizontal
  half-width normalized to 1, vertical half-height equal to ``1 / aspect``.
* Buffers store 32-bit floats in scanline order bottom-to-top, i.e. row 0 of
  the array is the bottom of the picture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class LdesError(Exception):
    """Base class for all toolkit errors."""


class ModelDomainError(LdesError, ValueError):
    """A projection-model evaluation left its valid domain."""


class ConvergenceError(LdesError, RuntimeError):
    """An iterative inversion or fit failed to converge."""


class FilenameError(LdesError, ValueError):
    """A filename does not follow the map naming convention."""


class FileFormatError(LdesError, ValueError):
    """An image file has an unsupported layout (bit depth, channels, ...)."""


@dataclass(frozen=True)
class ImageBuffer:
    """W x H x C raster of 32-bit floats; the carrier for maps and footage.

    ``data`` has shape (height, width, channels), float32, with row 0 at the
    bottom of the picture. The array is made read-only on construction and
    every sample must be finite.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ValueError(f"image data must be HxWxC, got shape {self.data.shape}")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise ValueError(f"image dimensions must be >= 1, got {w}x{h}")
        if c not in (1, 2, 3, 4):
            raise ValueError(f"channel count must be 1..4, got {c}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image data contains non-finite samples")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def channel(self, index: int) -> np.ndarray:
        return self.data[:, :, index]


@dataclass(frozen=True)
class TexCoord:
    """Normalized texture coordinate; (0,0) bottom-left, (1,1) top-right."""

    s: float
    t: float

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.t], dtype=np.float64)


# Tolerance absorbing float noise when deriving the noted whole-degree FOV.
_NOTED_EPS = 1e-9


@dataclass(frozen=True)
class FovAngle:
    """Horizontal field of view with its whole-degree filename label.

    ``noted_degrees`` is the integer written into filenames; it is the FOV in
    degrees rounded up.
    """

    omega: float
    noted_degrees: int

    def __post_init__(self):
        if not (0.0 < self.omega <= 2.0 * math.pi + 1e-12):
            raise ValueError(f"fov angle must be in (0, 2*pi], got {self.omega}")
        expect = math.ceil(math.degrees(self.omega) - _NOTED_EPS)
        if self.noted_degrees != expect:
            raise ValueError(
                f"noted degrees {self.noted_degrees} does not match "
                f"ceil({math.degrees(self.omega):.6f} deg) = {expect}"
            )

    @classmethod
    def from_radians(cls, omega: float) -> "FovAngle":
        return cls(omega, math.ceil(math.degrees(omega) - _NOTED_EPS))

    @classmethod
    def from_degrees(cls, degrees: float) -> "FovAngle":
        return cls(math.radians(degrees), math.ceil(degrees - _NOTED_EPS))

    @property
    def noted_radians(self) -> float:
        """The noted whole-degree value converted back to radians."""
        return math.radians(self.noted_degrees)


@dataclass(frozen=True)
class ViewMap:
    """Output-shaped map whose RG values address equidistant space.

    RG encodes, per pixel, the direction that pixel should display:
    ``fov.omega * |RG - 1/2|`` is the polar angle of the line of sight. An
    optional third channel carries linear-light vignette. View maps never
    carry an alpha channel.
    """

    image: ImageBuffer
    fov: FovAngle
    normalized: bool = False

    def __post_init__(self):
        if self.image.channels not in (2, 3):
            raise ValueError(
                f"view map must have 2 or 3 channels, got {self.image.channels}"
            )

    @property
    def has_vignette(self) -> bool:
        return self.image.channels == 3

    @property
    def coords(self) -> np.ndarray:
        """The RG channels, shape (H, W, 2)."""
        return self.image.data[:, :, :2]

    @property
    def vignette(self) -> np.ndarray | None:
        return self.image.data[:, :, 2] if self.has_vignette else None


@dataclass(frozen=True)
class FootageMap:
    """Square map over the equidistant domain holding footage ST coordinates.

    Channels are R = s, G = t, B = 0, A = coverage (1 where the direction is
    imaged by the footage, 0 elsewhere). The inscribed circle of radius 1/2
    reaches the polar angle ``fov.omega / 2``; the square's corners extend to
    ``sqrt(2)`` times that and are valid domain.
    """

    image: ImageBuffer
    fov: FovAngle

    def __post_init__(self):
        if self.image.channels != 4:
            raise ValueError(
                f"footage map must have 4 channels, got {self.image.channels}"
            )
        if self.image.width != self.image.height:
            raise ValueError(
                f"footage map must be square, got "
                f"{self.image.width}x{self.image.height}"
            )
        alpha = self.image.data[:, :, 3]
        if not np.all((alpha == 0.0) | (alpha == 1.0)):
            raise ValueError("footage map alpha must be a 0/1 coverage mask")

    @property
    def coords(self) -> np.ndarray:
        return self.image.data[:, :, :2]

    @property
    def coverage(self) -> np.ndarray:
        return self.image.data[:, :, 3]


@dataclass(frozen=True)
class BrownConradyParams:
    """Division-model geometric aberrations.

    ``radial_x`` / ``radial_y`` are the per-axis radial coefficient series
    (three entries by default, arbitrary length supported). Equal series
    reduce to the plain symmetric division model. All-zero parameters are the
    identity.
    """

    c1: float = 0.0
    c2: float = 0.0
    radial_x: tuple[float, ...] = ()
    radial_y: tuple[float, ...] = ()
    p1: float = 0.0
    p2: float = 0.0
    q1: float = 0.0
    q2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "radial_x", tuple(float(v) for v in self.radial_x))
        object.__setattr__(self, "radial_y", tuple(float(v) for v in self.radial_y))

    @property
    def is_identity(self) -> bool:
        return (
            self.c1 == 0.0
            and self.c2 == 0.0
            and self.p1 == 0.0
            and self.p2 == 0.0
            and self.q1 == 0.0
            and self.q2 == 0.0
            and all(v == 0.0 for v in self.radial_x)
            and all(v == 0.0 for v in self.radial_y)
        )

    @property
    def is_aximorphic(self) -> bool:
        """True when the two radial series differ (per-axis radial mixing)."""
        nx, ny = len(self.radial_x), len(self.radial_y)
        n = max(nx, ny)
        px = self.radial_x + (0.0,) * (n - nx)
        py = self.radial_y + (0.0,) * (n - ny)
        return px != py


IDENTITY_BC = BrownConradyParams()


def _check_axis_domain(k: float, omega: float) -> None:
    if k > 0.0 and omega * k / 2.0 >= math.pi / 2.0:
        raise ModelDomainError(
            f"fov {math.degrees(omega):.1f} deg exceeds the k={k} horizon "
            f"({180.0 / k:.1f} deg)"
        )
    if k < 0.0 and omega * (-k) / 2.0 > math.pi / 2.0 + 1e-12:
        raise ModelDomainError(
            f"fov {math.degrees(omega):.1f} deg exceeds the k={k} rim "
            f"({180.0 / -k:.1f} deg)"
        )


@dataclass(frozen=True)
class ProjectionParams:
    """Full synthetic lens model.

    ``omega`` is the exact horizontal FOV in radians; ``k_x`` and the two
    vertical factors select the per-axis projection profile (1 rectilinear,
    0 equidistant, -1 orthographic); ``squeeze`` is the anamorphic squeeze
    (1 = spherical); ``bc`` holds optional geometric aberrations; ``aspect``
    is width/height of the target frame.
    """

    omega: float
    k_x: float = 0.0
    k_y_top: float = 0.0
    k_y_bottom: float = 0.0
    squeeze: float = 1.0
    bc: BrownConradyParams = field(default_factory=BrownConradyParams)
    aspect: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.omega <= 2.0 * math.pi + 1e-12):
            raise ValueError(f"omega must be in (0, 2*pi], got {self.omega}")
        for name in ("k_x", "k_y_top", "k_y_bottom"):
            k = getattr(self, name)
            if not -1.0 <= k <= 1.0:
                raise ValueError(f"{name} must lie in [-1, 1], got {k}")
        if self.squeeze <= 0.0:
            raise ValueError(f"squeeze must be positive, got {self.squeeze}")
        if self.aspect <= 0.0:
            raise ValueError(f"aspect must be positive, got {self.aspect}")
        for k in (self.k_x, self.k_y_top, self.k_y_bottom):
            _check_axis_domain(k, self.omega)

    @property
    def fov(self) -> FovAngle:
        return FovAngle.from_radians(self.omega)

    @property
    def is_symmetric_k(self) -> bool:
        return self.k_x == self.k_y_top == self.k_y_bottom


def centered_coords(
    col: int, row: int, width: int, height: int, aspect: float | None = None
) -> np.ndarray:
    """Image-space vector of a pixel, measured from the frame center.

    Pixel centers follow the (i + 1/2)/W convention; the horizontal
    half-width maps to 1 and the vertical extent to 1/aspect. ``aspect``
    defaults to width/height.
    """
    if not (0 <= col < width and 0 <= row < height):
        raise ValueError(f"pixel ({col}, {row}) outside {width}x{height} buffer")
    if aspect is None:
        aspect = width / height
    vx = 2.0 * (col + 0.5) / width - 1.0
    vy = (2.0 * (row + 0.5) / height - 1.0) / aspect
    return np.array([vx, vy], dtype=np.float64)


def centered_grid(width: int, height: int, aspect: float | None = None) -> np.ndarray:
    """Image-space vectors of every pixel center, shape (height, width, 2).

    Row 0 is the bottom scanline, matching the buffer layout.
    """
    if aspect is None:
        aspect = width / height
    s = (np.arange(width, dtype=np.float64) + 0.5) / width
    t = (np.arange(height, dtype=np.float64) + 0.5) / height
    vx = 2.0 * s - 1.0
    vy = (2.0 * t - 1.0) / aspect
    out = np.empty((height, width, 2), dtype=np.float64)
    out[:, :, 0] = vx[None, :]
    out[:, :, 1] = vy[:, None]
    return out


def texcoord_grid(width: int, height: int) -> np.ndarray:
    """Texture-space pixel-center positions, shape (height, width, 2)."""
    s = (np.arange(width, dtype=np.float64) + 0.5) / width
    t = (np.arange(height, dtype=np.float64) + 0.5) / height
    out = np.empty((height, width, 2), dtype=np.float64)
    out[:, :, 0] = s[None, :]
    out[:, :, 1] = t[:, None]
    return out
