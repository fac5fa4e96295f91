"""Interpolated sampling, the bake pipeline, footage application and vignette
arithmetic.

Maps are never used to sample footage directly; the footage map is sampled
through the view map (:func:`bake`) and the resulting STMap drives
:func:`apply_stmap`. This keeps the quality-critical resampling inside one
well-filtered step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import FootageMap, ImageBuffer, TexCoord, ViewMap
from .transform import tile_scale


@dataclass(frozen=True)
class SampleFilter:
    """Interpolation kind plus the rule for out-of-frame coordinates."""

    kind: Literal["bilinear", "catmull_rom"] = "bilinear"
    edge: Literal["clamp", "mark_outside"] = "clamp"

    def __post_init__(self):
        if self.kind not in ("bilinear", "catmull_rom"):
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if self.edge not in ("clamp", "mark_outside"):
            raise ValueError(f"unknown edge rule {self.edge!r}")


BILINEAR = SampleFilter("bilinear")
CATMULL_ROM = SampleFilter("catmull_rom")


def _gather(data: np.ndarray, ix: np.ndarray, iy: np.ndarray) -> np.ndarray:
    h, w = data.shape[:2]
    ix = np.clip(ix, 0, w - 1)
    iy = np.clip(iy, 0, h - 1)
    return data[iy, ix]


def _bilinear(data: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    fx = (x - x0)[..., None]
    fy = (y - y0)[..., None]
    v00 = _gather(data, x0, y0)
    v10 = _gather(data, x0 + 1, y0)
    v01 = _gather(data, x0, y0 + 1)
    v11 = _gather(data, x0 + 1, y0 + 1)
    top = v00 + fx * (v10 - v00)
    bot = v01 + fx * (v11 - v01)
    return top + fy * (bot - top)


def _catmull_rom_weights(f: np.ndarray) -> tuple[np.ndarray, ...]:
    # Keys cubic, a = -1/2; exact at sample centers, reproduces linear ramps.
    f2 = f * f
    f3 = f2 * f
    w0 = -0.5 * f3 + f2 - 0.5 * f
    w1 = 1.5 * f3 - 2.5 * f2 + 1.0
    w2 = -1.5 * f3 + 2.0 * f2 + 0.5 * f
    w3 = 0.5 * f3 - 0.5 * f2
    return w0, w1, w2, w3


def _catmull_rom(data: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    wx = _catmull_rom_weights(x - x0)
    wy = _catmull_rom_weights(y - y0)
    out = np.zeros(x.shape + (data.shape[2],), dtype=np.float64)
    for j in range(4):
        row = np.zeros_like(out)
        for i in range(4):
            row += wx[i][..., None] * _gather(data, x0 + i - 1, y0 + j - 1)
        out += wy[j][..., None] * row
    return out


def sample_grid(
    buffer: ImageBuffer, st: np.ndarray, filt: SampleFilter = BILINEAR
) -> tuple[np.ndarray, np.ndarray]:
    """Filtered lookup of texture coordinates, shape (..., 2) -> (..., C).

    Returns (values, outside); ``outside`` is all-False for edge rule
    "clamp". Coordinates use the pixel-center convention, and lookups beyond
    the border replicate border texels.
    """
    st = np.asarray(st, dtype=np.float64)
    w, h = buffer.width, buffer.height
    minimum = 2 if filt.kind == "bilinear" else 4
    if w < minimum or h < minimum:
        raise ValueError(
            f"{filt.kind} filtering needs a buffer of at least "
            f"{minimum}x{minimum}, got {w}x{h}"
        )
    x = st[..., 0] * w - 0.5
    y = st[..., 1] * h - 0.5
    data = buffer.data.astype(np.float64, copy=False)
    if filt.kind == "bilinear":
        values = _bilinear(data, x, y)
    else:
        values = _catmull_rom(data, x, y)
    if filt.edge == "mark_outside":
        outside = (
            (st[..., 0] < 0.0) | (st[..., 0] > 1.0)
            | (st[..., 1] < 0.0) | (st[..., 1] > 1.0)
        )
    else:
        outside = np.zeros(x.shape, dtype=bool)
    return values, outside


def sample(buffer: ImageBuffer, at: TexCoord, filt: SampleFilter = BILINEAR):
    """Filtered lookup of one texture coordinate; returns the channel vector,
    or (channel vector, outside flag) for the mark_outside edge rule."""
    values, outside = sample_grid(buffer, at.as_array(), filt)
    if filt.edge == "mark_outside":
        return values, bool(outside)
    return values


def _box_down(values: np.ndarray, factor: int) -> np.ndarray:
    if factor == 1:
        return values
    h, w, c = values.shape
    return values.reshape(h // factor, factor, w // factor, factor, c).mean(axis=(1, 3))


def bake(
    vmap: ViewMap,
    fmap: FootageMap,
    filt: SampleFilter = BILINEAR,
    supersample: int = 1,
) -> ImageBuffer:
    """Sample the footage map through the view map into the final STMap.

    Output is RGBA at the view map's resolution: RG are footage coordinates,
    B carries the view map's vignette (0 when absent), A is footage coverage.
    FOV mismatch between the maps is compensated by tile scaling; a
    ``supersample`` factor evaluates an n-times denser grid and box-averages
    it down, acting as a multi-sampling filter.
    """
    if supersample < 1:
        raise ValueError(f"supersample must be >= 1, got {supersample}")
    w, h = vmap.image.width, vmap.image.height
    ss = int(supersample)
    sw, sh = w * ss, h * ss

    s = (np.arange(sw, dtype=np.float64) + 0.5) / sw
    t = (np.arange(sh, dtype=np.float64) + 0.5) / sh
    pos = np.empty((sh, sw, 2), dtype=np.float64)
    pos[:, :, 0] = s[None, :]
    pos[:, :, 1] = t[:, None]

    vvals, _ = sample_grid(vmap.image, pos, filt)
    u = vvals[:, :, :2]
    scale = tile_scale(vmap.fov.noted_radians, fmap.fov.noted_radians)
    u = (u - 0.5) * scale + 0.5

    fvals, _ = sample_grid(fmap.image, u, filt)
    out = np.empty((sh, sw, 4), dtype=np.float64)
    out[:, :, 0] = fvals[:, :, 0]
    out[:, :, 1] = fvals[:, :, 1]
    out[:, :, 2] = vvals[:, :, 2] if vmap.has_vignette else 0.0
    out[:, :, 3] = fvals[:, :, 3]
    return ImageBuffer(_box_down(out, ss).astype(np.float32))


def apply_stmap(
    footage: ImageBuffer, stmap: ImageBuffer, filt: SampleFilter = BILINEAR
) -> ImageBuffer:
    """Warp footage through a baked STMap.

    Each output pixel samples the footage at the STMap's RG coordinates. The
    output gains an alpha channel (appended when the footage has none)
    holding the STMap's A multiplied with the footage's own alpha.
    """
    if stmap.channels != 4:
        raise ValueError(f"stmap must be RGBA, got {stmap.channels} channels")
    coords = stmap.data[:, :, :2].astype(np.float64)
    if not np.all(np.isfinite(coords)):
        raise ValueError("stmap coordinates must be finite")
    values, _ = sample_grid(footage, coords, filt)
    alpha = stmap.data[:, :, 3].astype(np.float64)
    if footage.channels in (2, 4):
        values[:, :, -1] *= alpha
        return ImageBuffer(values.astype(np.float32))
    out = np.concatenate([values, alpha[:, :, None]], axis=2)
    return ImageBuffer(out.astype(np.float32))


def _vignette_for(footage: ImageBuffer, vmap: ViewMap) -> np.ndarray:
    if not vmap.has_vignette:
        raise ValueError("view map carries no vignette channel")
    if (footage.height, footage.width) == (vmap.image.height, vmap.image.width):
        return vmap.vignette.astype(np.float64)
    s = (np.arange(footage.width, dtype=np.float64) + 0.5) / footage.width
    t = (np.arange(footage.height, dtype=np.float64) + 0.5) / footage.height
    pos = np.empty((footage.height, footage.width, 2), dtype=np.float64)
    pos[:, :, 0] = s[None, :]
    pos[:, :, 1] = t[:, None]
    values, _ = sample_grid(vmap.image, pos, BILINEAR)
    return values[:, :, 2]


def _color_slice(buffer: ImageBuffer) -> slice:
    # Alpha (last channel of 2- or 4-channel footage) is left untouched.
    return slice(0, buffer.channels - 1 if buffer.channels in (2, 4) else buffer.channels)


def vignette_divide(footage: ImageBuffer, vmap: ViewMap) -> ImageBuffer:
    """Correct linear-light footage by dividing out the map's vignette."""
    vig = _vignette_for(footage, vmap)
    if np.any(vig <= 0.0):
        raise ValueError("vignette must be positive everywhere for division")
    out = footage.data.astype(np.float64).copy()
    cs = _color_slice(footage)
    out[:, :, cs] /= vig[:, :, None]
    return ImageBuffer(out.astype(np.float32))


def vignette_multiply(footage: ImageBuffer, vmap: ViewMap) -> ImageBuffer:
    """Add the map's vignette to linear-light footage."""
    vig = _vignette_for(footage, vmap)
    out = footage.data.astype(np.float64).copy()
    cs = _color_slice(footage)
    out[:, :, cs] *= vig[:, :, None]
    return ImageBuffer(out.astype(np.float32))
