"""Synthesis of view maps and footage maps from a lens model, and derivation
of a footage map from an existing (possibly measured) view map."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from ._parallel import run_bands
from .core import (
    FootageMap,
    FovAngle,
    ImageBuffer,
    ProjectionParams,
    ViewMap,
    centered_grid,
    texcoord_grid,
)
from .projection import _forward_arrays, _invert_arrays, _vignette_arrays


def default_footage_size(width: int, height: int) -> int:
    """Next power of two at or above the larger footage dimension."""
    return 1 << max(0, (max(width, height) - 1).bit_length())


def generate_view_map(
    params: ProjectionParams,
    width: int,
    height: int,
    with_vignette: bool = False,
) -> ViewMap:
    """Render the view map of a synthetic lens.

    Each pixel's image-space vector runs through the forward model; the
    resulting direction is encoded as ``RG = 1/2 + (theta/omega) * (cos phi,
    sin phi)`` against the noted whole-degree FOV (non-integer lens FOVs are
    rescaled to the rounded-up label at creation). Off-field pixels encode
    the clamped rim direction instead of NaN. The optional third channel is
    the model's natural vignette.
    """
    if width < 2 or height < 2:
        raise ValueError(f"view map must be at least 2x2, got {width}x{height}")
    if not math.isclose(params.aspect, width / height, rel_tol=1e-6):
        raise ValueError(
            f"params aspect {params.aspect:.6f} does not match {width}x{height} "
            f"({width / height:.6f})"
        )
    fov = FovAngle.from_radians(params.omega)
    omega_enc = fov.noted_radians

    grid = centered_grid(width, height, params.aspect)
    channels = 3 if with_vignette else 2
    out = np.empty((height, width, channels), dtype=np.float64)

    def band(y0: int, y1: int) -> None:
        fwd = _forward_arrays(grid[y0:y1], params)
        radius = fwd["theta"] / omega_enc
        out[y0:y1, :, 0] = 0.5 + radius * np.cos(fwd["phi"])
        out[y0:y1, :, 1] = 0.5 + radius * np.sin(fwd["phi"])
        if with_vignette:
            out[y0:y1, :, 2] = _vignette_arrays(fwd, params)

    run_bands(height, band)
    return ViewMap(ImageBuffer(out.astype(np.float32)), fov)


def generate_footage_map(params: ProjectionParams, size: int) -> FootageMap:
    """Render the footage map of a synthetic lens.

    Each pixel of the square equidistant domain is a direction
    (``theta = omega * |u - 1/2|``); its footage ST position comes from the
    inverse model. Coverage is 1 where the direction is inside the lens field
    and lands within the footage frame; elsewhere coverage is 0 and ST is
    clamped to the nearest valid value.
    """
    if size < 2:
        raise ValueError(f"footage map size must be >= 2, got {size}")
    fov = FovAngle.from_radians(params.omega)
    omega = fov.noted_radians

    grid = texcoord_grid(size, size) - 0.5
    out = np.empty((size, size, 4), dtype=np.float64)

    def band(y0: int, y1: int) -> None:
        d = grid[y0:y1]
        radius = np.hypot(d[:, :, 0], d[:, :, 1])
        theta = omega * radius
        phi = np.arctan2(d[:, :, 1], d[:, :, 0])
        v, ok, _, _ = _invert_arrays(theta, phi, params)
        s = (v[:, :, 0] + 1.0) / 2.0
        t = (v[:, :, 1] * params.aspect + 1.0) / 2.0
        inside = (s >= 0.0) & (s <= 1.0) & (t >= 0.0) & (t <= 1.0)
        covered = ok & inside
        out[y0:y1, :, 0] = np.clip(s, 0.0, 1.0)
        out[y0:y1, :, 1] = np.clip(t, 0.0, 1.0)
        out[y0:y1, :, 2] = 0.0
        out[y0:y1, :, 3] = covered.astype(np.float64)

    run_bands(size, band)
    return FootageMap(ImageBuffer(out.astype(np.float32)), fov)


_FILL_RADII = (1, 2, 3, 4)  # 3x3 .. 9x9 expanding inverse-distance fill


def derive_footage_map(vmap: ViewMap, size: int) -> FootageMap:
    """Numerically invert a view map into a footage map.

    Every view-map pixel is forward-splatted: its RG value addresses a
    position on the equidistant grid, its payload is its own ST position in
    the frame. Splats accumulate bilinearly; holes are filled by
    inverse-distance-squared interpolation from an expanding 3x3..9x9
    neighborhood. Coverage is 1 wherever splat density is positive after the
    fill; remaining cells take the nearest covered value with coverage 0.
    """
    if size < 2:
        raise ValueError(f"footage map size must be >= 2, got {size}")
    w, h = vmap.image.width, vmap.image.height

    # The derived map keeps the view map's FOV label, so RG values address
    # the target grid directly (tile scale 1).
    u = vmap.coords.reshape(-1, 2).astype(np.float64)
    payload = texcoord_grid(w, h).reshape(-1, 2)

    x = u[:, 0] * size - 0.5
    y = u[:, 1] * size - 0.5
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    fx = x - x0
    fy = y - y0

    acc = np.zeros((size, size, 3), dtype=np.float64)  # s, t, weight
    for dx, dy, wgt in (
        (0, 0, (1 - fx) * (1 - fy)),
        (1, 0, fx * (1 - fy)),
        (0, 1, (1 - fx) * fy),
        (1, 1, fx * fy),
    ):
        ix = x0 + dx
        iy = y0 + dy
        keep = (ix >= 0) & (ix < size) & (iy >= 0) & (iy < size) & (wgt > 0.0)
        np.add.at(acc[:, :, 0], (iy[keep], ix[keep]), payload[keep, 0] * wgt[keep])
        np.add.at(acc[:, :, 1], (iy[keep], ix[keep]), payload[keep, 1] * wgt[keep])
        np.add.at(acc[:, :, 2], (iy[keep], ix[keep]), wgt[keep])

    covered = acc[:, :, 2] > 0.0
    if np.count_nonzero(covered) < 0.01 * size * size:
        raise ValueError(
            "view map covers less than 1% of the footage-map domain "
            "(non-injective or degenerate input)"
        )

    value = np.zeros((size, size, 2), dtype=np.float64)
    value[covered] = acc[covered, :2] / acc[covered, 2:]

    filled = covered.copy()
    holes = ~covered
    if np.any(holes):
        num = np.zeros((size, size, 2), dtype=np.float64)
        den = np.zeros((size, size), dtype=np.float64)
        done = covered.copy()
        for radius in _FILL_RADII:
            ring = [
                (dx, dy)
                for dx in range(-radius, radius + 1)
                for dy in range(-radius, radius + 1)
                if max(abs(dx), abs(dy)) == radius
            ]
            for dx, dy in ring:
                src_y = slice(max(0, -dy), size - max(0, dy))
                src_x = slice(max(0, -dx), size - max(0, dx))
                dst_y = slice(max(0, dy), size + min(0, dy))
                dst_x = slice(max(0, dx), size + min(0, dx))
                wgt = 1.0 / (dx * dx + dy * dy)
                mask = covered[src_y, src_x]
                num[dst_y, dst_x][mask] += value[src_y, src_x][mask] * wgt
                den[dst_y, dst_x] += mask * wgt
            ready = holes & ~done & (den > 0.0)
            if np.any(ready):
                value[ready] = num[ready] / den[ready, None]
                filled[ready] = True
                done[ready] = True

    remaining = ~filled
    if np.any(remaining):
        _, (iy, ix) = ndimage.distance_transform_edt(remaining, return_indices=True)
        value[remaining] = value[iy[remaining], ix[remaining]]

    out = np.zeros((size, size, 4), dtype=np.float64)
    out[:, :, :2] = value
    out[:, :, 3] = filled.astype(np.float64)
    return FootageMap(ImageBuffer(out.astype(np.float32)), vmap.fov)
