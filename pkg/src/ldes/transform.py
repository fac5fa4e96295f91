"""Map algebra: FOV normalization, tile scaling, blending, spherical rotation
and ray-map export. All operations act on encoded values per pixel; none of
them resample the image grid."""

from __future__ import annotations

import math
import warnings

import numpy as np

from .core import FovAngle, ImageBuffer, ViewMap


def tile_scale(omega_view: float, omega_footage: float) -> float:
    """Scale compensating an FOV mismatch when sampling a footage map over
    view-map coordinates; applied as ``u' = (u - 1/2) * scale + 1/2``."""
    if omega_view <= 0.0 or omega_footage <= 0.0:
        raise ValueError("FOV angles must be positive")
    return omega_view / omega_footage


def normalize_fov(vmap: ViewMap, omega_common: float) -> ViewMap:
    """Rescale encoded coordinates to a common FOV value.

    ``RG' = (omega_map / omega_common) * (RG - 1/2) + 1/2``; the result is
    labeled with the (whole-degree) common FOV and flagged as normalized.
    A warning is emitted when encoded angles exceed the new FOV's half-frame
    (values then leave [0, 1], which is legal but worth knowing about).
    """
    common = FovAngle.from_radians(omega_common)
    factor = vmap.fov.noted_radians / common.noted_radians
    data = vmap.image.data.astype(np.float64).copy()
    data[:, :, :2] = (data[:, :, :2] - 0.5) * factor + 0.5
    radius = np.hypot(data[:, :, 0] - 0.5, data[:, :, 1] - 0.5)
    if np.any(radius > 1.0 + 1e-9):  # largest encoded angle beyond omega_common
        warnings.warn(
            "encoded angles exceed the common FOV; coordinates leave [0, 1]",
            stacklevel=2,
        )
    return ViewMap(ImageBuffer(data.astype(np.float32)), common, normalized=True)


def blend_view_maps(a: ViewMap, b: ViewMap, opacity: float) -> ViewMap:
    """Linear per-channel interpolation of two view maps sharing geometry.

    Inputs must agree in dimensions, channel count and FOV label (normalize
    first when they do not).
    """
    if not 0.0 <= opacity <= 1.0:
        raise ValueError(f"opacity must lie in [0, 1], got {opacity}")
    if (a.image.width, a.image.height) != (b.image.width, b.image.height):
        raise ValueError(
            f"view map dimensions differ: {a.image.width}x{a.image.height} "
            f"vs {b.image.width}x{b.image.height}"
        )
    if a.image.channels != b.image.channels:
        raise ValueError(
            f"view map channel counts differ: {a.image.channels} vs {b.image.channels}"
        )
    if a.fov.noted_degrees != b.fov.noted_degrees:
        raise ValueError(
            f"view map FOV labels differ: {a.fov.noted_degrees} vs "
            f"{b.fov.noted_degrees}; normalize to a common FOV first"
        )
    da = a.image.data.astype(np.float64)
    db = b.image.data.astype(np.float64)
    out = da + opacity * (db - da)
    return ViewMap(
        ImageBuffer(out.astype(np.float32)),
        a.fov,
        normalized=a.normalized and b.normalized,
    )


def _values_to_rays(coords: np.ndarray, omega: float):
    """Encoded RG values (..., 2) -> unit incidence vectors (..., 3)."""
    d = coords.astype(np.float64) - 0.5
    radius = np.hypot(d[..., 0], d[..., 1])
    theta = omega * radius
    with np.errstate(invalid="ignore", divide="ignore"):
        inv = np.where(radius > 0.0, 1.0 / np.where(radius > 0.0, radius, 1.0), 0.0)
    st = np.sin(theta)
    out = np.empty(coords.shape[:-1] + (3,), dtype=np.float64)
    out[..., 0] = st * d[..., 0] * inv
    out[..., 1] = st * d[..., 1] * inv
    out[..., 2] = np.cos(theta)
    return out


def _rays_to_values(rays: np.ndarray, omega: float) -> np.ndarray:
    """Unit incidence vectors (..., 3) -> encoded RG values (..., 2)."""
    x, y, z = rays[..., 0], rays[..., 1], rays[..., 2]
    planar = np.hypot(x, y)
    theta = np.arctan2(planar, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        inv = np.where(planar > 0.0, 1.0 / np.where(planar > 0.0, planar, 1.0), 0.0)
    radius = theta / omega
    out = np.empty(rays.shape[:-1] + (2,), dtype=np.float64)
    out[..., 0] = 0.5 + radius * x * inv
    out[..., 1] = 0.5 + radius * y * inv
    return out


def view_map_to_rays(vmap: ViewMap) -> ImageBuffer:
    """Convert encoded coordinates to unit incidence vectors (3 channels).

    The optical axis encodes as (0, 0, 1); suitable for driving ray-traced
    cameras directly.
    """
    rays = _values_to_rays(vmap.coords, vmap.fov.noted_radians)
    return ImageBuffer(rays.astype(np.float32))


def _rotation_matrix(pan: float, tilt: float, roll: float) -> np.ndarray:
    """Combined camera rotation R = R_roll @ R_tilt @ R_pan (pan applied
    first). Axes: x right, y up, z along the optical axis (left-handed).
    Positive pan turns the encoded view toward +x, positive tilt toward +y,
    positive roll spins it counterclockwise."""
    cp, sp = math.cos(pan), math.sin(pan)
    ct, st = math.cos(tilt), math.sin(tilt)
    cr, sr = math.cos(roll), math.sin(roll)
    r_pan = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    r_tilt = np.array([[1.0, 0.0, 0.0], [0.0, ct, st], [0.0, -st, ct]])
    r_roll = np.array([[cr, -sr, 0.0], [sr, cr, 0.0], [0.0, 0.0, 1.0]])
    return r_roll @ r_tilt @ r_pan


def rotate_view_map(
    vmap: ViewMap, pan: float = 0.0, tilt: float = 0.0, roll: float = 0.0
) -> ViewMap:
    """Rotate the encoded camera: values -> incidence vectors -> rotated ->
    values. Angles are radians; pan is applied first, then tilt, then roll.
    Results may leave [0, 1] (legal). The vignette channel is untouched."""
    omega = vmap.fov.noted_radians
    rays = _values_to_rays(vmap.coords, omega)
    rot = _rotation_matrix(pan, tilt, roll)
    rotated = rays @ rot.T
    coords = _rays_to_values(rotated, omega)
    data = vmap.image.data.astype(np.float64).copy()
    data[:, :, :2] = coords
    return ViewMap(ImageBuffer(data.astype(np.float32)), vmap.fov, vmap.normalized)
