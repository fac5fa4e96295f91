"""Synthetic lens projection models and their inversion.

The base model is a one-parameter family of azimuthal projections selected by
a factor ``k``:

====  ==========================
k     profile
====  ==========================
 1    rectilinear (gnomonic)
 1/2  stereographic
 0    equidistant
-1/2  equisolid
-1    orthographic
====  ==========================

The radial profile is ``m(theta) = tan(theta*k)/k`` for k > 0, ``theta`` for
k = 0 and ``sin(theta*k)/k`` for k < 0 (continuous across k = 0). Radii are
normalized so the frame's horizontal half-width is exactly the ``omega/2``
ray: ``r = m(theta) / m(omega/2)``.

Extensions: anamorphic squeeze of the radius, per-axis profile mixing
(aximorphic), independent top/bottom vertical factors, and Brown-Conrady
division-model aberrations, composed in the order Brown-Conrady ->
anamorphic -> per-axis angles -> aximorphic mix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BrownConradyParams,
    ConvergenceError,
    ModelDomainError,
    ProjectionParams,
)

_ASIN_SLACK = 1e-12


@dataclass(frozen=True)
class SphericalDirection:
    """Line of sight: polar angle from the optical axis and image-plane azimuth."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")

    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )

    @classmethod
    def from_unit_vector(cls, vec) -> "SphericalDirection":
        x, y, z = (float(c) for c in vec)
        theta = math.atan2(math.hypot(x, y), z)
        phi = math.atan2(y, x) if theta > 0.0 else 0.0
        return cls(theta, phi)


def unit_vectors_from_angles(theta, phi) -> np.ndarray:
    """Stack (theta, phi) arrays into unit incidence vectors, shape (..., 3)."""
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def angles_from_unit_vectors(vec) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`unit_vectors_from_angles`; phi is 0 on the axis."""
    vec = np.asarray(vec, dtype=np.float64)
    x, y, z = vec[..., 0], vec[..., 1], vec[..., 2]
    theta = np.arctan2(np.hypot(x, y), z)
    phi = np.where(theta > 0.0, np.arctan2(y, x), 0.0)
    return theta, phi


def theta_max(k: float, omega: float | None = None) -> float:
    """Largest polar angle the k-profile can represent (pi at most).

    For k > 0 the bound is the tan horizon (exclusive); for k < 0 it is the
    fold point of the sine profile (inclusive).
    """
    if k == 0.0:
        return math.pi
    return min(math.pi, math.pi / (2.0 * abs(k)))


def _profile(theta, k: float):
    """Unnormalized radial profile m_k(theta) for scalar k."""
    if k > 0.0:
        return np.tan(theta * k) / k
    if k < 0.0:
        return np.sin(theta * k) / k
    return np.asarray(theta, dtype=np.float64) + 0.0


def _profile_scale(k: float, omega: float) -> float:
    """Normalization constant m_k(omega/2); positive for any legal (k, omega)."""
    return float(_profile(np.float64(omega) / 2.0, k))


def radius_from_theta(theta, k, omega):
    """Normalized image radius of the polar angle ``theta``.

    Normalized so that ``radius_from_theta(omega/2, k, omega) == 1``
    (half-frame edge). ``theta`` and ``k`` may be arrays (broadcast).

    Raises ModelDomainError when ``theta`` leaves the profile's domain, in
    particular when ``theta * k >= pi/2`` for k > 0 (ray beyond the
    rectilinear horizon).
    """
    th = np.asarray(theta, dtype=np.float64)
    kk = np.asarray(k, dtype=np.float64)
    om = np.asarray(omega, dtype=np.float64)
    th, kk, om = np.broadcast_arrays(th, kk, om)
    if np.any(th < 0.0):
        raise ModelDomainError("theta must be non-negative")

    pos = kk > 0.0
    neg = kk < 0.0
    zer = ~(pos | neg)
    if np.any(th[pos] * kk[pos] >= math.pi / 2.0):
        raise ModelDomainError("theta*k >= pi/2: ray beyond the rectilinear horizon")
    if np.any(th[neg] * -kk[neg] > math.pi / 2.0 + 1e-12):
        raise ModelDomainError("theta beyond the fold point of the k<0 profile")
    if np.any(th > math.pi + 1e-12):
        raise ModelDomainError("theta beyond pi")

    m = np.empty_like(th)
    scale = np.empty_like(th)
    m[pos] = np.tan(th[pos] * kk[pos]) / kk[pos]
    scale[pos] = np.tan(om[pos] / 2.0 * kk[pos]) / kk[pos]
    m[neg] = np.sin(th[neg] * kk[neg]) / kk[neg]
    scale[neg] = np.sin(om[neg] / 2.0 * kk[neg]) / kk[neg]
    m[zer] = th[zer]
    scale[zer] = om[zer] / 2.0
    out = m / scale
    return out if out.ndim else float(out)


def theta_from_radius(r, k, omega):
    """Polar angle of the normalized image radius ``r``; inverse of
    :func:`radius_from_theta`.

    Raises ModelDomainError when the k < 0 profile cannot contain ``r``
    (asin argument beyond 1: radius past the orthographic rim).
    """
    rr = np.asarray(r, dtype=np.float64)
    kk = np.asarray(k, dtype=np.float64)
    om = np.asarray(omega, dtype=np.float64)
    rr, kk, om = np.broadcast_arrays(rr, kk, om)
    if np.any(rr < 0.0):
        raise ModelDomainError("radius must be non-negative")

    pos = kk > 0.0
    neg = kk < 0.0
    zer = ~(pos | neg)
    out = np.empty_like(rr)

    sp = np.tan(om[pos] / 2.0 * kk[pos]) / kk[pos]
    out[pos] = np.arctan(rr[pos] * sp * kk[pos]) / kk[pos]

    sn = np.sin(om[neg] / 2.0 * kk[neg]) / kk[neg]
    arg = rr[neg] * sn * kk[neg]
    if np.any(np.abs(arg) > 1.0 + _ASIN_SLACK):
        raise ModelDomainError("radius beyond the orthographic rim (asin argument > 1)")
    out[neg] = np.arcsin(np.clip(arg, -1.0, 1.0)) / kk[neg]

    out[zer] = rr[zer] * om[zer] / 2.0
    return out if out.ndim else float(out)


def _theta_of_radius_raw(r, k: float, scale: float):
    """theta(r) for scalar k with precomputed scale; asin args are clamped,
    so the caller must keep r within the rim."""
    if k > 0.0:
        return np.arctan(r * (scale * k)) / k
    if k < 0.0:
        return np.arcsin(np.clip(r * (scale * k), -1.0, 1.0)) / k
    return r * scale


def _dtheta_dradius(r, k: float, scale: float):
    """d theta / d r for scalar k (same clamping rules as above)."""
    if k > 0.0:
        return scale / (1.0 + np.square(r * (scale * k)))
    if k < 0.0:
        arg = np.clip(r * (scale * k), -1.0, 1.0)
        return scale / np.sqrt(np.maximum(1.0 - np.square(arg), 1e-300))
    if np.ndim(r):
        return np.full(np.shape(r), scale)
    return scale


def anamorphic_radius(v, squeeze: float):
    """Squeeze-weighted radius and the rescaled image vector.

    ``r = sqrt(vx^2 + vy^2 / squeeze)`` and ``v' = (|v|/r) * v``. The azimuth
    of ``v'`` equals the azimuth of ``v``. The zero vector maps to (0, v).
    """
    if squeeze <= 0.0:
        raise ValueError(f"squeeze must be positive, got {squeeze}")
    v = np.asarray(v, dtype=np.float64)
    vx, vy = v[..., 0], v[..., 1]
    r = np.sqrt(vx * vx + vy * vy / squeeze)
    norm = np.hypot(vx, vy)
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(r > 0.0, norm / np.where(r > 0.0, r, 1.0), 1.0)
    vp = v * factor[..., None]
    return (float(r), vp) if r.ndim == 0 else (r, vp)


def aximorphic_weights(v) -> np.ndarray:
    """Squared-direction mixing weights (cos^2 phi, sin^2 phi), shape (..., 2).

    The zero vector gets (1/2, 1/2)."""
    v = np.asarray(v, dtype=np.float64)
    vx2 = np.square(v[..., 0])
    vy2 = np.square(v[..., 1])
    total = vx2 + vy2
    with np.errstate(invalid="ignore", divide="ignore"):
        wx = np.where(total > 0.0, vx2 / np.where(total > 0.0, total, 1.0), 0.5)
    return np.stack([wx, 1.0 - wx], axis=-1)


def aximorphic_theta(v, theta_x, theta_y):
    """Blend per-axis polar angles by the squared-direction weights of ``v``."""
    wx = aximorphic_weights(v)[..., 0]
    theta_x = np.asarray(theta_x, dtype=np.float64)
    theta_y = np.asarray(theta_y, dtype=np.float64)
    out = theta_y + wx * (theta_x - theta_y)
    return out if out.ndim else float(out)


def select_k_y(v_y, k_top: float, k_bottom: float):
    """Vertical projection factor for the image half containing ``v_y``
    (top when v_y > 0, bottom otherwise)."""
    out = np.where(np.asarray(v_y, dtype=np.float64) > 0.0, k_top, k_bottom)
    return out if out.ndim else float(out)


def _radial_poly(coeffs: tuple[float, ...], r2):
    """1 + k1*r^2 + k2*r^4 + ... via Horner in r^2."""
    acc = np.zeros_like(r2) if np.ndim(r2) else 0.0
    for c in reversed(coeffs):
        acc = (acc + c) * r2
    return 1.0 + acc


def _bc_forward(vx, vy, bc: BrownConradyParams, wx=None):
    """Apply the division-model aberrations; returns (vx', vy', denom)."""
    fx = vx - bc.c1
    fy = vy - bc.c2
    r2 = fx * fx + fy * fy
    px = _radial_poly(bc.radial_x, r2)
    if wx is None:
        denom = px
    else:
        py = _radial_poly(bc.radial_y, r2)
        denom = py + wx * (px - py)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(denom > 0.0, 1.0 / np.where(denom > 0.0, denom, 1.0), 0.0)
    dot = fx * bc.p1 + fy * bc.p2
    ox = fx * inv + bc.c1 + fx * dot + r2 * bc.q1
    oy = fy * inv + bc.c2 + fy * dot + r2 * bc.q2
    return ox, oy, denom


def brown_conrady(v, bc: BrownConradyParams, weights=None) -> np.ndarray:
    """Division-model radial, decentering and thin-prism aberrations.

    Radial scaling divides by ``1 + k1*r^2 + k2*r^4 + ...`` about the
    cardinal offset (c1, c2); when ``weights`` (shape (..., 2), summing to 1)
    are supplied the divisor is the weighted mix of the per-axis series,
    blended so equal series are bit-identical to the symmetric model.

    Raises ModelDomainError when the radial divisor is <= 0 at the given
    radius (reported, not clamped).
    """
    v = np.asarray(v, dtype=np.float64)
    wx = None
    if weights is not None:
        wx = np.asarray(weights, dtype=np.float64)[..., 0]
    elif bc.is_aximorphic:
        raise ValueError("per-axis radial series differ: weights are required")
    ox, oy, denom = _bc_forward(v[..., 0], v[..., 1], bc, wx)
    if np.any(denom <= 0.0):
        raise ModelDomainError("radial divisor <= 0: model is singular at this radius")
    return np.stack([ox, oy], axis=-1)


def _bc_invert(vx, vy, bc: BrownConradyParams, max_iter: int = 50, tol: float = 1e-8):
    """Fixed-point inversion of the aberration stage; returns (x, y, ok)."""
    tx = np.asarray(vx, dtype=np.float64)
    ty = np.asarray(vy, dtype=np.float64)
    x = tx.copy()
    y = ty.copy()
    aximorphic = bc.is_aximorphic
    for _ in range(max_iter):
        wx = None
        if aximorphic:
            fx = x - bc.c1
            fy = y - bc.c2
            r2 = fx * fx + fy * fy
            with np.errstate(invalid="ignore", divide="ignore"):
                wx = np.where(r2 > 0.0, fx * fx / np.where(r2 > 0.0, r2, 1.0), 0.5)
        ox, oy, _ = _bc_forward(x, y, bc, wx)
        dx = ox - tx
        dy = oy - ty
        x = x - dx
        y = y - dy
        if max(np.max(np.abs(dx)), np.max(np.abs(dy))) < tol:
            break
    wx = None
    if aximorphic:
        fx = x - bc.c1
        fy = y - bc.c2
        r2 = fx * fx + fy * fy
        with np.errstate(invalid="ignore", divide="ignore"):
            wx = np.where(r2 > 0.0, fx * fx / np.where(r2 > 0.0, r2, 1.0), 0.5)
    ox, oy, denom = _bc_forward(x, y, bc, wx)
    ok = (np.abs(ox - tx) < tol) & (np.abs(oy - ty) < tol) & (denom > 0.0)
    return x, y, ok


def _axis_caps(params: ProjectionParams):
    """Per-axis normalized-radius rim (inf when the profile is unbounded)."""
    caps = {}
    for name, k in (
        ("x", params.k_x),
        ("top", params.k_y_top),
        ("bottom", params.k_y_bottom),
    ):
        scale = _profile_scale(k, params.omega)
        caps[name] = 1.0 / (scale * -k) if k < 0.0 else math.inf
    return caps


def _forward_arrays(v, params: ProjectionParams):
    """Vectorized forward chain over image vectors of shape (..., 2).

    Returns a dict with theta, phi, valid plus the intermediates needed for
    vignette evaluation (anamorphic radius r, horizontal weight wx, top-half
    mask). Out-of-domain pixels are clamped to the rim direction and flagged
    invalid rather than extrapolated.
    """
    v = np.asarray(v, dtype=np.float64)
    vx = v[..., 0]
    vy = v[..., 1]
    bc = params.bc
    ok = np.ones(vx.shape, dtype=bool)

    if not bc.is_identity:
        wbc = None
        if bc.is_aximorphic:
            fx = vx - bc.c1
            fy = vy - bc.c2
            r2 = fx * fx + fy * fy
            with np.errstate(invalid="ignore", divide="ignore"):
                wbc = np.where(r2 > 0.0, fx * fx / np.where(r2 > 0.0, r2, 1.0), 0.5)
        vx, vy, denom = _bc_forward(vx, vy, bc, wbc)
        ok &= denom > 0.0

    r = np.sqrt(vx * vx + vy * vy / params.squeeze)
    norm = np.hypot(vx, vy)
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(r > 0.0, norm / np.where(r > 0.0, r, 1.0), 1.0)
    ux = vx * factor
    uy = vy * factor

    caps = _axis_caps(params)
    top = uy > 0.0
    cap = np.minimum(caps["x"], np.where(top, caps["top"], caps["bottom"]))
    off = r > cap
    ok &= ~off
    r = np.minimum(r, cap)

    sx = _profile_scale(params.k_x, params.omega)
    st = _profile_scale(params.k_y_top, params.omega)
    sb = _profile_scale(params.k_y_bottom, params.omega)
    th_x = _theta_of_radius_raw(r, params.k_x, sx)
    th_y = np.where(
        top,
        _theta_of_radius_raw(r, params.k_y_top, st),
        _theta_of_radius_raw(r, params.k_y_bottom, sb),
    )

    ux2 = ux * ux
    uy2 = uy * uy
    total = ux2 + uy2
    with np.errstate(invalid="ignore", divide="ignore"):
        wx = np.where(total > 0.0, ux2 / np.where(total > 0.0, total, 1.0), 0.5)
    theta = th_y + wx * (th_x - th_y)
    phi = np.arctan2(uy, ux)

    over = theta > math.pi
    ok &= ~over
    theta = np.minimum(theta, math.pi)

    return {"theta": theta, "phi": phi, "valid": ok, "r": r, "wx": wx, "top": top}


def forward_model(v, params: ProjectionParams) -> SphericalDirection:
    """Map a centered image-space vector to its line of sight.

    Chain: Brown-Conrady -> anamorphic radius -> per-axis polar angles
    (horizontal factor and the sign-selected vertical factor) -> squared
    direction mix. The zero vector maps to the optical axis.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (2,):
        raise ValueError(f"expected an image-space 2-vector, got shape {v.shape}")
    out = _forward_arrays(v[None, :], params)
    if not out["valid"][0]:
        raise ModelDomainError("image vector outside the lens model's field")
    return SphericalDirection(float(out["theta"][0]), float(out["phi"][0]))


_BRACKET_GROWTH_LIMIT = 128
_BISECT_ITERATIONS = 52


def _mixed_theta_of_radius(r, wx, top, params: ProjectionParams):
    sx = _profile_scale(params.k_x, params.omega)
    st = _profile_scale(params.k_y_top, params.omega)
    sb = _profile_scale(params.k_y_bottom, params.omega)
    th_x = _theta_of_radius_raw(r, params.k_x, sx)
    th_y = np.where(
        top,
        _theta_of_radius_raw(r, params.k_y_top, st),
        _theta_of_radius_raw(r, params.k_y_bottom, sb),
    )
    return th_y + wx * (th_x - th_y)


def _invert_arrays(theta, phi, params: ProjectionParams):
    """Vectorized inversion of the forward chain; returns (v, valid, r).

    The azimuth is preserved by the radial chain, so the anamorphic radius is
    found by a bracketed bisection of the monotone mixed profile; the
    Brown-Conrady stage is inverted by fixed-point iteration. For invalid
    (out-of-field) entries, ``v`` holds the clamped rim position.
    """
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    theta, phi = np.broadcast_arrays(theta, phi)
    ux = np.cos(phi)
    uy = np.sin(phi)
    ux2 = ux * ux
    wx = ux2 / (ux2 + uy * uy)
    top = uy > 0.0

    ok = (theta >= 0.0) & (theta <= math.pi + 1e-12)

    caps = _axis_caps(params)
    cap = np.minimum(caps["x"], np.where(top, caps["top"], caps["bottom"]))

    hi = np.where(np.isfinite(cap), cap * (1.0 - 1e-12), 0.0)
    unbounded = ~np.isfinite(cap)
    if np.any(unbounded):
        # Seed from the per-axis closed forms where defined, then grow.
        seed = np.full(theta.shape, 1.0)
        for k in (params.k_x, params.k_y_top, params.k_y_bottom):
            scale = _profile_scale(k, params.omega)
            if k > 0.0:
                reach = theta * k < math.pi / 2.0 - 1e-9
                r_ax = np.where(reach, np.tan(np.minimum(theta * k, 1.5)) / (k * scale), 1.0)
                seed = np.maximum(seed, np.where(reach, r_ax, 1.0))
            elif k == 0.0:
                seed = np.maximum(seed, theta / scale)
        hi = np.where(unbounded, seed, hi)
        for _ in range(_BRACKET_GROWTH_LIMIT):
            need = unbounded & ok & (
                _mixed_theta_of_radius(hi, wx, top, params) < theta
            )
            if not np.any(need):
                break
            hi = np.where(need, hi * 2.0, hi)

    ok &= _mixed_theta_of_radius(hi, wx, top, params) >= theta - 1e-12

    lo = np.zeros_like(hi)
    for _ in range(_BISECT_ITERATIONS):
        mid = 0.5 * (lo + hi)
        below = _mixed_theta_of_radius(mid, wx, top, params) < theta
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    r = 0.5 * (lo + hi)
    r = np.where(theta <= 0.0, 0.0, r)

    rho = np.sqrt(ux2 + uy * uy / params.squeeze)
    t = r / rho
    vx = t * ux
    vy = t * uy

    if not params.bc.is_identity:
        vx, vy, bc_ok = _bc_invert(vx, vy, params.bc)
    else:
        bc_ok = np.ones_like(ok)

    return np.stack([vx, vy], axis=-1), ok & bc_ok, r, ok


def inverse_model(direction: SphericalDirection, params: ProjectionParams) -> np.ndarray:
    """Centered image-space vector imaging the given line of sight.

    Raises ModelDomainError when the direction is outside the lens's covered
    field and ConvergenceError when the aberration inversion stalls.
    """
    if direction.theta == 0.0:
        return np.zeros(2)
    theta = np.asarray([direction.theta])
    phi = np.asarray([direction.phi])
    v, ok, _, field_ok = _invert_arrays(theta, phi, params)
    if not field_ok[0]:
        raise ModelDomainError("direction outside the lens model's field")
    if not ok[0]:
        raise ConvergenceError("aberration inversion did not converge")
    return v[0]


def _vignette_profile(theta, k: float):
    """Relative illuminance of the k-profile; exact 1 for the orthographic
    case and cos^4 for the rectilinear one. theta = 0 maps to 1."""
    th = np.asarray(theta, dtype=np.float64)
    s = np.sin(th)
    c = np.cos(th)
    with np.errstate(invalid="ignore", divide="ignore"):
        if k > 0.0:
            ck = np.cos(th * k)
            num = (k * s) * (c * ck * ck)
            den = np.tan(th * k)
        elif k < 0.0:
            num = (k * s) * c
            den = np.sin(th * k) * np.cos(th * k)
        else:
            num = s * c
            den = th
        out = np.where(th > 0.0, num / np.where(th > 0.0, den, 1.0), 1.0)
    return out if out.ndim else float(out)


def natural_vignette(theta, k: float, omega: float):
    """Illuminance falloff implied by the projection geometry alone.

    ``V(theta) = sin(theta)*cos(theta) / (r(theta) * r'(theta))`` normalized
    to 1 on the axis. ``omega`` only bounds the valid domain; the profile
    shape is FOV-independent.
    """
    th = np.asarray(theta, dtype=np.float64)
    if np.any(th < 0.0) or np.any(th > theta_max(k, omega) + 1e-12):
        raise ModelDomainError("theta outside the profile domain")
    return _vignette_profile(theta, k)


def _vignette_arrays(fwd: dict, params: ProjectionParams):
    """Vignette for every pixel of a forward-chain evaluation (see
    :func:`_forward_arrays`); negative tail values are clamped to 0."""
    theta = fwd["theta"]
    if params.is_symmetric_k:
        v = _vignette_profile(theta, params.k_x)
        return np.maximum(v, 0.0)

    r = fwd["r"]
    wx = fwd["wx"]
    top = fwd["top"]
    sx = _profile_scale(params.k_x, params.omega)
    st = _profile_scale(params.k_y_top, params.omega)
    sb = _profile_scale(params.k_y_bottom, params.omega)
    dx = _dtheta_dradius(r, params.k_x, sx)
    dy = np.where(
        top,
        _dtheta_dradius(r, params.k_y_top, st),
        _dtheta_dradius(r, params.k_y_bottom, sb),
    )
    dtheta = dy + wx * (dx - dy)
    sy = np.where(top, st, sb)
    scale_eff = sy + wx * (sx - sy)
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.where(
            r > 0.0,
            np.sin(theta) * np.cos(theta) * dtheta
            / (np.where(r > 0.0, r, 1.0) * scale_eff * scale_eff),
            1.0,
        )
    return np.maximum(v, 0.0)


# --- flat text serialization of ProjectionParams ---------------------------

_SCALAR_KEYS = ("k_x", "k_y_top", "k_y_bottom", "squeeze", "aspect",
                "c1", "c2", "p1", "p2", "q1", "q2")


def save_params(path, params: ProjectionParams, description: str | None = None) -> None:
    """Write a flat key-value parameter file (one ``key value`` pair per line)."""
    lines = []
    if description is not None:
        lines.append(f"description {description}")
    lines.append(f"omega_deg {math.degrees(params.omega)!r}")
    for key in ("k_x", "k_y_top", "k_y_bottom", "squeeze", "aspect"):
        lines.append(f"{key} {getattr(params, key)!r}")
    bc = params.bc
    for key in ("c1", "c2", "p1", "p2", "q1", "q2"):
        lines.append(f"{key} {getattr(bc, key)!r}")
    n = max(3, len(bc.radial_x), len(bc.radial_y))
    rx = bc.radial_x + (0.0,) * (n - len(bc.radial_x))
    ry = bc.radial_y + (0.0,) * (n - len(bc.radial_y))
    for i in range(n):
        lines.append(f"kx{i + 1} {rx[i]!r}")
    for i in range(n):
        lines.append(f"ky{i + 1} {ry[i]!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_params(path) -> tuple[ProjectionParams, str | None]:
    """Parse a flat key-value parameter file; returns (params, description).

    Recognized keys: omega_deg (required), k_x, k_y_top, k_y_bottom, squeeze,
    aspect, c1, c2, p1, p2, q1, q2, kx1..kxN, ky1..kyN, description.
    """
    scalars: dict[str, float] = {}
    radial: dict[str, dict[int, float]] = {"kx": {}, "ky": {}}
    description = None
    omega_deg = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition(" ")
            value = value.strip()
            if not value:
                raise ValueError(f"{path}:{lineno}: key {key!r} has no value")
            if key == "description":
                description = value
                continue
            try:
                num = float(value)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad number {value!r}") from exc
            if key == "omega_deg":
                omega_deg = num
            elif key in _SCALAR_KEYS:
                scalars[key] = num
            elif key[:2] in ("kx", "ky") and key[2:].isdigit():
                radial[key[:2]][int(key[2:])] = num
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    if omega_deg is None:
        raise ValueError(f"{path}: missing required key 'omega_deg'")

    def series(tag: str) -> tuple[float, ...]:
        idx = radial[tag]
        if not idx:
            return ()
        return tuple(idx.get(i, 0.0) for i in range(1, max(idx) + 1))

    bc = BrownConradyParams(
        c1=scalars.get("c1", 0.0),
        c2=scalars.get("c2", 0.0),
        radial_x=series("kx"),
        radial_y=series("ky"),
        p1=scalars.get("p1", 0.0),
        p2=scalars.get("p2", 0.0),
        q1=scalars.get("q1", 0.0),
        q2=scalars.get("q2", 0.0),
    )
    params = ProjectionParams(
        omega=math.radians(omega_deg),
        k_x=scalars.get("k_x", 0.0),
        k_y_top=scalars.get("k_y_top", 0.0),
        k_y_bottom=scalars.get("k_y_bottom", 0.0),
        squeeze=scalars.get("squeeze", 1.0),
        bc=bc,
        aspect=scalars.get("aspect", 1.0),
    )
    return params, description
