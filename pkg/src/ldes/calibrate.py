"""Fit lens-model parameters to measured correspondences.

A correspondence pairs an observed frame position with the incidence
direction of the light that produced it (from a gimbal/dot-sight rig or
checkerboard geometry; corner detection itself is out of scope, external
detectors feed the text format below). Fitting minimizes the weighted squared
frame-space distance between observed pixels and the model's prediction with
damped (Levenberg-style) least squares over a caller-chosen subset of
parameters; derivatives come from central finite differences.

Correspondence text format, one sample per line::

    s  t  dir_x  dir_y  dir_z  [weight]

with ``#`` comments and blank lines ignored. Directions must be unit length
to 1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import BrownConradyParams, ProjectionParams, TexCoord
from .projection import _invert_arrays, angles_from_unit_vectors

# Frame-space residual assigned to correspondences a trial model cannot
# reach; keeps finite-difference Jacobians finite near domain edges.
_UNREACHABLE_RESIDUAL = 10.0

_RMS_ALREADY_OPTIMAL = 1e-12

# The normalized radial profile depends on k only at second order around
# k = 0 (tan and sin corrections are both O(k^2)), so k = 0 is a stationary
# point of the model family and a gradient solver seeded exactly there
# cannot move. Free k-parameters seeded at 0 are offset by this much.
_K_SEED_NUDGE = 1e-3
_K_PARAMETER_NAMES = ("k", "k_x", "k_y_top", "k_y_bottom")


@dataclass(frozen=True)
class Correspondence:
    """Observed frame position paired with its unit incidence direction."""

    pixel: TexCoord
    direction: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        vec = np.asarray(self.direction, dtype=np.float64)
        if vec.shape != (3,):
            raise ValueError(f"direction must be a 3-vector, got shape {vec.shape}")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"direction must be unit length (|d| = {norm!r})")
        if not self.weight > 0.0:
            raise ValueError(f"weight must be positive, got {self.weight}")
        vec.flags.writeable = False
        object.__setattr__(self, "direction", vec)


@dataclass(frozen=True)
class FitConfig:
    """Free-parameter selection and solver knobs.

    Free parameter names: omega_deg, k_x, k_y_top, k_y_bottom, squeeze,
    c1, c2, p1, p2, q1, q2, kx1..kxN, ky1..kyN, and the alias ``k`` which
    ties all three projection factors to one value.
    """

    free_parameters: tuple[str, ...]
    max_iterations: int = 200
    tolerance: float = 1e-10
    damping_init: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "free_parameters", tuple(self.free_parameters))
        if not self.free_parameters:
            raise ValueError("at least one free parameter is required")
        for name in self.free_parameters:
            _resolve_parameter(name)  # raises on unknown names
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance <= 0.0 or self.damping_init <= 0.0:
            raise ValueError("tolerance and damping_init must be positive")


@dataclass(frozen=True)
class FitReport:
    """Outcome of a fit: final parameters plus solver diagnostics."""

    params: ProjectionParams
    rms: float
    iterations: int
    converged: bool
    warnings: tuple[str, ...] = ()

    def to_text(self) -> str:
        lines = [
            f"converged {int(self.converged)}",
            f"iterations {self.iterations}",
            f"rms {self.rms!r}",
            f"omega_deg {math.degrees(self.params.omega)!r}",
        ]
        for key in ("k_x", "k_y_top", "k_y_bottom", "squeeze", "aspect"):
            lines.append(f"{key} {getattr(self.params, key)!r}")
        for i, warning in enumerate(self.warnings, start=1):
            lines.append(f"warning{i} {warning}")
        return "\n".join(lines) + "\n"


# --- parameter plumbing -----------------------------------------------------

def _get_radial(params: ProjectionParams, axis: str, index: int) -> float:
    series = params.bc.radial_x if axis == "kx" else params.bc.radial_y
    return series[index] if index < len(series) else 0.0


def _set_radial(state: dict, axis: str, index: int, value: float) -> None:
    series = list(state[axis])
    while len(series) <= index:
        series.append(0.0)
    series[index] = value
    state[axis] = tuple(series)


def _resolve_parameter(name: str):
    """Return (getter(params), setter(state, value), (lo, hi)) for a name."""
    simple = {
        "omega_deg": (lambda p: math.degrees(p.omega), "omega_deg", (0.1, 360.0)),
        "k_x": (lambda p: p.k_x, "k_x", (-1.0, 1.0)),
        "k_y_top": (lambda p: p.k_y_top, "k_y_top", (-1.0, 1.0)),
        "k_y_bottom": (lambda p: p.k_y_bottom, "k_y_bottom", (-1.0, 1.0)),
        "squeeze": (lambda p: p.squeeze, "squeeze", (1e-3, 1e3)),
        "c1": (lambda p: p.bc.c1, "c1", (-10.0, 10.0)),
        "c2": (lambda p: p.bc.c2, "c2", (-10.0, 10.0)),
        "p1": (lambda p: p.bc.p1, "p1", (-10.0, 10.0)),
        "p2": (lambda p: p.bc.p2, "p2", (-10.0, 10.0)),
        "q1": (lambda p: p.bc.q1, "q1", (-10.0, 10.0)),
        "q2": (lambda p: p.bc.q2, "q2", (-10.0, 10.0)),
    }
    if name in simple:
        getter, key, box = simple[name]

        def setter(state, value, key=key):
            state[key] = value

        return getter, setter, box
    if name == "k":

        def set_k(state, value):
            state["k_x"] = value
            state["k_y_top"] = value
            state["k_y_bottom"] = value

        return (lambda p: p.k_x), set_k, (-1.0, 1.0)
    if name[:2] in ("kx", "ky") and name[2:].isdigit() and int(name[2:]) >= 1:
        axis, index = name[:2], int(name[2:]) - 1
        return (
            lambda p, a=axis, i=index: _get_radial(p, a, i),
            lambda state, value, a=axis, i=index: _set_radial(state, a, i, value),
            (-100.0, 100.0),
        )
    raise ValueError(f"unknown fit parameter {name!r}")


def _params_state(params: ProjectionParams) -> dict:
    return {
        "omega_deg": math.degrees(params.omega),
        "k_x": params.k_x,
        "k_y_top": params.k_y_top,
        "k_y_bottom": params.k_y_bottom,
        "squeeze": params.squeeze,
        "c1": params.bc.c1,
        "c2": params.bc.c2,
        "p1": params.bc.p1,
        "p2": params.bc.p2,
        "q1": params.bc.q1,
        "q2": params.bc.q2,
        "kx": params.bc.radial_x,
        "ky": params.bc.radial_y,
    }


def _build_params(seed: ProjectionParams, state: dict) -> ProjectionParams | None:
    try:
        bc = BrownConradyParams(
            c1=state["c1"], c2=state["c2"],
            radial_x=state["kx"], radial_y=state["ky"],
            p1=state["p1"], p2=state["p2"],
            q1=state["q1"], q2=state["q2"],
        )
        return replace(
            seed,
            omega=math.radians(state["omega_deg"]),
            k_x=state["k_x"],
            k_y_top=state["k_y_top"],
            k_y_bottom=state["k_y_bottom"],
            squeeze=state["squeeze"],
            bc=bc,
        )
    except (ValueError, ArithmeticError):
        return None


def predict_pixels(params: ProjectionParams, directions: np.ndarray):
    """Frame positions imaging the given unit directions; returns (st, ok)."""
    theta, phi = angles_from_unit_vectors(directions)
    v, ok, _, _ = _invert_arrays(theta, phi, params)
    st = np.empty_like(v)
    st[..., 0] = (v[..., 0] + 1.0) / 2.0
    st[..., 1] = (v[..., 1] * params.aspect + 1.0) / 2.0
    return st, ok


def numeric_jacobian(fun, x: np.ndarray, step_scale: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian with steps of step_scale per parameter
    magnitude (at least step_scale in absolute terms)."""
    x = np.asarray(x, dtype=np.float64)
    f0 = fun(x)
    jac = np.empty((f0.size, x.size), dtype=np.float64)
    for i in range(x.size):
        h = step_scale * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        jac[:, i] = (fun(xp) - fun(xm)) / (2.0 * h)
    return jac


def _column_correlation_warnings(jac: np.ndarray, names: tuple[str, ...]) -> list[str]:
    warnings = []
    norms = np.linalg.norm(jac, axis=0)
    for i in range(jac.shape[1]):
        for j in range(i + 1, jac.shape[1]):
            denom = norms[i] * norms[j]
            if denom == 0.0:
                continue
            corr = abs(float(jac[:, i] @ jac[:, j])) / denom
            if corr > 0.9999:
                warnings.append(
                    f"rank deficiency: columns {names[i]} and {names[j]} "
                    f"correlate at {corr:.6f}"
                )
    for i, norm in enumerate(norms):
        if norm == 0.0:
            warnings.append(f"rank deficiency: column {names[i]} is zero")
    return warnings


def fit(
    correspondences: list[Correspondence],
    seed: ProjectionParams,
    config: FitConfig,
) -> tuple[ProjectionParams, FitReport]:
    """Recover lens parameters from correspondences by damped least squares.

    Returns the refined parameters and a report (RMS residual in frame
    units, accepted-iteration count, convergence flag, warnings). On
    non-convergence the best parameters seen are returned with the flag
    cleared. Parameters outside their boxes are projected back after every
    step; parameters not listed as free stay exactly at their seed values.
    Free k-parameters seeded at exactly 0 start from a small offset instead
    (k = 0 is a stationary point of the projection family).
    """
    n_free = len(config.free_parameters)
    if len(correspondences) < n_free:
        raise ValueError(
            f"{len(correspondences)} correspondences cannot constrain "
            f"{n_free} free parameters"
        )
    accessors = [_resolve_parameter(name) for name in config.free_parameters]
    lo = np.array([box[0] for _, _, box in accessors])
    hi = np.array([box[1] for _, _, box in accessors])

    directions = np.stack([c.direction for c in correspondences])
    observed = np.array([[c.pixel.s, c.pixel.t] for c in correspondences])
    weights = np.array([c.weight for c in correspondences])
    sqrt_w = np.sqrt(weights)
    total_weight = float(np.sum(weights))

    def residuals(x: np.ndarray) -> np.ndarray:
        state = _params_state(seed)
        for value, (_, setter, _) in zip(x, accessors):
            setter(state, float(value))
        params = _build_params(seed, state)
        if params is None:
            return np.full(2 * len(correspondences), _UNREACHABLE_RESIDUAL)
        st, ok = predict_pixels(params, directions)
        res = st - observed
        res[~ok] = _UNREACHABLE_RESIDUAL
        return (res * sqrt_w[:, None]).ravel()

    def rebuild(x: np.ndarray) -> ProjectionParams:
        state = _params_state(seed)
        for value, (_, setter, _) in zip(x, accessors):
            setter(state, float(value))
        params = _build_params(seed, state)
        assert params is not None
        return params

    def rms_of(cost: float) -> float:
        return math.sqrt(cost / total_weight)

    x = np.clip(np.array([get(seed) for get, _, _ in accessors]), lo, hi)
    r = residuals(x)
    cost = float(r @ r)
    if rms_of(cost) < _RMS_ALREADY_OPTIMAL:
        return rebuild(x), FitReport(rebuild(x), rms_of(cost), 0, True)

    nudged = False
    for i, name in enumerate(config.free_parameters):
        if name in _K_PARAMETER_NAMES and x[i] == 0.0:
            x[i] = _K_SEED_NUDGE
            nudged = True
    if nudged:
        r = residuals(x)
        cost = float(r @ r)

    warnings: list[str] = []
    damping = config.damping_init
    iterations = 0
    converged = False
    first_jacobian = True

    while iterations < config.max_iterations:
        jac = numeric_jacobian(residuals, x)
        if first_jacobian:
            warnings.extend(
                _column_correlation_warnings(jac, config.free_parameters)
            )
            first_jacobian = False
        jtj = jac.T @ jac
        grad = jac.T @ r
        if np.max(np.abs(grad)) < 1e-14:
            converged = True
            break
        diag = np.clip(np.diag(jtj), 1e-12, None)

        accepted = False
        while damping <= 1e12:
            try:
                step = np.linalg.solve(jtj + damping * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                damping *= 10.0
                continue
            x_new = np.clip(x + step, lo, hi)
            r_new = residuals(x_new)
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                rel_drop = (cost - cost_new) / max(cost, 1e-300)
                x, r, cost = x_new, r_new, cost_new
                damping = max(damping / 3.0, 1e-14)
                iterations += 1
                accepted = True
                if rel_drop < config.tolerance:
                    converged = True
                break
            damping *= 10.0
        if not accepted:
            # No downhill step exists even under maximal damping: the
            # current point is stationary to numerical resolution.
            converged = True
            break
        if converged:
            break

    params = rebuild(x)
    report = FitReport(params, rms_of(cost), iterations, converged, tuple(warnings))
    return params, report


def read_correspondences(path) -> list[Correspondence]:
    """Parse ``s t dir_x dir_y dir_z [weight]`` lines into correspondences."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) not in (5, 6):
                raise ValueError(
                    f"{path}:{lineno}: malformed line (expected 5 or 6 fields, "
                    f"got {len(fields)})"
                )
            try:
                values = [float(f) for f in fields]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed number") from exc
            direction = np.array(values[2:5])
            norm = float(np.linalg.norm(direction))
            if abs(norm - 1.0) > 1e-9:
                raise ValueError(
                    f"{path}:{lineno}: direction is not unit length (|d| = {norm!r})"
                )
            weight = values[5] if len(values) == 6 else 1.0
            if weight <= 0.0:
                raise ValueError(f"{path}:{lineno}: weight must be positive")
            out.append(
                Correspondence(TexCoord(values[0], values[1]), direction, weight)
            )
    return out


def write_correspondences(path, correspondences: list[Correspondence]) -> None:
    """Inverse of :func:`read_correspondences`."""
    with open(path, "w", encoding="utf-8") as fh:
        for c in correspondences:
            values = (c.pixel.s, c.pixel.t, *c.direction, c.weight)
            fh.write(" ".join(repr(float(v)) for v in values) + "\n")
