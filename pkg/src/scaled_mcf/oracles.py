"""Reduced-model reference solutions.

Uniform concentration on a circle
---------------------------------
For a circle of radius ``r`` with outward normal, ``H = -1/r`` and the
normal velocity is ``V = r'``.  A spatially uniform ``c`` has vanishing
surface Laplacian, and the normal time derivative of a uniform field is just
``c'``.  The coupled law ``V = g(c) H``, ``c' = c H V`` therefore reduces to

    r' = -g(c) / r,
    c' = c g(c) / r^2,

and ``(r c)' = r' c + r c' = 0``, i.e. the mass ``2 pi r c`` is conserved.
With ``c`` frozen, ``r(t) = sqrt(r0^2 - 2 g t)``.  Flipping the normal
orientation flips the signs of ``H`` and ``V`` together and leaves these
equations unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import EnergyDensity


@dataclass
class CircleOracleResult:
    t: np.ndarray
    r: np.ndarray
    c: np.ndarray
    invariant_drift: float
    reason: str = "completed"


def _circle_rhs(density, y, frozen):
    r, c = y
    g = density.g(c)
    return np.array([-g / r, 0.0 if frozen else c * g / r ** 2])


def _rk4_substep(density, y, h, frozen):
    k1 = _circle_rhs(density, y, frozen)
    stages = [y + 0.5 * h * k1]
    k2 = _circle_rhs(density, stages[-1], frozen)
    stages.append(y + 0.5 * h * k2)
    k3 = _circle_rhs(density, stages[-1], frozen)
    stages.append(y + h * k3)
    k4 = _circle_rhs(density, stages[-1], frozen)
    stages.append(y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))
    for z in stages:
        if not (np.all(np.isfinite(z)) and z[0] > 0):
            raise FloatingPointError("radius left (0, inf)")
    return stages[-1]


def circle_ode_oracle(density: EnergyDensity, r0: float, c0: float, T: float, dt: float,
                      frozen_concentration: bool = False, substeps: int = 10) -> CircleOracleResult:
    """Integrate the uniform-circle system with RK4 on ``dt / substeps``.

    Values are reported on the grid ``0, dt, 2 dt, ..., T``.  Integration stops
    early (``reason="blow-up reached"``) once any Runge-Kutta stage has a
    non-positive radius or the radius stops decreasing; the partial result,
    which ends before the collapse, is returned.
    """
    if r0 <= 0:
        raise ValueError("initial radius must be positive")
    nsteps = int(round(T / dt)) if T > 0 else 0
    if nsteps and abs(nsteps * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError("T must be an integer multiple of dt")
    h = dt / substeps
    y = np.array([float(r0), float(c0)])
    ts, rs, cs = [0.0], [y[0]], [y[1]]
    reason = "completed"
    for k in range(1, nsteps + 1):
        y_prev = y
        try:
            for _ in range(substeps):
                y = _rk4_substep(density, y, h, frozen_concentration)
        except FloatingPointError:
            reason = "blow-up reached"
            break
        if not y[0] < y_prev[0]:
            # a radius that stops shrinking means the stages jumped over the collapse
            reason = "blow-up reached"
            break
        ts.append(k * dt)
        rs.append(y[0])
        cs.append(y[1])
    t, r, c = np.array(ts), np.array(rs), np.array(cs)
    drift = float(np.max(np.abs(r * c - r0 * c0))) if not frozen_concentration else float("nan")
    return CircleOracleResult(t, r, c, drift, reason)


def scaled_mcf_radius(r0: float, g: float, t) -> np.ndarray:
    """Exact radius of a circle under ``V = g H`` with constant ``g``."""
    return np.sqrt(r0 ** 2 - 2.0 * g * np.asarray(t, dtype=float))


def ellipse_curvature_reference(a: float, b: float, x) -> np.ndarray:
    """Mean curvature of ``(a cos x, b sin x)`` with outward normal."""
    if a <= 0 or b <= 0:
        raise ValueError("ellipse semi-axes must be positive")
    x = np.asarray(x, dtype=float)
    return -a * b / (a ** 2 * np.sin(x) ** 2 + b ** 2 * np.cos(x) ** 2) ** 1.5
