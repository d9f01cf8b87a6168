"""Closed immersed reference surfaces on a single periodic chart.

Every built-in surface is given in closed form together with the first and
second derivatives of the parameterization and of its unit normal.  The
normal is outward for all built-ins, so convex curves have negative mean
curvature under the convention ``H = -div nu``.

Curves (``dim == 1``) are parameterized counter-clockwise and the normal is
the tangent rotated clockwise by 90 degrees.  The torus uses ``x1`` for the
angle around the symmetry axis and ``x2`` for the angle around the tube.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter
from .grid import Grid

KINDS = ("unit_circle", "ellipse", "limacon", "torus")

DEFAULT_PARAMS = {
    "unit_circle": {},
    "ellipse": {"a": 2.0, "b": 1.0},
    "limacon": {"b": 0.5},
    "torus": {"R": 2.0, "r": 0.5},
}


@dataclass(frozen=True)
class SurfaceSample:
    """Closed-form geometry of a reference surface at a set of points.

    Array layouts, with ``m = dim + 1`` ambient components and ``...`` the
    sample shape:

    ``point``, ``normal``: ``(m, ...)``;
    ``dpoint``, ``dnormal``: ``(dim, m, ...)``, first index the parameter axis;
    ``ddpoint``, ``ddnormal``: ``(dim, dim, m, ...)``.
    """

    point: np.ndarray
    normal: np.ndarray
    dpoint: np.ndarray
    dnormal: np.ndarray
    ddpoint: np.ndarray
    ddnormal: np.ndarray

    def metric(self) -> np.ndarray:
        """First fundamental form ``g_ij`` of the reference, shape ``(dim, dim, ...)``."""
        return np.einsum("ia...,ja...->ij...", self.dpoint, self.dpoint)

    def jacobian_singular_values(self) -> np.ndarray:
        """Singular values of the ``(dim+1) x dim`` Jacobian at each point."""
        g = np.moveaxis(self.metric(), (0, 1), (-2, -1))
        return np.sqrt(np.clip(np.linalg.eigvalsh(g), 0.0, None))


def _curve_frame(d1, d2, d3):
    """Unit normal and its first two derivatives from curve derivatives.

    ``d1, d2, d3`` are the first three derivatives of the parameterization,
    each of shape ``(2, ...)``.
    """
    s = np.sqrt(np.sum(d1 * d1, axis=0))
    p = np.sum(d1 * d2, axis=0)
    q = np.sum(d2 * d2, axis=0) + np.sum(d1 * d3, axis=0)
    tan = d1 / s
    dtan = d2 / s - d1 * p / s ** 3
    ddtan = d3 / s - 2.0 * d2 * p / s ** 3 - d1 * q / s ** 3 + 3.0 * d1 * p ** 2 / s ** 5

    def rot(v):
        return np.stack([v[1], -v[0]])

    return rot(tan), rot(dtan), rot(ddtan)


@dataclass(frozen=True)
class ReferenceSurface:
    """Immersed closed reference hypersurface with outward unit normal."""

    kind: str
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return 2 if self.kind == "torus" else 1

    def _curve_derivatives(self, x):
        c, s = np.cos(x), np.sin(x)
        if self.kind == "unit_circle":
            a = b = 1.0
        elif self.kind == "ellipse":
            a, b = self.params["a"], self.params["b"]
        if self.kind in ("unit_circle", "ellipse"):
            pts = [
                np.stack([a * c, b * s]),
                np.stack([-a * s, b * c]),
                np.stack([-a * c, -b * s]),
                np.stack([a * s, -b * c]),
            ]
            return pts
        # limacon r = b + cos x, written with double angles
        b = self.params["b"]
        c2, s2 = np.cos(2 * x), np.sin(2 * x)
        return [
            np.stack([b * c + 0.5 * (1.0 + c2), b * s + 0.5 * s2]),
            np.stack([-b * s - s2, b * c + c2]),
            np.stack([-b * c - 2.0 * c2, -b * s - 2.0 * s2]),
            np.stack([b * s + 4.0 * s2, -b * c - 4.0 * c2]),
        ]

    def evaluate(self, *x) -> SurfaceSample:
        """Closed-form geometry at parameter points ``x`` (one array per axis)."""
        if len(x) != self.dim:
            raise ValueError(f"{self.kind} expects {self.dim} parameter arrays")
        if self.dim == 1:
            x = np.asarray(x[0], dtype=float)
            p0, p1, p2, p3 = self._curve_derivatives(x)
            nu, dnu, ddnu = _curve_frame(p1, p2, p3)
            return SurfaceSample(
                point=p0,
                normal=nu,
                dpoint=p1[None],
                dnormal=dnu[None],
                ddpoint=p2[None, None],
                ddnormal=ddnu[None, None],
            )
        return self._torus(*x)

    def _torus(self, phi, psi):
        R, r = self.params["R"], self.params["r"]
        phi, psi = np.broadcast_arrays(np.asarray(phi, float), np.asarray(psi, float))
        c1, s1, c2, s2 = np.cos(phi), np.sin(phi), np.cos(psi), np.sin(psi)
        zero = np.zeros_like(phi)
        # point = R * e(phi) + r * nu
        e = np.stack([c1, s1, zero])
        e1 = np.stack([-s1, c1, zero])
        nu = np.stack([c2 * c1, c2 * s1, s2])
        nu_phi = np.stack([-c2 * s1, c2 * c1, zero])
        nu_psi = np.stack([-s2 * c1, -s2 * s1, c2])
        nu_pp = np.stack([-c2 * c1, -c2 * s1, zero])
        nu_pq = np.stack([s2 * s1, -s2 * c1, zero])
        nu_qq = -nu
        dnu = np.stack([nu_phi, nu_psi])
        ddnu = np.stack([np.stack([nu_pp, nu_pq]), np.stack([nu_pq, nu_qq])])
        point = R * e + r * nu
        dpoint = np.stack([R * e1 + r * nu_phi, r * nu_psi])
        ddpoint = np.stack([
            np.stack([-R * e + r * nu_pp, r * nu_pq]),
            np.stack([r * nu_pq, r * nu_qq]),
        ])
        return SurfaceSample(point, nu, dpoint, dnu, ddpoint, ddnu)

    def sample(self, grid: Grid) -> SurfaceSample:
        if grid.dim != self.dim:
            raise ValueError(f"{self.kind} needs a {self.dim}-dimensional grid, got {grid.dim}")
        return self.evaluate(*grid.coords)

    def focal_scale(self, grid: Grid) -> float:
        """``1 / max|H_Sigma|`` on the grid, a proxy for the tube radius."""
        return 1.0 / float(np.max(np.abs(reference_mean_curvature(self, grid))))


def build_reference(kind: str, params: dict | None = None) -> ReferenceSurface:
    """Instantiate a built-in reference surface.

    Missing parameters fall back to :data:`DEFAULT_PARAMS`.

    Raises
    ------
    InvalidParameter
        Unknown kind, unknown or non-positive parameters, ``limacon`` with
        ``b`` outside ``(0, 1)``, or a torus with ``R <= r``.
    """
    if kind not in KINDS:
        raise InvalidParameter(f"unknown surface kind {kind!r}; expected one of {KINDS}")
    merged = dict(DEFAULT_PARAMS[kind])
    for key, value in (params or {}).items():
        if key not in merged:
            raise InvalidParameter(f"surface {kind!r} has no parameter {key!r}")
        merged[key] = float(value)
    for key, value in merged.items():
        if not np.isfinite(value) or value <= 0:
            raise InvalidParameter(f"surface parameter {key} must be positive, got {value}")
    if kind == "limacon" and not merged["b"] < 1.0:
        raise InvalidParameter("limacon parameter b must lie in (0, 1) for an immersed loop")
    if kind == "torus" and merged["R"] <= merged["r"]:
        raise InvalidParameter("torus requires R > r")
    return ReferenceSurface(kind, merged)


def reference_mean_curvature(surface: ReferenceSurface, grid: Grid) -> np.ndarray:
    """Mean curvature ``H_Sigma = -div nu_Sigma`` from the closed-form derivatives."""
    smp = surface.sample(grid)
    g = np.moveaxis(smp.metric(), (0, 1), (-2, -1))
    ginv = np.moveaxis(np.linalg.inv(g), (-2, -1), (0, 1))
    # -g^ij d_i nu . d_j theta
    return -np.einsum("ij...,ia...,ja...->...", ginv, smp.dnormal, smp.dpoint)
