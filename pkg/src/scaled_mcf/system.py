"""Right-hand sides of the coupled height/concentration system and its functionals.

On the fixed chart the system reads

    d_t rho = g(u) a(rho) H(rho)
    d_t u   = Lap_rho G'(u) + g(u) a(rho) H(rho) nu_ref . grad_rho u + g(u) H(rho)^2 u

with normal velocity ``V = d_t rho / a(rho) = g(u) H(rho)``.  The energy
``E = int G(u) dA`` decays at rate ``int |grad G'(u)|^2 + V^2 dA`` and the
mass ``int u dA`` is conserved.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import EnergyDensity
from .geometry import (
    MetricData,
    assemble_geometry,
    laplace_beltrami,
    mean_curvature_div,
    surface_gradient,
)
from .grid import Grid
from .surfaces import ReferenceSurface


@dataclass
class SystemRHS:
    drho_dt: np.ndarray
    du_dt: np.ndarray
    V: np.ndarray
    H: np.ndarray
    geom: MetricData


def diffusion_term(geom: MetricData, density: EnergyDensity, u, expanded: bool = False) -> np.ndarray:
    """``Lap_rho G'(u)``.

    The direct form applies the Laplace-Beltrami operator to the field
    ``G'(u)``; ``expanded=True`` uses ``G''(u) Lap u + G'''(u) |grad u|^2``.
    """
    if not expanded:
        return laplace_beltrami(geom, density.dG(u))
    grad = surface_gradient(geom, u)
    return density.d2G(u) * laplace_beltrami(geom, u) + density.d3G(u) * np.sum(grad * grad, axis=0)


def evaluate_rhs(surface: ReferenceSurface, grid: Grid, density: EnergyDensity, rho, u,
                 geom: MetricData | None = None, expanded: bool = False) -> SystemRHS:
    """Both right-hand sides, sharing one geometry assembly."""
    if geom is None:
        geom = assemble_geometry(surface, grid, rho)
    u = np.asarray(u, dtype=float)
    H = mean_curvature_div(geom)
    gu = density.g(u)
    drho = gu * geom.a_factor * H
    transport = np.einsum("i...,i...->...", geom.normal_gradient_coeffs(), grid.gradient(u))
    du = diffusion_term(geom, density, u, expanded) + drho * transport + gu * H ** 2 * u
    return SystemRHS(drho_dt=drho, du_dt=du, V=drho / geom.a_factor, H=H, geom=geom)


def rhs_height(surface, grid, density, rho, u) -> np.ndarray:
    """``g(u) a(rho) H(rho)``."""
    geom = assemble_geometry(surface, grid, rho)
    return density.g(u) * geom.a_factor * mean_curvature_div(geom)


def rhs_concentration(surface, grid, density, rho, u, expanded: bool = False) -> np.ndarray:
    return evaluate_rhs(surface, grid, density, rho, u, expanded=expanded).du_dt


def energy(surface, grid, density, rho, u, geom: MetricData | None = None) -> float:
    """``int G(u) dA`` on ``Gamma_rho``."""
    if geom is None:
        geom = assemble_geometry(surface, grid, rho)
    return grid.integrate(density.G(u), geom.sqrt_det)


def mass(surface, grid, rho, u, geom: MetricData | None = None) -> float:
    """``int u dA`` on ``Gamma_rho``."""
    if geom is None:
        geom = assemble_geometry(surface, grid, rho)
    return grid.integrate(u, geom.sqrt_det)


def dissipation(surface, grid, density, rho, u, V, geom: MetricData | None = None) -> float:
    """``int |grad G'(u)|^2 + V^2 dA``; nonnegative by construction."""
    if geom is None:
        geom = assemble_geometry(surface, grid, rho)
    grad = surface_gradient(geom, density.dG(u))
    integrand = np.sum(grad * grad, axis=0) + np.asarray(V) ** 2
    return grid.integrate(integrand, geom.sqrt_det)
