import numpy as np
import pytest

from scaled_mcf.density import EnergyDensity
from scaled_mcf.grid import Grid
from scaled_mcf.surfaces import build_reference
from scaled_mcf.system import (
    dissipation,
    energy,
    evaluate_rhs,
    mass,
    rhs_concentration,
    rhs_height,
)

CIRCLE = build_reference("unit_circle")
TORUS = build_reference("torus", {"R": 2, "r": 0.5})
EXP = EnergyDensity("exponential")
GRID = Grid(1, 64)


def const(v, grid=GRID):
    return np.full(grid.shape, float(v))


def test_rhs_height_circle_values():
    c0 = 0.7
    assert np.allclose(rhs_height(CIRCLE, GRID, EXP, const(0), const(c0)), -EXP.g(c0))
    assert np.allclose(rhs_height(CIRCLE, GRID, EXP, const(0.5), const(c0)), -EXP.g(c0) / 1.5)


def test_rhs_height_negative_on_convex_curve():
    ell = build_reference("ellipse", {"a": 2, "b": 1})
    u = 1.0 + 0.3 * np.sin(3 * GRID.x1d)
    rho = 0.02 * np.cos(2 * GRID.x1d)
    assert np.all(rhs_height(ell, GRID, EXP, rho, u) < 0)


def test_rhs_concentration_values():
    quad = EnergyDensity("shifted_quadratic", {"a0": 1.0, "a2": 1.0})
    assert np.max(np.abs(rhs_concentration(CIRCLE, GRID, quad, const(0.1), const(0.0)))) == 0.0
    c0 = 0.7
    assert np.allclose(rhs_concentration(CIRCLE, GRID, EXP, const(0), const(c0)), c0 * EXP.g(c0))


def test_two_diffusion_forms_agree():
    grid = Grid(1, 128)
    x = grid.x1d
    ell = build_reference("ellipse", {"a": 2, "b": 1})
    rho, u = 0.05 * np.cos(2 * x), 1.0 + 0.3 * np.sin(x)
    direct = rhs_concentration(ell, grid, EXP, rho, u)
    expanded = rhs_concentration(ell, grid, EXP, rho, u, expanded=True)
    assert np.max(np.abs(direct - expanded)) <= 1e-9 * np.max(np.abs(direct))


def test_energy_examples():
    assert energy(CIRCLE, GRID, EXP, const(0), const(0)) == pytest.approx(2 * np.pi, rel=1e-12)
    assert energy(CIRCLE, GRID, EXP, const(0.2), const(1)) == pytest.approx(2 * np.pi * 1.2 * np.exp(-1), rel=1e-12)
    tg = Grid(2, 32)
    assert energy(TORUS, tg, EXP, const(0, tg), const(0, tg)) == pytest.approx(4 * np.pi ** 2, rel=1e-8)


def test_mass_examples():
    assert mass(CIRCLE, GRID, const(0), const(0)) == 0.0
    assert mass(CIRCLE, GRID, const(0), const(1)) == pytest.approx(2 * np.pi, rel=1e-12)
    assert mass(CIRCLE, GRID, const(0.2), const(1)) == pytest.approx(2.4 * np.pi, rel=1e-12)
    tg = Grid(2, 32)
    assert mass(TORUS, tg, const(0, tg), const(1, tg)) == pytest.approx(4 * np.pi ** 2, rel=1e-8)


def test_dissipation_examples():
    c0 = 0.8
    r = evaluate_rhs(CIRCLE, GRID, EXP, const(0), const(c0))
    assert dissipation(CIRCLE, GRID, EXP, const(0), const(c0), r.V) == pytest.approx(2 * np.pi * EXP.g(c0) ** 2)
    rho = 0.05 * np.sin(2 * GRID.x1d)
    r = evaluate_rhs(CIRCLE, GRID, EXP, rho, const(0))
    D = dissipation(CIRCLE, GRID, EXP, rho, const(0), r.V)
    assert D == pytest.approx(GRID.integrate(r.V ** 2, r.geom.sqrt_det), rel=1e-12)
    assert D >= 0


def test_energy_rate_identity_at_a_state():
    # dE/dt from the chain rule on the semi-discrete system equals -dissipation
    grid = Grid(1, 128)
    x = grid.x1d
    rho, u = 0.03 * np.cos(2 * x), 1.0 + 0.2 * np.sin(x)
    r = evaluate_rhs(CIRCLE, grid, EXP, rho, u)
    eps = 1e-6
    e_plus = energy(CIRCLE, grid, EXP, rho + eps * r.drho_dt, u + eps * r.du_dt)
    e_minus = energy(CIRCLE, grid, EXP, rho - eps * r.drho_dt, u - eps * r.du_dt)
    rate = (e_plus - e_minus) / (2 * eps)
    D = dissipation(CIRCLE, grid, EXP, rho, u, r.V)
    assert rate == pytest.approx(-D, rel=1e-6)


def test_mass_rate_vanishes():
    grid = Grid(1, 128)
    x = grid.x1d
    ell = build_reference("ellipse", {"a": 1.5, "b": 1})
    rho, u = 0.03 * np.cos(2 * x), 1.0 + 0.2 * np.sin(x)
    r = evaluate_rhs(ell, grid, EXP, rho, u)
    eps = 1e-6
    rate = (mass(ell, grid, rho + eps * r.drho_dt, u + eps * r.du_dt)
            - mass(ell, grid, rho - eps * r.drho_dt, u - eps * r.du_dt)) / (2 * eps)
    assert abs(rate) <= 1e-7 * mass(ell, grid, rho, u)
