"""Time integration of the coupled height/concentration system.

Two integrators are available:

``rk4``
    Classical explicit Runge-Kutta on the full coupled vector field.
``splitting``
    Per step, first the height equation with the concentration frozen at
    ``u_n``, then the concentration equation with the new height inserted.
    Each stage is a fixed-point iteration

        x^{k+1} = (I - dt A)^{-1} (x_n + dt (F(x^k) - A x^k))

    where ``A`` is a frozen linear operator: ``g(u*) a(rho*) P(rho*)`` for
    the height and ``G''(u*) Lap_{rho*} + g a H nu_ref . grad_{rho*} + g H^2``
    for the concentration.  The iteration's empirical contraction factor is
    recorded per step.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .config import RunConfig
from .density import EnergyDensity
from .errors import ConfigError, GeometryBreakdown, NoConvergence, RangeViolation
from .geometry import (
    MetricData,
    assemble_geometry,
    ellipticity_margin,
    immersion_margin,
    mean_curvature_div,
    mean_curvature_quasilinear,
)
from .grid import Grid, fourier_modes
from .surfaces import ReferenceSurface
from .system import diffusion_term, dissipation, energy, evaluate_rhs, mass

log = logging.getLogger(__name__)

# Ordering used when several termination conditions fire in the same step.
_SEVERITY = {"GeometryBreakdown": 0, "RangeViolation": 1, "NoConvergence": 2}


@dataclass(frozen=True)
class State:
    t: float
    rho: np.ndarray
    u: np.ndarray


@dataclass
class StepDiagnostics:
    energy: float
    mass: float
    dissipation: float
    immersion_margin: float
    ellipticity_margin: float
    min_a: float
    max_abs_rho: float
    max_abs_u: float
    iters_h: int = 0
    iters_c: int = 0
    contraction_h: float = float("nan")
    contraction_c: float = float("nan")


@dataclass
class Snapshot:
    state: State
    diagnostics: StepDiagnostics
    H: np.ndarray
    V: np.ndarray


@dataclass
class Trajectory:
    snapshots: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    termination: list = field(default_factory=lambda: ["completed"])
    steps: int = 0
    # maxima over every step, not only the recorded snapshots
    max_iters: dict = field(default_factory=lambda: {"h": 0, "c": 0})
    max_contraction: dict = field(default_factory=lambda: {"h": float("nan"), "c": float("nan")})

    @property
    def times(self) -> np.ndarray:
        return np.array([s.state.t for s in self.snapshots])

    @property
    def completed(self) -> bool:
        return self.termination == ["completed"]

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(s.diagnostics, name) for s in self.snapshots])


@dataclass
class Model:
    """Everything a step needs besides the state."""

    surface: ReferenceSurface
    grid: Grid
    density: EnergyDensity
    certified_range: tuple = (-np.inf, np.inf)
    freeze_concentration: bool = False
    c1_smallness: float = np.inf
    immersion_min: float = 0.0
    a_min: float = 0.5

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "Model":
        surface = cfg.build_surface()
        grid = Grid(surface.dim, cfg.grid.n, cfg.grid.scheme)
        c1 = cfg.thresholds.c1_smallness
        if c1 is None:
            c1 = 0.3 * surface.focal_scale(grid)
        return cls(
            surface=surface,
            grid=grid,
            density=cfg.build_density(),
            certified_range=cfg.certified_range(),
            freeze_concentration=cfg.integrator.freeze_concentration,
            c1_smallness=c1,
            immersion_min=cfg.thresholds.immersion_min,
            a_min=cfg.thresholds.a_min,
        )

    def rhs(self, rho, u):
        r = evaluate_rhs(self.surface, self.grid, self.density, rho, u)
        du = np.zeros_like(r.du_dt) if self.freeze_concentration else r.du_dt
        return r.drho_dt, du

    def check_range(self, u):
        lo, hi = self.certified_range
        if not np.all(np.isfinite(u)) or np.min(u) < lo or np.max(u) > hi:
            raise RangeViolation(
                f"concentration range [{np.min(u):.6g}, {np.max(u):.6g}] left certified interval [{lo}, {hi}]"
            )


def step_explicit(model: Model, state: State, dt: float) -> State:
    """One classical RK4 step."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    rho, u = state.rho, state.u
    k1 = model.rhs(rho, u)
    k2 = model.rhs(rho + 0.5 * dt * k1[0], u + 0.5 * dt * k1[1])
    k3 = model.rhs(rho + 0.5 * dt * k2[0], u + 0.5 * dt * k2[1])
    k4 = model.rhs(rho + dt * k3[0], u + dt * k3[1])
    rho_new = rho + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    u_new = u + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    return State(state.t + dt, rho_new, u_new)


@dataclass
class SplitStats:
    iters_h: int = 0
    iters_c: int = 0
    contraction_h: float = float("nan")
    contraction_c: float = float("nan")
    increments_h: list = field(default_factory=list)
    increments_c: list = field(default_factory=list)


def _contraction(increments, scale) -> float:
    # ratios whose denominator sits at rounding level carry no information
    floor = 1e3 * np.finfo(float).eps * max(scale, 1.0)
    ratios = [b / a for a, b in zip(increments[:-1], increments[1:]) if a > floor]
    return max(ratios) if ratios else float("nan")


def _fixed_point(x_n, dt, op, residual, tol, max_iter, what):
    """Iterate ``x <- (I - dt op)^{-1} (x_n + dt (residual(x) - op x))``."""
    lu = lu_factor(np.eye(op.shape[0]) - dt * op)
    shape = x_n.shape
    x = x_n.ravel()
    base = x_n.ravel()
    increments = []
    converged = False
    for _ in range(max_iter):
        rhs = base + dt * (residual(x.reshape(shape)).ravel() - op @ x)
        x_new = lu_solve(lu, rhs)
        inc = float(np.max(np.abs(x_new - x)))
        increments.append(inc)
        x = x_new
        if not np.all(np.isfinite(x)):
            break
        if inc < tol:
            converged = True
            break
    factor = _contraction(increments, float(np.max(np.abs(x_n))))
    if not converged:
        if not np.all(np.isfinite(x)) or not (factor < 1):
            raise NoConvergence(
                f"{what} iteration did not converge in {len(increments)} iterations (factor {factor:.3g})"
            )
        log.warning("%s iteration hit max_iter=%d with contraction factor %.3g", what, max_iter, factor)
    return x.reshape(shape), increments, factor


def height_operator(model: Model, rho_star, u_star) -> np.ndarray:
    """Dense matrix of ``g(u*) a(rho*) P(rho*)``."""
    qc = mean_curvature_quasilinear(model.surface, model.grid, rho_star)
    scale = (model.density.g(u_star) * qc.a_factor).ravel()
    return scale[:, None] * qc.matrix()


def laplace_matrix(geom: MetricData) -> np.ndarray:
    grid = geom.grid
    b = geom.laplace_first_order()
    op = np.zeros((grid.size, grid.size))
    for k in range(grid.dim):
        op += b[k].reshape(-1, 1) * grid.diff_matrix(k)
    for i in range(grid.dim):
        for j in range(grid.dim):
            op += geom.metric_inv[i, j].reshape(-1, 1) * grid.diff2_matrix(i, j)
    return op


def concentration_operator(model: Model, geom: MetricData, u_star) -> np.ndarray:
    """Dense matrix of the frozen concentration operator at ``(u*, geom)``."""
    grid, dens = model.grid, model.density
    H = mean_curvature_div(geom)
    g = dens.g(u_star)
    op = dens.d2G(u_star).reshape(-1, 1) * laplace_matrix(geom)
    e = geom.normal_gradient_coeffs()
    adv = (g * geom.a_factor * H).ravel()
    for k in range(grid.dim):
        op += (adv * e[k].ravel())[:, None] * grid.diff_matrix(k)
    op[np.diag_indices_from(op)] += (g * H ** 2).ravel()
    return op


def concentration_residual(model: Model, geom: MetricData):
    """``u -> d_t u`` right-hand side with the geometry held fixed."""
    grid, dens = model.grid, model.density
    H = mean_curvature_div(geom)
    e = geom.normal_gradient_coeffs()

    def residual(u):
        g = dens.g(u)
        transport = np.einsum("i...,i...->...", e, grid.gradient(u))
        return diffusion_term(geom, dens, u) + g * geom.a_factor * H * transport + g * H ** 2 * u

    return residual


def step_splitting(model: Model, state: State, dt: float, tol: float = 1e-10, max_iter: int = 25,
                   linearization: str = "current_frozen", u_ref=None) -> tuple[State, SplitStats]:
    """One splitting step: height solve with frozen ``u_n``, then concentration solve.

    ``linearization="paper_frozen"`` freezes the operators at ``(u_ref, 0)``
    (``u_ref`` is the run's initial concentration); ``"current_frozen"``
    freezes the height operator at ``(u_n, rho_n)`` and the concentration
    operator at ``(u_n, rho_{n+1})``.

    Raises
    ------
    NoConvergence
        An iteration reached ``max_iter`` without a contraction factor below one.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    rho_n, u_n = state.rho, state.u
    if linearization == "paper_frozen":
        if u_ref is None:
            raise ValueError("paper_frozen linearization needs the initial concentration u_ref")
        rho_star, u_star = np.zeros_like(rho_n), u_ref
    elif linearization == "current_frozen":
        rho_star, u_star = rho_n, u_n
    else:
        raise ValueError(f"unknown linearization {linearization!r}")
    stats = SplitStats()

    g_n = model.density.g(u_n)

    def height_residual(rho):
        geom = assemble_geometry(model.surface, model.grid, rho)
        return g_n * geom.a_factor * mean_curvature_div(geom)

    op_h = height_operator(model, rho_star, u_star)
    rho_new, inc, factor = _fixed_point(rho_n, dt, op_h, height_residual, tol, max_iter, "height")
    stats.iters_h, stats.increments_h = len(inc), inc
    stats.contraction_h = factor if len(inc) >= 2 else float("nan")

    if model.freeze_concentration:
        return State(state.t + dt, rho_new, u_n.copy()), stats

    geom_new = assemble_geometry(model.surface, model.grid, rho_new)
    geom_star = assemble_geometry(model.surface, model.grid, rho_star) if linearization == "paper_frozen" else geom_new
    op_c = concentration_operator(model, geom_star, u_star)
    u_new, inc, factor = _fixed_point(u_n, dt, op_c, concentration_residual(model, geom_new),
                                      tol, max_iter, "concentration")
    stats.iters_c, stats.increments_c = len(inc), inc
    stats.contraction_c = factor if len(inc) >= 2 else float("nan")
    return State(state.t + dt, rho_new, u_new), stats


def diagnose(model: Model, state: State) -> Snapshot:
    """Functionals and margins of a state; raises if the state is invalid."""
    surface, grid, dens = model.surface, model.grid, model.density
    geom = assemble_geometry(surface, grid, state.rho)
    r = evaluate_rhs(surface, grid, dens, state.rho, state.u, geom=geom)
    V = r.V
    qc = mean_curvature_quasilinear(surface, grid, state.rho)
    diag = StepDiagnostics(
        energy=energy(surface, grid, dens, state.rho, state.u, geom),
        mass=mass(surface, grid, state.rho, state.u, geom),
        dissipation=dissipation(surface, grid, dens, state.rho, state.u, V, geom),
        immersion_margin=immersion_margin(geom),
        ellipticity_margin=ellipticity_margin(qc),
        min_a=float(np.min(geom.a_factor)),
        max_abs_rho=float(np.max(np.abs(state.rho))),
        max_abs_u=float(np.max(np.abs(state.u))),
    )
    return Snapshot(state, diag, r.H, V)


def check_state(model: Model, state: State) -> tuple[list, Snapshot | None]:
    """Termination reasons triggered by ``state`` (empty if valid) and its snapshot."""
    reasons = []
    snap = None
    try:
        c1 = model.grid.c1_norm(state.rho)
        if not c1 < model.c1_smallness:
            raise GeometryBreakdown(f"||rho||_C1 = {c1:.4g} left the smallness ball {model.c1_smallness:.4g}")
        snap = diagnose(model, state)
    except GeometryBreakdown as exc:
        reasons.append(("GeometryBreakdown", str(exc)))
    try:
        model.check_range(state.u)
    except RangeViolation as exc:
        reasons.append(("RangeViolation", str(exc)))
    if snap is not None:
        d = snap.diagnostics
        if not d.min_a >= model.a_min:
            reasons.append(("AFactorBelowMin", f"min a(rho) = {d.min_a:.6g} < {model.a_min}"))
        if not d.immersion_margin >= model.immersion_min:
            reasons.append(("ImmersionMarginLow", f"immersion margin {d.immersion_margin:.3e}"))
        if not d.ellipticity_margin > 0:
            reasons.append(("EllipticityLost", f"min eig p_ij = {d.ellipticity_margin:.3e}"))
    return reasons, snap


def _format_reasons(reasons) -> list:
    ordered = sorted(reasons, key=lambda r: _SEVERITY.get(r[0], 3))
    return [f"{name}: {msg}" for name, msg in ordered]


def initial_state(cfg: RunConfig, grid: Grid) -> State:
    rho0 = fourier_modes(grid, cfg.initial.rho0)
    u0 = fourier_modes(grid, cfg.initial.u0_modes, cfg.initial.u0_offset)
    return State(0.0, rho0, u0)


def run(cfg: RunConfig, model: Model | None = None, state0: State | None = None) -> Trajectory:
    """Integrate from ``t = 0`` to ``T`` or until a termination condition fires.

    Raises
    ------
    ConfigError
        The initial state already violates a run threshold.
    """
    if model is None:
        model = Model.from_config(cfg)
    if state0 is None:
        state0 = initial_state(cfg, model.grid)
    it = cfg.integrator
    reasons, snap = check_state(model, state0)
    if reasons:
        raise ConfigError("initial state invalid: " + "; ".join(_format_reasons(reasons)))
    traj = Trajectory(snapshots=[snap], config=cfg.to_dict())

    dt, T = it.dt, it.T
    nsteps = int(math.ceil(T / dt - 1e-9)) if T > 0 else 0
    interval = cfg.output.snapshot_interval
    every = max(1, int(round(interval / dt))) if interval else 1
    state = state0
    last_stats = SplitStats()
    pending = None
    for k in range(1, nsteps + 1):
        t_next = min(k * dt, T)
        h = t_next - state.t
        try:
            if it.scheme == "rk4":
                new = step_explicit(model, state, h)
                last_stats = SplitStats()
            else:
                new, last_stats = step_splitting(model, state, h, it.tol, it.max_iter,
                                                 it.linearization, u_ref=state0.u)
            new = replace(new, t=t_next)
        except (GeometryBreakdown, RangeViolation, NoConvergence) as exc:
            traj.termination = _format_reasons([(type(exc).__name__, str(exc))])
            break
        reasons, snap = check_state(model, new)
        if reasons:
            traj.termination = _format_reasons(reasons)
            break
        state = new
        traj.steps = k
        for key in ("h", "c"):
            traj.max_iters[key] = max(traj.max_iters[key], getattr(last_stats, "iters_" + key))
            factor = getattr(last_stats, "contraction_" + key)
            if not np.isnan(factor):
                traj.max_contraction[key] = float(np.nanmax([traj.max_contraction[key], factor]))
        d = snap.diagnostics
        d.iters_h, d.iters_c = last_stats.iters_h, last_stats.iters_c
        d.contraction_h, d.contraction_c = last_stats.contraction_h, last_stats.contraction_c
        pending = snap
        if k % every == 0 or k == nsteps:
            traj.snapshots.append(snap)
            pending = None
    if not traj.completed and pending is not None:
        # keep the last valid state of a terminated run
        traj.snapshots.append(pending)
    return traj
