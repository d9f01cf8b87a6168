"""Height-function solver for scaled mean curvature flow coupled to surface diffusion."""
from .config import RunConfig, load_config, parse_config
from .density import EnergyDensity, check_admissible
from .errors import ConfigError, GeometryBreakdown, InvalidParameter, NoConvergence, RangeViolation
from .evolution import Model, State, Trajectory, initial_state, run, step_explicit, step_splitting
from .geometry import assemble_geometry, mean_curvature_div, mean_curvature_quasilinear
from .grid import Grid, fourier_modes
from .holder import HolderReport, holder_profile, holder_seminorm, spacetime_norms
from .io import emit_trajectory
from .oracles import circle_ode_oracle, ellipse_curvature_reference, scaled_mcf_radius
from .surfaces import ReferenceSurface, build_reference

__all__ = [
    "ConfigError", "EnergyDensity", "GeometryBreakdown", "Grid", "HolderReport", "InvalidParameter",
    "Model", "NoConvergence", "RangeViolation", "ReferenceSurface", "RunConfig", "State", "Trajectory",
    "assemble_geometry", "build_reference", "check_admissible", "circle_ode_oracle",
    "ellipse_curvature_reference", "emit_trajectory", "fourier_modes", "holder_profile",
    "holder_seminorm", "initial_state", "load_config", "mean_curvature_div",
    "mean_curvature_quasilinear", "parse_config", "run", "scaled_mcf_radius", "spacetime_norms",
    "step_explicit", "step_splitting",
]
