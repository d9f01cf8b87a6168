"""Run configuration: strict JSON parsing and validation.

A configuration document is a JSON object with the sections ``surface``,
``grid``, ``density``, ``initial``, ``integrator``, ``thresholds`` and
``output``.  Unknown keys anywhere are rejected.  Initial data are lists of
Fourier modes ``[k, amplitude, phase]`` meaning ``amplitude * cos(k . x + phase)``;
``k`` is an integer (curves) or a list of integers (surfaces).

Example::

    {
      "surface": {"kind": "unit_circle"},
      "grid": {"n": 128},
      "density": {"kind": "exponential"},
      "initial": {"rho0": [], "u0": {"offset": 1.0, "modes": [[1, 0.2, -1.5707963267948966]]}},
      "integrator": {"scheme": "rk4", "dt": 1e-4, "T": 0.05},
      "output": {"directory": "out", "snapshot_interval": 1e-3}
    }
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from . import density as density_mod
from . import surfaces
from .errors import ConfigError, InvalidParameter
from .grid import SCHEMES

INTEGRATORS = ("rk4", "splitting")
LINEARIZATIONS = ("current_frozen", "paper_frozen")


@dataclass
class SurfaceConfig:
    kind: str
    params: dict = field(default_factory=dict)


@dataclass
class GridConfig:
    n: int
    scheme: str = "spectral"


@dataclass
class DensityConfig:
    kind: str
    params: dict = field(default_factory=dict)
    certified_range: list | None = None


@dataclass
class InitialConfig:
    rho0: list = field(default_factory=list)
    u0_offset: float = 0.0
    u0_modes: list = field(default_factory=list)


@dataclass
class IntegratorConfig:
    scheme: str
    dt: float
    T: float
    tol: float = 1e-10
    max_iter: int = 25
    linearization: str = "current_frozen"
    freeze_concentration: bool = False


@dataclass
class ThresholdConfig:
    c1_smallness: float | None = None
    immersion_min: float = 1e-6
    a_min: float = 0.5


@dataclass
class OutputConfig:
    directory: str = "out"
    snapshot_interval: float | None = None


@dataclass
class RunConfig:
    surface: SurfaceConfig
    grid: GridConfig
    density: DensityConfig
    integrator: IntegratorConfig
    initial: InitialConfig = field(default_factory=InitialConfig)
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        d = asdict(self)
        init = d.pop("initial")
        d["initial"] = {"rho0": init["rho0"], "u0": {"offset": init["u0_offset"], "modes": init["u0_modes"]}}
        return d

    def build_surface(self):
        return surfaces.build_reference(self.surface.kind, self.surface.params)

    def build_density(self):
        return density_mod.EnergyDensity(self.density.kind, dict(self.density.params))

    def certified_range(self) -> tuple[float, float]:
        if self.density.certified_range is not None:
            lo, hi = self.density.certified_range
            return float(lo), float(hi)
        return self.build_density().default_range()


_SECTIONS = {
    "surface": ({"kind"}, {"params"}),
    "grid": ({"n"}, {"scheme"}),
    "density": ({"kind"}, {"params", "certified_range"}),
    "initial": (set(), {"rho0", "u0"}),
    "integrator": ({"scheme", "dt", "T"}, {"tol", "max_iter", "linearization", "freeze_concentration"}),
    "thresholds": (set(), {"c1_smallness", "immersion_min", "a_min"}),
    "output": (set(), {"directory", "snapshot_interval"}),
}
_REQUIRED_SECTIONS = {"surface", "grid", "density", "integrator"}


def _check_keys(obj, where, required, optional):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(obj) - required - optional)
    if unknown:
        raise ConfigError(f"unknown key {where + '.' if where else ''}{unknown[0]!r} (strict mode)")
    missing = sorted(required - set(obj))
    if missing:
        raise ConfigError(f"missing required key {where + '.' if where else ''}{missing[0]}")


def _number(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where} must be a finite number")
    return float(value)


def _modes(value, where, dim) -> list:
    if not isinstance(value, list):
        raise ConfigError(f"{where} must be a list of [k, amplitude, phase] entries")
    out = []
    for i, entry in enumerate(value):
        if not isinstance(entry, list) or len(entry) not in (2, 3):
            raise ConfigError(f"{where}[{i}] must be [k, amplitude] or [k, amplitude, phase]")
        k = entry[0] if isinstance(entry[0], list) else [entry[0]]
        if len(k) != dim or not all(isinstance(ki, int) and not isinstance(ki, bool) for ki in k):
            raise ConfigError(f"{where}[{i}] mode index must be {dim} integer(s)")
        amp = _number(entry[1], f"{where}[{i}] amplitude")
        phase = _number(entry[2], f"{where}[{i}] phase") if len(entry) == 3 else 0.0
        out.append([k, amp, phase])
    return out


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document.

    Raises
    ------
    ConfigError
        Malformed JSON (with line and column), unknown or missing keys, or a
        violated invariant such as ``grid.n must be even``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    _check_keys(doc, "", _REQUIRED_SECTIONS, set(_SECTIONS) - _REQUIRED_SECTIONS)
    for name, (req, opt) in _SECTIONS.items():
        if name in doc:
            _check_keys(doc[name], name, req, opt)

    s = doc["surface"]
    params = s.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("surface.params must be a JSON object")
    try:
        surface = surfaces.build_reference(s["kind"], params)
    except InvalidParameter as exc:
        raise ConfigError(f"surface: {exc}") from None

    g = doc["grid"]
    n = g["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise ConfigError("grid.n must be an integer")
    if n % 2:
        raise ConfigError("grid.n must be even")
    if n < 8:
        raise ConfigError("grid.n must be at least 8")
    scheme = g.get("scheme", "spectral")
    if scheme not in SCHEMES:
        raise ConfigError(f"grid.scheme must be one of {SCHEMES}")

    dens = doc["density"]
    dparams = dens.get("params", {})
    if not isinstance(dparams, dict):
        raise ConfigError("density.params must be a JSON object")
    try:
        energy_density = density_mod.EnergyDensity(dens["kind"], dparams)
    except InvalidParameter as exc:
        raise ConfigError(f"density: {exc}") from None
    crange = dens.get("certified_range")
    if crange is not None:
        if not isinstance(crange, list) or len(crange) != 2:
            raise ConfigError("density.certified_range must be [lo, hi]")
        crange = [_number(crange[0], "density.certified_range[0]"), _number(crange[1], "density.certified_range[1]")]
        if crange[0] > crange[1]:
            raise ConfigError("density.certified_range must satisfy lo <= hi")
    elif energy_density.default_range() is None:
        raise ConfigError("density.certified_range is required for user_polynomial")
    lo, hi = crange if crange is not None else energy_density.default_range()
    report = density_mod.check_admissible(energy_density, lo, hi)
    if not report.admissible:
        raise ConfigError(
            f"density inadmissible on [{lo}, {hi}]: min G'' = {report.min_d2G:.3e}, min g = {report.min_g:.3e}"
        )

    init = doc.get("initial", {})
    u0 = init.get("u0", {})
    if not isinstance(u0, dict):
        raise ConfigError("initial.u0 must be an object with 'offset' and 'modes'")
    _check_keys(u0, "initial.u0", set(), {"offset", "modes"})
    initial = InitialConfig(
        rho0=_modes(init.get("rho0", []), "initial.rho0", surface.dim),
        u0_offset=_number(u0.get("offset", 0.0), "initial.u0.offset"),
        u0_modes=_modes(u0.get("modes", []), "initial.u0.modes", surface.dim),
    )

    it = doc["integrator"]
    if it["scheme"] not in INTEGRATORS:
        raise ConfigError(f"integrator.scheme must be one of {INTEGRATORS}")
    dt = _number(it["dt"], "integrator.dt")
    T = _number(it["T"], "integrator.T")
    if dt <= 0:
        raise ConfigError("integrator.dt must be positive")
    if T < 0:
        raise ConfigError("integrator.T must be nonnegative")
    tol = _number(it.get("tol", 1e-10), "integrator.tol")
    max_iter = it.get("max_iter", 25)
    if isinstance(max_iter, bool) or not isinstance(max_iter, int) or max_iter < 1:
        raise ConfigError("integrator.max_iter must be a positive integer")
    lin = it.get("linearization", "current_frozen")
    if lin not in LINEARIZATIONS:
        raise ConfigError(f"integrator.linearization must be one of {LINEARIZATIONS}")
    freeze = it.get("freeze_concentration", False)
    if not isinstance(freeze, bool):
        raise ConfigError("integrator.freeze_concentration must be a boolean")

    th = doc.get("thresholds", {})
    c1 = th.get("c1_smallness")
    thresholds = ThresholdConfig(
        c1_smallness=None if c1 is None else _number(c1, "thresholds.c1_smallness"),
        immersion_min=_number(th.get("immersion_min", 1e-6), "thresholds.immersion_min"),
        a_min=_number(th.get("a_min", 0.5), "thresholds.a_min"),
    )

    out = doc.get("output", {})
    interval = out.get("snapshot_interval")
    if interval is not None:
        interval = _number(interval, "output.snapshot_interval")
        if interval <= 0:
            raise ConfigError("output.snapshot_interval must be positive")
    directory = out.get("directory", "out")
    if not isinstance(directory, str):
        raise ConfigError("output.directory must be a string")

    return RunConfig(
        surface=SurfaceConfig(surface.kind, dict(surface.params)),
        grid=GridConfig(n, scheme),
        density=DensityConfig(energy_density.kind, dict(dparams), crange),
        integrator=IntegratorConfig(it["scheme"], dt, T, tol, max_iter, lin, freeze),
        initial=initial,
        thresholds=thresholds,
        output=OutputConfig(directory, interval),
    )


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
