import json

import pytest

from scaled_mcf.config import load_config, parse_config
from scaled_mcf.errors import ConfigError

from conftest import ENERGY_RUN, merge

MINIMAL = {
    "surface": {"kind": "unit_circle"},
    "grid": {"n": 64},
    "density": {"kind": "exponential"},
    "initial": {"rho0": [], "u0": {"offset": 0.0, "modes": []}},
    "integrator": {"scheme": "rk4", "dt": 1e-3, "T": 0.01},
}


def parse(doc):
    return parse_config(json.dumps(doc))


def test_minimal_document_accepted():
    cfg = parse(MINIMAL)
    assert cfg.grid.n == 64 and cfg.integrator.scheme == "rk4"
    assert cfg.thresholds.a_min == 0.5
    assert cfg.integrator.tol == 1e-10 and cfg.integrator.max_iter == 25
    assert cfg.integrator.linearization == "current_frozen"


def test_odd_grid_rejected():
    with pytest.raises(ConfigError, match="grid.n must be even"):
        parse(merge(MINIMAL, grid={"n": 63}))


def test_unknown_key_is_strict_error():
    doc = dict(MINIMAL, mesh={"n": 3})
    with pytest.raises(ConfigError, match="unknown key 'mesh'.*strict"):
        parse(doc)
    with pytest.raises(ConfigError, match="grid.*resolution"):
        parse(merge(MINIMAL, grid={"resolution": 3}))


def test_json_error_has_position():
    with pytest.raises(ConfigError, match="line 2, column"):
        parse_config('{"surface":\n  ,}')


@pytest.mark.parametrize(
    "section, values, match",
    [
        ("grid", {"n": 6}, "at least 8"),
        ("grid", {"scheme": "chebyshev"}, "grid.scheme"),
        ("integrator", {"dt": 0.0}, "dt must be positive"),
        ("integrator", {"T": -1.0}, "T must be nonnegative"),
        ("integrator", {"scheme": "euler"}, "integrator.scheme"),
        ("integrator", {"linearization": "midpoint"}, "linearization"),
        ("surface", {"kind": "sphere"}, "unknown surface kind"),
        ("density", {"kind": "shifted_quadratic", "params": {"a0": 1, "a2": 1}, "certified_range": [0, 1.1]},
         "inadmissible"),
        ("density", {"kind": "user_polynomial", "params": {"coeffs": [1, 0, 1]}}, "certified_range is required"),
    ],
)
def test_validation_errors(section, values, match):
    with pytest.raises(ConfigError, match=match):
        parse(merge(MINIMAL, **{section: values}))


def test_missing_required_key():
    doc = merge(MINIMAL)
    del doc["integrator"]["dt"]
    with pytest.raises(ConfigError, match="integrator.dt"):
        parse(doc)


def test_modes_and_round_trip(tmp_path):
    cfg = parse(merge(ENERGY_RUN, initial={"rho0": [[2, 0.01]]}))
    assert cfg.initial.rho0 == [[[2], 0.01, 0.0]]
    assert cfg.initial.u0_modes[0][0] == [1]
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert load_config(path) == cfg


def test_torus_modes_need_two_indices():
    doc = merge(MINIMAL, surface={"kind": "torus"}, grid={"n": 16}, initial={"rho0": [[1, 0.01, 0.0]]})
    with pytest.raises(ConfigError, match="2 integer"):
        parse(doc)
    doc["initial"]["rho0"] = [[[1, 0], 0.01, 0.0]]
    assert parse(doc).initial.rho0 == [[[1, 0], 0.01, 0.0]]
