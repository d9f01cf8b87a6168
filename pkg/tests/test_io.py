import csv
import json

import numpy as np

from scaled_mcf.evolution import Model, run
from scaled_mcf.io import SERIES_COLUMNS, centered_energy_rate, emit_trajectory

from conftest import make_config


def read_series(path):
    with open(path / "series.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def emit(cfg, path):
    model = Model.from_config(cfg)
    traj = run(cfg, model=model)
    emit_trajectory(traj, cfg, path, grid=model.grid)
    return traj


def test_zero_step_run_has_one_row(tmp_path):
    emit(make_config(grid={"n": 32}, integrator={"T": 0.0}), tmp_path)
    header, data = read_series(tmp_path)
    assert tuple(header) == SERIES_COLUMNS
    assert data.shape == (1, len(SERIES_COLUMNS))
    fields = (tmp_path / "fields_0.csv").read_text().splitlines()
    assert fields[0] == "x1,rho,u,H,V" and len(fields) == 33
    record = json.loads((tmp_path / "run.json").read_text())
    assert record["termination"] == ["completed"] and record["config"]["grid"]["n"] == 32


def test_oracle_run_mass_column_constant(tmp_path):
    cfg = make_config(grid={"n": 32}, initial={"u0": {"offset": 1.0, "modes": []}},
                      integrator={"T": 0.02}, output={"snapshot_interval": 2e-3})
    emit(cfg, tmp_path)
    _, data = read_series(tmp_path)
    mass = data[:, SERIES_COLUMNS.index("mass")]
    assert np.max(np.abs(mass - mass[0])) / mass[0] <= 1e-6


def test_energy_law_from_files_alone(tmp_path):
    cfg = make_config(integrator={"T": 0.01})
    emit(cfg, tmp_path)
    _, data = read_series(tmp_path)
    rate = data[1:-1, SERIES_COLUMNS.index("dE_dt_fd")]
    diss = data[1:-1, SERIES_COLUMNS.index("dissipation")]
    assert np.all(np.abs(rate + diss) <= 1e-3 * diss)
    assert np.isnan(data[0, SERIES_COLUMNS.index("dE_dt_fd")])


def test_floats_round_trip_exactly(tmp_path):
    cfg = make_config(grid={"n": 32}, integrator={"T": 0.002}, output={"snapshot_interval": 1e-3})
    traj = emit(cfg, tmp_path)
    _, data = read_series(tmp_path)
    assert np.array_equal(data[:, SERIES_COLUMNS.index("energy")], traj.series("energy"))
    with open(tmp_path / "fields_2.csv", newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    assert np.array_equal(np.array([float(r[2]) for r in rows]), traj.snapshots[2].state.u)


def test_two_dimensional_fields_and_holder_block(tmp_path):
    cfg = make_config(surface={"kind": "torus"}, grid={"n": 8},
                      initial={"rho0": [[[1, 0], 0.01, 0.0]], "u0": {"offset": 1.0, "modes": []}},
                      integrator={"dt": 1e-3, "T": 0.003}, output={"snapshot_interval": 1e-3})
    emit(cfg, tmp_path)
    lines = (tmp_path / "fields_1.csv").read_text().splitlines()
    assert lines[0] == "x1,x2,rho,u,H,V" and len(lines) == 65
    holder = json.loads((tmp_path / "run.json").read_text())["holder"]
    assert holder["spacetime"]["E1_proxy"] >= 0
    assert holder["final_rho"]["profile"][0][0] == "inf"


def test_centered_rate():
    t = np.linspace(0, 1, 5)
    rate = centered_energy_rate(t, t ** 2)
    assert np.isnan(rate[0]) and np.isnan(rate[-1])
    assert np.allclose(rate[1:-1], 2 * t[1:-1])


def test_unwritable_directory_reports_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = make_config(grid={"n": 32}, integrator={"T": 0.0})
    try:
        emit(cfg, blocker / "sub")
    except OSError as exc:
        assert "sub" in str(exc)
    else:
        raise AssertionError("expected OSError")
