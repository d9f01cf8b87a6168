"""Result emission: per-snapshot series, field dumps and a JSON run record."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from .holder import holder_profile, spacetime_norms

SERIES_COLUMNS = (
    "t", "energy", "mass", "dissipation", "dE_dt_fd", "min_a", "immersion_margin",
    "ellipticity_margin", "max_abs_rho", "max_abs_u", "iters_h", "iters_c",
    "contraction_h", "contraction_c",
)


def _fmt(value) -> str:
    # repr of a Python float is the shortest round-trip decimal
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def centered_energy_rate(t, energy) -> np.ndarray:
    """Centered difference of ``energy`` on interior rows, ``nan`` at the ends."""
    t = np.asarray(t, dtype=float)
    energy = np.asarray(energy, dtype=float)
    rate = np.full(len(t), np.nan)
    if len(t) >= 3:
        rate[1:-1] = (energy[2:] - energy[:-2]) / (t[2:] - t[:-2])
    return rate


def series_rows(traj) -> list:
    t = traj.times
    rate = centered_energy_rate(t, traj.series("energy"))
    rows = []
    for k, snap in enumerate(traj.snapshots):
        d = snap.diagnostics
        row = [snap.state.t, d.energy, d.mass, d.dissipation, rate[k], d.min_a, d.immersion_margin,
               d.ellipticity_margin, d.max_abs_rho, d.max_abs_u, d.iters_h, d.iters_c,
               d.contraction_h, d.contraction_c]
        rows.append([_fmt(v) for v in row])
    return rows


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def holder_reports(traj, grid, alpha: float = 0.5, beta: float = 0.5, max_snapshots: int = 21) -> dict:
    """Spatial profiles of the final state and, with enough snapshots, space-time norms.

    The space-time norms compare all snapshot pairs, so they are evaluated on
    at most ``max_snapshots`` evenly spaced snapshots (first and last kept).
    """
    last = traj.snapshots[-1].state
    out = {}
    for name in ("rho", "u"):
        rep = holder_profile(grid, getattr(last, name), alpha)
        out[f"final_{name}"] = {"alpha": rep.alpha, "R": rep.R, "value": rep.value, "profile": rep.profile}
    if len(traj.snapshots) >= 3:
        idx = np.unique(np.linspace(0, len(traj.snapshots) - 1, max_snapshots).round().astype(int))
        thinned = SimpleNamespace(snapshots=[traj.snapshots[i] for i in idx])
        out["spacetime"] = spacetime_norms(thinned, grid, alpha, beta)
        out["spacetime"]["snapshots_used"] = len(idx)
    return out


def emit_trajectory(traj, config, directory, grid=None) -> Path:
    """Write ``series.csv``, ``fields_<k>.csv`` and ``run.json`` to ``directory``.

    Raises
    ------
    OSError
        The directory or a file cannot be written; the message names the path.
    """
    out = Path(directory)
    path = out
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = out / "series.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SERIES_COLUMNS)
            w.writerows(series_rows(traj))
        for k, snap in enumerate(traj.snapshots):
            path = out / f"fields_{k}.csv"
            _write_fields(path, snap, grid)
        record = {
            "config": config.to_dict() if hasattr(config, "to_dict") else config,
            "termination": traj.termination,
            "steps": traj.steps,
            "max_iters": traj.max_iters,
            "max_contraction": traj.max_contraction,
            "holder": holder_reports(traj, grid) if grid is not None else {},
        }
        path = out / "run.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(_json_safe(record), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return out


def _write_fields(path, snap, grid):
    st = snap.state
    dim = st.rho.ndim
    if grid is not None:
        coords = grid.coords
    else:
        n = st.rho.shape[0]
        x = 2 * np.pi * np.arange(n) / n
        coords = np.meshgrid(*([x] * dim), indexing="ij")
    cols = [np.ravel(c) for c in coords] + [np.ravel(a) for a in (st.rho, st.u, snap.H, snap.V)]
    header = [f"x{i + 1}" for i in range(dim)] + ["rho", "u", "H", "V"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
