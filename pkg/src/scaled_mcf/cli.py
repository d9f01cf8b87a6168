"""Command-line entry point.

Exit codes: 0 ok, 1 configuration/validation error, 2 run terminated before
reaching ``T``, 3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import load_config
from .errors import ConfigError
from .evolution import Model, run
from .io import emit_trajectory
from .oracles import circle_ode_oracle
from .verify import run_suites

EXIT_OK, EXIT_CONFIG, EXIT_TERMINATED, EXIT_VERIFY = 0, 1, 2, 3

def _out_dir(cfg, override):
    return Path(override) if override else Path(cfg.output.directory)


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([[v if isinstance(v, str) else repr(float(v)) for v in row] for row in rows])


def cmd_run(cfg, args) -> int:
    model = Model.from_config(cfg)
    traj = run(cfg, model=model)
    out = emit_trajectory(traj, cfg, _out_dir(cfg, args.out), grid=model.grid)
    print(f"steps: {traj.steps}  snapshots: {len(traj.snapshots)}  output: {out}")
    print("termination: " + "; ".join(traj.termination))
    return EXIT_OK if traj.completed else EXIT_TERMINATED


def cmd_verify(cfg, args) -> int:
    results = run_suites(cfg)
    width = max(len(r.suite) for r in results)
    nwidth = max(len(r.name) for r in results)
    for r in results:
        print(f"{r.suite:<{width}}  {r.name:<{nwidth}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def cmd_oracle(cfg, args) -> int:
    if cfg.surface.kind != "unit_circle":
        raise ConfigError("oracle comparison requires surface.kind = unit_circle")
    if any(k != [0] for k, _, _ in cfg.initial.u0_modes + cfg.initial.rho0):
        raise ConfigError("oracle comparison requires uniform initial data (only k = 0 modes)")
    model = Model.from_config(cfg)
    every = cfg.output.snapshot_interval or cfg.integrator.dt
    traj = run(replace(cfg, output=replace(cfg.output, snapshot_interval=every)), model=model)
    r0 = 1.0 + float(np.mean(traj.snapshots[0].state.rho))
    c0 = float(np.mean(traj.snapshots[0].state.u))
    orc = circle_ode_oracle(model.density, r0, c0, cfg.integrator.T, cfg.integrator.dt,
                            frozen_concentration=cfg.integrator.freeze_concentration)
    rows, err_r, err_c = [], 0.0, 0.0
    for snap in traj.snapshots:
        k = int(round(snap.state.t / cfg.integrator.dt))
        if k >= len(orc.t):
            break
        r_pde = 1.0 + float(np.mean(snap.state.rho))
        c_pde = float(np.mean(snap.state.u))
        er, ec = abs(r_pde - orc.r[k]), abs(c_pde - orc.c[k])
        err_r, err_c = max(err_r, er), max(err_c, ec)
        rows.append([snap.state.t, r_pde, orc.r[k], c_pde, orc.c[k], er, ec])
    path = _out_dir(cfg, args.out) / "oracle.csv"
    _write_csv(path, ["t", "r_pde", "r_oracle", "c_pde", "c_oracle", "err_r", "err_c"], rows)
    print(f"max |r_pde - r_oracle| = {err_r:.3e}")
    print(f"max |c_pde - c_oracle| = {err_c:.3e}")
    print(f"oracle invariant drift = {orc.invariant_drift:.3e} ({orc.reason})")
    print(f"written: {path}")
    return EXIT_OK if traj.completed else EXIT_TERMINATED


def _final(cfg):
    traj = run(replace(cfg, output=replace(cfg.output, snapshot_interval=None)))
    return traj, traj.snapshots[-1]


def _resample(f, n):
    """Spectral resampling of a periodic field onto ``n`` points per axis."""
    out = f
    for axis in range(f.ndim):
        coef = np.fft.rfft(out, axis=axis)
        m = out.shape[axis]
        keep = min(coef.shape[axis], n // 2 + 1)
        new = np.zeros(out.shape[:axis] + (n // 2 + 1,) + out.shape[axis + 1:], dtype=complex)
        sl = [slice(None)] * out.ndim
        sl[axis] = slice(0, keep)
        new[tuple(sl)] = coef[tuple(sl)]
        if n > m:
            # the coarse Nyquist mode becomes an ordinary mode on the fine grid
            sl[axis] = m // 2
            new[tuple(sl)] *= 0.5
        out = np.fft.irfft(new, n=n, axis=axis) * (n / m)
    return out


def cmd_convergence(cfg, args) -> int:
    out = _out_dir(cfg, args.out)
    status = EXIT_OK
    n0 = cfg.grid.n
    ns = [n for n in (n0 // 4, n0 // 2, n0) if n >= 8 and n % 2 == 0]
    finals = {}
    for n in ns:
        traj, snap = _final(replace(cfg, grid=replace(cfg.grid, n=n)))
        status = status if traj.completed else EXIT_TERMINATED
        finals[n] = snap
    ref = finals[ns[-1]]
    rows = []
    print("n sweep (errors against the finest grid)")
    print(f"{'n':>6} {'energy':>22} {'err_rho':>11} {'err_u':>11}")
    for n in ns:
        s = finals[n]
        er = float(np.max(np.abs(_resample(s.state.rho, ns[-1]) - ref.state.rho)))
        eu = float(np.max(np.abs(_resample(s.state.u, ns[-1]) - ref.state.u)))
        rows.append([str(n), s.diagnostics.energy, er, eu])
        print(f"{n:>6} {s.diagnostics.energy:>22.15e} {er:>11.3e} {eu:>11.3e}")
    _write_csv(out / "convergence_n.csv", ["n", "energy", "err_rho", "err_u"], rows)

    dt0 = cfg.integrator.dt
    dts = [dt0, dt0 / 2, dt0 / 4, dt0 / 8]
    finals = []
    for dt in dts:
        traj, snap = _final(replace(cfg, integrator=replace(cfg.integrator, dt=dt)))
        status = status if traj.completed else EXIT_TERMINATED
        finals.append(snap)
    ref = finals[-1]
    rows, prev = [], None
    print("dt sweep (errors against the smallest step)")
    print(f"{'dt':>11} {'max_err':>11} {'ratio':>8}")
    for dt, s in zip(dts[:-1], finals[:-1]):
        err = max(float(np.max(np.abs(s.state.rho - ref.state.rho))),
                  float(np.max(np.abs(s.state.u - ref.state.u))))
        ratio = prev / err if prev and err > 0 else float("nan")
        rows.append([dt, err, ratio])
        print(f"{dt:>11.3e} {err:>11.3e} {ratio:>8.2f}")
        prev = err
    _write_csv(out / "convergence_dt.csv", ["dt", "err", "ratio"], rows)
    return status


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "oracle": cmd_oracle, "convergence": cmd_convergence}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scaled-mcf", description="Height-function solver for "
                                     "scaled mean curvature flow coupled to surface diffusion.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "run": "integrate and write series.csv, fields_<k>.csv and run.json",
        "verify": "run the invariant suites and print a pass/fail table",
        "oracle": "compare a uniform circle run with the reduced ODE",
        "convergence": "grid and time-step sweep tables",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="JSON configuration file")
        if name != "verify":
            p.add_argument("--out", help="output directory (default: output.directory)")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; here 2 means early termination
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
