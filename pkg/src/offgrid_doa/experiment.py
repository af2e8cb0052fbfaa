"""Monte-Carlo sweeps over SNR: simulate, solve, extract DoAs, write reports."""
import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import _backend
from .array_model import build_dictionary
from .metrics import music_spectrum, recover_doas
from .prox import group_norms
from .signal_sim import Scenario, derive_seed, measure
from .solvers import (
    TRACE_COLUMNS,
    SolverError,
    eps_for,
    solve_aspg,
    solve_cadmm,
    solve_egt,
    solve_sdco,
    solve_sdco_continuation,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
TRACE_HEADER = ("iter",) + TRACE_COLUMNS
_RUNNERS = {
    "cadmm": solve_cadmm,
    "aspg-l1": solve_aspg,
    "aspg-l2": solve_aspg,
    "egt": solve_egt,
    "sdco": solve_sdco,
    "sdco-ct": solve_sdco_continuation,
}
_DICTIONARIES = {}


def default_eta(measurement, n_atoms, snapshots):
    """``sigma_n * sqrt(log N) / sqrt(T)`` with the estimated noise floor."""
    return math.sqrt(max(measurement.noise_floor, 0.0)) * math.sqrt(math.log(n_atoms)) / math.sqrt(snapshots)


def dictionary_for(config):
    """Dictionary for ``config``, built once per process."""
    key = (tuple(config.geometry.sensor_positions), config.grid.start, config.grid.spacing,
           config.grid.N, config.b_mode)
    if key not in _DICTIONARIES:
        _DICTIONARIES[key] = build_dictionary(config.geometry, config.grid, config.b_mode)
    return _DICTIONARIES[key]


def scenario_for(config, snr_db, seed):
    return Scenario.from_snr(config.thetas, snr_db, config.snapshots, seed, config.noise_variance)


def cell_seed(config, snr_index, trial):
    return derive_seed(config.base_seed, snr_index, trial)


def run_solver(spec, measurement, config, callback=None):
    """Run one enabled solver on one measurement.

    Returns ``(result, estimate, spectrum, params)``; ``result`` is ``None``
    for MUSIC. ``spectrum`` is the unnormalised per-atom power.
    """
    grid, K = config.grid, config.K
    if spec.name == "music":
        spectrum, est = music_spectrum(measurement.sample_cov, config.geometry, grid, K)
        return None, est, spectrum, {}
    eta = default_eta(measurement, grid.N, config.snapshots)
    eps = eps_for(measurement, config.snapshots)
    solver_cfg = spec.build(eta=eta, eps=eps)
    result = _RUNNERS[spec.name](measurement, dictionary_for(config), solver_cfg, callback=callback)
    est = recover_doas(result.x_hat, grid, K)
    params = {k: v for k, v in vars(solver_cfg).items() if isinstance(v, (int, float, str))}
    return result, est, group_norms(result.x_hat), params


def _num(v):
    """JSON-safe float (NaN and infinities become ``None``)."""
    v = float(v)
    return v if math.isfinite(v) else None


def _fmt(v):
    return repr(float(v))


def trace_export(result, path):
    """Write ``result``'s traces as CSV with the fixed header.

    One row per iteration; columns the solver does not produce are left
    empty. Values are written with ``repr`` so that ``read_trace`` gives
    back the exact floats.
    """
    traces = {} if result is None else result.traces
    n = 0 if result is None else int(result.iterations)
    for col in TRACE_COLUMNS:
        if col in traces and len(traces[col]) != n:
            raise ValueError(f"trace column {col!r} has {len(traces[col])} rows, expected {n}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for i in range(n):
            w.writerow([i + 1] + [_fmt(traces[c][i]) if c in traces else "" for c in TRACE_COLUMNS])


def read_trace(path):
    """Parse a trace CSV; returns ``{column: array}`` for non-empty columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != TRACE_HEADER:
        raise ValueError(f"{path}: unexpected header {rows[0] if rows else None}")
    body = rows[1:]
    out = {"iter": np.array([int(r[0]) for r in body], dtype=int)}
    for j, col in enumerate(TRACE_COLUMNS, start=1):
        vals = [r[j] for r in body]
        if body and all(v != "" for v in vals):
            out[col] = np.array([float(v) for v in vals])
    return out


def spectrum_export(angles, power, path):
    """Two-column CSV ``angle,power`` with power scaled to a peak of 1."""
    power = np.asarray(power, dtype=float)
    peak = float(np.max(power)) if power.size else 0.0
    norm = power / peak if peak > 0 else np.zeros_like(power)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("angle", "power"))
        for a, p in zip(angles, norm):
            w.writerow((_fmt(a), _fmt(p)))


def _file_stem(snr_db, trial, solver):
    return f"snr{snr_db:g}_trial{trial:03d}_{solver}"


def _run_cell(job):
    """All solvers on one ``(snr, trial)`` cell; returns one row per solver."""
    config, snr_index, snr_db, trial, out_dir = job
    seed = cell_seed(config, snr_index, trial)
    measurement = measure(scenario_for(config, snr_db, seed), config.geometry)
    keep_files = out_dir is not None and trial < config.trace_trials
    rows = []
    truth = np.sort(np.asarray(config.thetas))
    for spec in config.solvers:
        row = {"snr_db": snr_db, "trial": trial, "solver": spec.name, "seed": seed}
        t0 = time.perf_counter()
        try:
            result, est, spectrum, params = run_solver(spec, measurement, config)
        except (SolverError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
            row.update(status="aborted", error=f"{type(exc).__name__}: {exc}",
                       runtime_s=time.perf_counter() - t0)
            log.warning("snr=%g trial=%d %s aborted: %s", snr_db, trial, spec.name, exc)
            rows.append(row)
            continue
        err = np.sort(est.thetas) - truth
        row.update(
            status="ok", params=params, thetas=[float(t) for t in est.thetas],
            betas=[float(b) for b in est.betas], powers=[float(p) for p in est.powers],
            padded=bool(est.padded), sq_err=float(np.mean(err**2)),
            recon_err=float(np.linalg.norm(err) / np.linalg.norm(truth)),
            iterations=0 if result is None else int(result.iterations),
            converged=True if result is None else bool(result.converged),
            runtime_s=time.perf_counter() - t0,
        )
        if keep_files:
            stem = _file_stem(snr_db, trial, spec.name)
            if result is not None:
                trace_export(result, os.path.join(out_dir, "traces", stem + ".csv"))
            spectrum_export(config.grid.phi, spectrum, os.path.join(out_dir, "spectra", stem + ".csv"))
        rows.append(row)
    return rows


def summarize(rows, config, trials):
    """Per ``(snr, solver)`` RMSE and counts from cell rows."""
    out = []
    for snr in config.snr_list:
        for spec in config.solvers:
            sel = [r for r in rows if r["snr_db"] == snr and r["solver"] == spec.name]
            ok = [r for r in sel if r["status"] == "ok"]
            rmse = math.sqrt(math.fsum(r["sq_err"] for r in ok) / len(ok)) if ok else math.nan
            rec = math.fsum(r["recon_err"] for r in ok) / len(ok) if ok else math.nan
            iters = math.fsum(r["iterations"] for r in ok) / len(ok) if ok else math.nan
            out.append({
                "snr_db": snr, "solver": spec.name, "rmse": rmse, "reconstruction_error": rec,
                "successes": len(ok), "aborts": len(sel) - len(ok), "mean_iterations": iters,
            })
    return out


def write_rmse_csv(summary, config, path):
    names = [s.name for s in config.solvers]
    table = {(r["snr_db"], r["solver"]): r["rmse"] for r in summary}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["snr_db"] + names)
        for snr in config.snr_list:
            w.writerow([_fmt(snr)] + [_fmt(table[(snr, n)]) for n in names])


def config_record(config, trials):
    return {
        "thetas": list(config.thetas), "snr_db": list(config.snr_list), "trials": trials,
        "snapshots": config.snapshots, "noise_variance": config.noise_variance,
        "base_seed": config.base_seed, "sensors": config.geometry.M,
        "sensor_positions": [float(p) for p in config.geometry.sensor_positions],
        "grid": {"start": config.grid.start, "spacing": config.grid.spacing, "size": config.grid.N},
        "b_mode": config.b_mode,
        "eta_rule": "eta_scale * sqrt(noise_floor) * sqrt(log N) / sqrt(T)",
        "eps_rule": "eps_scale * trace(R) / sqrt(T)",
        "solvers": {s.name: dict(s.params, scale=s.scale) for s in config.solvers},
    }


def run_experiment(config, out_dir=None, full=False, workers=None):
    """Run the sweep and write the report files into ``out_dir``.

    Returns the summary dictionary that is also written to
    ``results.json``. ``full`` switches to ``config.full_trials``. Solver
    aborts are recorded per run and do not stop the sweep.
    """
    out_dir = config.output_dir if out_dir is None else out_dir
    trials = config.full_trials if full else config.trials
    workers = config.workers if workers is None else workers
    os.makedirs(os.path.join(out_dir, "traces"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "spectra"), exist_ok=True)
    jobs = [(config, i, snr, t, out_dir) for i, snr in enumerate(config.snr_list) for t in range(trials)]

    t0 = time.perf_counter()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell, jobs))
    else:
        cells = [_run_cell(job) for job in jobs]
    rows = [row for cell in cells for row in cell]
    order = {s.name: j for j, s in enumerate(config.solvers)}
    snr_pos = {snr: i for i, snr in enumerate(config.snr_list)}
    rows.sort(key=lambda r: (snr_pos[r["snr_db"]], r["trial"], order[r["solver"]]))

    summary = summarize(rows, config, trials)
    write_rmse_csv(summary, config, os.path.join(out_dir, "rmse.csv"))
    aborts = [r for r in rows if r["status"] != "ok"]
    expected = trials * len(config.solvers) * len(config.snr_list)
    report = {
        "schema_version": SCHEMA_VERSION,
        "backend": _backend.BACKEND,
        "config": config_record(config, trials),
        "summary": [{k: (_num(v) if isinstance(v, float) else v) for k, v in r.items()} for r in summary],
        "counts": {"expected": expected, "successes": len(rows) - len(aborts), "aborts": len(aborts)},
        "aborts": [{k: r[k] for k in ("snr_db", "trial", "solver", "seed", "error")} for r in aborts],
        "runs": [_json_row(r) for r in rows],
        "elapsed_s": time.perf_counter() - t0,
    }
    if report["counts"]["successes"] + report["counts"]["aborts"] != expected:
        raise RuntimeError("run bookkeeping does not reconcile")
    with open(os.path.join(out_dir, "results.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    return report


def _json_row(row):
    out = {}
    for k, v in row.items():
        if isinstance(v, float):
            out[k] = _num(v)
        elif isinstance(v, dict):
            out[k] = {kk: (_num(vv) if isinstance(vv, float) else vv) for kk, vv in v.items()}
        else:
            out[k] = v
    return out
