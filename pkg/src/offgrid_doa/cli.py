"""Command-line entry point: ``offgrid-doa {simulate,solve,bench,spectrum}``."""
import argparse
import json
import logging
import os
import sys

import numpy as np

from .config import DESK_SOLVER_DEFAULTS, SOLVERS, ConfigError, SolverSpec, desk_config, load_config
from .experiment import (
    _file_stem,
    dictionary_for,
    run_experiment,
    run_solver,
    scenario_for,
    spectrum_export,
    trace_export,
)
from .signal_sim import assemble_measurement, sample_covariance, simulate_snapshots, write_snapshots
from .solvers import SolverError

EXIT_OK = 0
EXIT_ABORTS = 1
EXIT_CONFIG = 2

log = logging.getLogger("offgrid_doa")


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI experiment config (default: built-in desk setup)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=_u64, metavar="U64", help="base seed override")
    common.add_argument("--snr", type=float, metavar="DB", help="run a single SNR (dB)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="offgrid-doa", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", parents=[common], help="simulate snapshots and the measurement")
    s = sub.add_parser("solve", parents=[common], help="one solver on one simulated measurement")
    s.add_argument("--solver", required=True, choices=sorted(SOLVERS))
    s = sub.add_parser("bench", parents=[common], help="Monte-Carlo sweep over SNR")
    s.add_argument("--solver", choices=sorted(SOLVERS), help="restrict the sweep to one solver")
    s.add_argument("--full", action="store_true", help="use full_trials instead of trials")
    s.add_argument("--strict", action="store_true", help="exit non-zero if any solver run aborted")
    s.add_argument("--workers", type=int, help="worker processes")
    s = sub.add_parser("spectrum", parents=[common], help="normalised spectra of the enabled solvers")
    s.add_argument("--solver", choices=sorted(SOLVERS), help="only this solver")
    return p


def _load(args):
    cfg = load_config(args.config) if args.config else desk_config()
    kw = {}
    if args.seed is not None:
        kw["base_seed"] = args.seed
    if args.snr is not None:
        kw["snr_list"] = (args.snr,)
    if getattr(args, "solver", None):
        try:
            spec = cfg.solver(args.solver)
        except KeyError:
            spec = SolverSpec(args.solver, dict(DESK_SOLVER_DEFAULTS[args.solver]))
        kw["solvers"] = (spec,)
    if getattr(args, "workers", None) is not None:
        kw["workers"] = args.workers
    return cfg.with_overrides(**kw) if kw else cfg


def _single_measurement(cfg):
    """Cell (SNR index 0, trial 0) of the sweep, so single runs match bench runs."""
    from .experiment import cell_seed

    seed = cell_seed(cfg, 0, 0)
    scen = scenario_for(cfg, cfg.snr_list[0], seed)
    snaps = simulate_snapshots(scen, cfg.geometry)
    return scen, snaps, assemble_measurement(sample_covariance(snaps))


def cmd_simulate(cfg, out):
    scen, snaps, meas = _single_measurement(cfg)
    write_snapshots(os.path.join(out, "snapshots.bin"), snaps)
    info = {
        "snr_db": cfg.snr_list[0], "seed": scen.seed, "sensors": cfg.geometry.M,
        "snapshots": scen.snapshots, "thetas": list(scen.true_thetas),
        "source_variances": list(scen.source_variances), "noise_floor": meas.noise_floor,
        "snapshot_file": "snapshots.bin (complex128 little-endian, column-major M x T)",
    }
    with open(os.path.join(out, "measurement.json"), "w", encoding="utf-8") as fh:
        json.dump(info, fh, indent=2)
    print(f"wrote {snaps.shape[1]} snapshots of {snaps.shape[0]} sensors to {out}")
    return EXIT_OK


def _solve_one(cfg, spec, meas, out, stem):
    result, est, spectrum, params = run_solver(spec, meas, cfg)
    if result is not None:
        trace_export(result, os.path.join(out, stem + "_trace.csv"))
    spectrum_export(cfg.grid.phi, spectrum, os.path.join(out, stem + "_spectrum.csv"))
    return result, est, params


def cmd_solve(cfg, out):
    spec = cfg.solvers[0]
    scen, _, meas = _single_measurement(cfg)
    stem = _file_stem(cfg.snr_list[0], 0, spec.name)
    try:
        result, est, params = _solve_one(cfg, spec, meas, out, stem)
    except SolverError as exc:
        print(f"{spec.name} aborted: {exc}", file=sys.stderr)
        return EXIT_ABORTS
    report = {
        "solver": spec.name, "snr_db": cfg.snr_list[0], "seed": scen.seed, "params": params,
        "thetas": est.thetas.tolist(), "betas": est.betas.tolist(), "powers": est.powers.tolist(),
        "iterations": None if result is None else result.iterations,
        "converged": None if result is None else result.converged,
    }
    with open(os.path.join(out, stem + ".json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    print(f"{spec.name}: theta = {np.array2string(est.thetas, precision=4)}")
    return EXIT_OK


def cmd_spectrum(cfg, out):
    _, _, meas = _single_measurement(cfg)
    status = EXIT_OK
    for spec in cfg.solvers:
        stem = _file_stem(cfg.snr_list[0], 0, spec.name)
        try:
            spectrum = run_solver(spec, meas, cfg)[2]
        except SolverError as exc:
            print(f"{spec.name} aborted: {exc}", file=sys.stderr)
            status = EXIT_ABORTS
            continue
        spectrum_export(cfg.grid.phi, spectrum, os.path.join(out, stem + "_spectrum.csv"))
        print(f"wrote {stem}_spectrum.csv")
    return status


def cmd_bench(cfg, out, full, strict):
    report = run_experiment(cfg, out, full=full)
    c = report["counts"]
    print(f"{c['successes']} runs ok, {c['aborts']} aborted; results in {out}")
    for row in report["summary"]:
        rmse = "n/a" if row["rmse"] is None else f"{row['rmse']:.4f}"
        print(f"  snr={row['snr_db']:g} dB  {row['solver']:8s} rmse={rmse}")
    if c["aborts"]:
        print(f"warning: {c['aborts']} solver runs aborted (see results.json)", file=sys.stderr)
        if strict:
            return EXIT_ABORTS
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    dictionary_for(cfg)
    if args.command == "simulate":
        return cmd_simulate(cfg, out)
    if args.command == "solve":
        return cmd_solve(cfg, out)
    if args.command == "spectrum":
        return cmd_spectrum(cfg, out)
    return cmd_bench(cfg, out, args.full, args.strict)


if __name__ == "__main__":
    sys.exit(main())
