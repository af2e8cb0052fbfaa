import csv
import json

import numpy as np
import pytest

from offgrid_doa import experiment
from offgrid_doa.cli import main
from offgrid_doa.config import parse_config
from offgrid_doa.experiment import TRACE_HEADER, read_trace, run_experiment, spectrum_export, trace_export
from offgrid_doa.solvers import SolverError, SolverResult

TINY = """
[experiment]
thetas = -12.3, 16.1
snr_db = 0, 10
trials = 2
base_seed = 11
trace_trials = 1
solvers = {solvers}

[array]
sensors = 4

[grid]
start = -40
spacing = 5
size = 16

[cadmm]
max_iters = 300
[aspg-l1]
max_iters = 100
[aspg-l2]
max_iters = 100
[egt]
max_iters = 50
[sdco]
max_iters = 100
[sdco-ct]
max_iters = 30
rounds = 3
[music]
"""
def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


ALL = "cadmm, aspg-l1, aspg-l2, egt, sdco, sdco-ct, music"


def tiny(solvers=ALL, **kw):
    names = [s.strip() for s in solvers.split(",")]
    text = TINY.format(solvers=solvers)
    keep = []
    skip = False
    for line in text.splitlines():  # drop sections of solvers not enabled
        if line.startswith("["):
            name = line.strip("[]")
            skip = name not in names and name not in ("experiment", "array", "grid")
        if not skip:
            keep.append(line)
    cfg = parse_config("\n".join(keep))
    return cfg.with_overrides(**kw) if kw else cfg


def test_trace_export_header_only(tmp_path):
    p = tmp_path / "t.csv"
    trace_export(None, p)
    assert p.read_text().splitlines() == [",".join(TRACE_HEADER)]
    assert TRACE_HEADER == ("iter", "objective", "residual_primal", "residual_dual", "gap", "mu1", "mu2", "step")


def test_trace_export_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    traces = {"objective": rng.normal(size=5) * 1e3, "step": rng.random(5) / 3, "gap": np.full(5, np.pi)}
    res = SolverResult(np.zeros(4), 5, True, traces)
    p = tmp_path / "t.csv"
    trace_export(res, p)
    lines = p.read_text().splitlines()
    assert len(lines) == 6
    assert lines[1].split(",")[2] == ""  # residual_primal absent
    back = read_trace(p)
    np.testing.assert_array_equal(back["iter"], np.arange(1, 6))
    for k, v in traces.items():
        np.testing.assert_array_equal(back[k], v)
    assert set(back) == {"iter", *traces}


def test_trace_export_rejects_ragged(tmp_path):
    res = SolverResult(np.zeros(2), 3, True, {"objective": np.zeros(2)})
    with pytest.raises(ValueError):
        trace_export(res, tmp_path / "t.csv")


def test_spectrum_export(tmp_path):
    p = tmp_path / "s.csv"
    spectrum_export([-1.0, 0.0, 1.0], [1.0, 4.0, 2.0], p)
    rows = read_csv(p)
    assert rows[0] == ["angle", "power"]
    assert [float(r[1]) for r in rows[1:]] == [0.25, 1.0, 0.5]


def test_smallest_run(tmp_path):
    cfg = tiny("cadmm", snr_list=(0.0,), trials=1)
    report = run_experiment(cfg, tmp_path)
    assert report["schema_version"] == experiment.SCHEMA_VERSION
    assert len(list((tmp_path / "traces").iterdir())) == 1
    rows = read_csv(tmp_path / "rmse.csv")
    assert rows[0] == ["snr_db", "cadmm"] and len(rows) == 2


def test_full_sweep_outputs(tmp_path):
    cfg = tiny()
    report = run_experiment(cfg, tmp_path)
    c = report["counts"]
    assert c["expected"] == 2 * 7 * 2 == c["successes"] + c["aborts"]
    rows = read_csv(tmp_path / "rmse.csv")
    assert len(rows) == 3 and all(len(r) == 8 for r in rows)
    # traces for trial 0 only, none for MUSIC; spectra for everything
    assert len(list((tmp_path / "traces").iterdir())) == 2 * 6
    assert len(list((tmp_path / "spectra").iterdir())) == 2 * 7
    data = json.loads((tmp_path / "results.json").read_text())
    assert data["config"]["trials"] == 2 and len(data["runs"]) == 28
    for f in (tmp_path / "traces").iterdir():
        read_trace(f)


def test_aborts_are_recorded(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise SolverError("synthetic failure")

    monkeypatch.setitem(experiment._RUNNERS, "egt", boom)
    report = run_experiment(tiny("cadmm, egt"), tmp_path)
    assert report["counts"]["aborts"] == 4 and report["counts"]["successes"] == 4
    assert all("synthetic failure" in a["error"] for a in report["aborts"])
    rows = read_csv(tmp_path / "rmse.csv")
    assert rows[1][2] == "nan"


def test_determinism_and_workers(tmp_path):
    cfg = tiny("cadmm, aspg-l1, music")
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    run_experiment(cfg, tmp_path / "c", workers=2)
    for name in ["rmse.csv", "traces/snr0_trial000_cadmm.csv", "spectra/snr10_trial000_music.csv"]:
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes() == (tmp_path / "c" / name).read_bytes()
    other = run_experiment(cfg.with_overrides(base_seed=12), tmp_path / "d")
    assert (tmp_path / "d" / "rmse.csv").read_bytes() != (tmp_path / "a" / "rmse.csv").read_bytes()
    assert other["counts"]["aborts"] == 0


# ---------------------------------------------------------------- CLI

@pytest.fixture
def tiny_ini(tmp_path):
    p = tmp_path / "tiny.ini"
    p.write_text(TINY.format(solvers=ALL), encoding="utf-8")
    return p


def test_cli_bad_config_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.ini"
    p.write_text("[experiment]\nsolvers = nope\n[nope]\n")
    assert main(["bench", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_bench(tiny_ini, tmp_path):
    out = tmp_path / "o"
    assert main(["bench", "--config", str(tiny_ini), "--out", str(out), "--solver", "cadmm", "--snr", "0"]) == 0
    rows = read_csv(out / "rmse.csv")
    assert rows == [["snr_db", "cadmm"], rows[1]] and rows[1][0] == "0.0"


def test_cli_strict_with_aborts(tiny_ini, tmp_path, monkeypatch):
    monkeypatch.setitem(experiment._RUNNERS, "cadmm", lambda *a, **k: (_ for _ in ()).throw(SolverError("x")))
    args = ["bench", "--config", str(tiny_ini), "--solver", "cadmm", "--snr", "0"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--strict"]) == 1


def test_cli_simulate(tiny_ini, tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(tiny_ini), "--out", str(out), "--seed", "3"]) == 0
    info = json.loads((out / "measurement.json").read_text())
    assert info["sensors"] == 4 and info["snapshots"] == 100
    from offgrid_doa.signal_sim import read_snapshots

    assert read_snapshots(out / "snapshots.bin", 4).shape == (4, 100)


def test_cli_solve_and_spectrum(tiny_ini, tmp_path):
    out = tmp_path / "solve"
    assert main(["solve", "--config", str(tiny_ini), "--out", str(out), "--solver", "egt", "--snr", "10"]) == 0
    assert read_trace(out / "snr10_trial000_egt_trace.csv")["gap"].size == 50
    assert json.loads((out / "snr10_trial000_egt.json").read_text())["solver"] == "egt"
    out = tmp_path / "spec"
    assert main(["spectrum", "--config", str(tiny_ini), "--out", str(out)]) == 0
    assert len(list(out.iterdir())) == 7
