"""Command line interface: subcommands, exit codes, produced files."""

from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from fcrsched.cli import main
from fcrsched.solvers import SolveResult, parse_mps


def write_config(tmp_path, name="cfg.json", **overrides) -> str:
    base = dict(
        case_id="FCR_N",
        degradation_in_objective=False,
        days=[0],
        steps_per_hour=2,
        hours_per_day=2,
        solver="scipy",
        mip_gap=1e-9,
        relax_step_binaries=True,
        outdir=str(tmp_path / "out"),
    )
    base.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(base))
    return str(path)


# -- run -------------------------------------------------------------------------


def test_run_single_case(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", cfg, "--synthetic-seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "profit_eur_yr" in out
    assert "FCR_N" in out
    outdir = tmp_path / "out"
    assert (outdir / "meta.json").exists()
    assert (outdir / "FCR_N_nodeg" / "day_0000.json").exists()
    assert (outdir / "FCR_N_nodeg" / "horizon.json").exists()
    meta = json.loads((outdir / "meta.json").read_text())
    assert meta["synthetic_seed"] == 3
    assert meta["config"]["case_id"] == "FCR_N"


def test_run_case_and_mode_overrides(tmp_path):
    cfg = write_config(tmp_path, case_id="MULTI",
                       degradation_in_objective=True)
    rc = main(["run", "--config", cfg, "--synthetic-seed", "3",
               "--case", "WO_FCR", "--no-deg-objective"])
    assert rc == 0
    assert (tmp_path / "out" / "WO_FCR_nodeg" / "day_0000.json").exists()
    assert not (tmp_path / "out" / "MULTI_deg").exists()


def test_run_outdir_override(tmp_path):
    cfg = write_config(tmp_path)
    other = str(tmp_path / "elsewhere")
    assert main(["run", "--config", cfg, "--synthetic-seed", "3",
                 "--outdir", other]) == 0
    assert os.path.exists(os.path.join(other, "FCR_N_nodeg", "day_0000.json"))
    assert not (tmp_path / "out").exists()


def test_run_matrix_sweeps_everything(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", cfg, "--synthetic-seed", "3",
                 "--matrix"]) == 0
    out = capsys.readouterr().out
    assert "aging_delta_pct_yr" in out  # both modes present: delta table shows
    for case in ("WO_FCR", "FCR_N", "FCR_DU", "FCR_DD", "MULTI"):
        for mode in ("deg", "nodeg"):
            assert (tmp_path / "out" / f"{case}_{mode}"
                    / "day_0000.json").exists(), (case, mode)


def test_run_missing_config_is_data_error(tmp_path, capsys):
    rc = main(["run", "--config", str(tmp_path / "absent.json"),
               "--synthetic-seed", "1"])
    assert rc == 4
    assert "error:" in capsys.readouterr().err


def test_run_bad_json_is_config_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{this is not json")
    assert main(["run", "--config", str(path), "--synthetic-seed", "1"]) == 2
    assert "error:" in capsys.readouterr().err


def test_run_unknown_key_is_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path, typo_key=1)
    assert main(["run", "--config", cfg, "--synthetic-seed", "1"]) == 2
    assert "typo_key" in capsys.readouterr().err


def test_run_without_data_source_is_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", cfg]) == 2
    assert "no frequency_csv" in capsys.readouterr().err


def test_run_solver_failure_exit_code(tmp_path, capsys, monkeypatch):
    cfg = write_config(tmp_path)

    def hopeless(model, time_limit_s=600.0, mip_gap=1e-6):
        return SolveResult(status="Infeasible", x=None, objective=None,
                           gap=float("inf"), wall_time=0.0, backend="fake")

    monkeypatch.setattr("fcrsched.orchestrate.get_backend",
                        lambda name: hopeless)
    assert main(["run", "--config", cfg, "--synthetic-seed", "3"]) == 3
    err = capsys.readouterr().err
    assert "day 0" in err
    assert (tmp_path / "out" / "FCR_N_nodeg" / "failure.json").exists()


# -- report ----------------------------------------------------------------------


def test_report_roundtrip(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", cfg, "--synthetic-seed", "3"]) == 0
    capsys.readouterr()

    outdir = str(tmp_path / "out")
    assert main(["report", "--from", outdir]) == 0
    out = capsys.readouterr().out
    assert "profit_eur_yr" in out
    assert "report written:" in out
    report_dir = tmp_path / "out" / "report"
    for name in ("monetary.csv", "market_mix.csv", "bid_stats.csv",
                 "bid_histogram.csv", "days.csv", "manifest.json"):
        assert (report_dir / name).exists(), name


def test_report_without_run_is_data_error(tmp_path, capsys):
    os.makedirs(tmp_path / "empty")
    assert main(["report", "--from", str(tmp_path / "empty")]) == 4
    assert "meta.json" in capsys.readouterr().err


def test_report_with_meta_but_no_runs(tmp_path, capsys):
    cfg = write_config(tmp_path)
    outdir = tmp_path / "out"
    os.makedirs(outdir)
    (outdir / "meta.json").write_text(json.dumps(
        {"config": json.loads((tmp_path / "cfg.json").read_text()),
         "synthetic_seed": 1}))
    assert main(["report", "--from", str(outdir)]) == 4
    assert "no completed runs" in capsys.readouterr().err
    assert cfg  # config file itself was fine


# -- export-model ------------------------------------------------------------------


def test_export_model_default_mps(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["export-model", "--config", cfg, "--day", "0",
                 "--synthetic-seed", "3"]) == 0
    out = capsys.readouterr().out
    path = tmp_path / "out" / "day_0000.mps"
    assert path.exists()
    assert str(path) in out
    assert "variables" in out and "rows" in out
    assert "name map:" in out
    assert (tmp_path / "out" / "day_0000.mps.names.json").exists()
    model = parse_mps(str(path))  # exported file must parse back
    assert model.n_vars > 0


def test_export_model_lp_custom_path(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out_path = str(tmp_path / "models" / "toy.lp")
    assert main(["export-model", "--config", cfg, "--day", "0",
                 "--synthetic-seed", "3", "--format", "lp",
                 "--out", out_path]) == 0
    assert os.path.exists(out_path)
    text = open(out_path).read()
    assert text.startswith(("\\", "Maximize", "Minimize"))


def test_export_model_day_beyond_configured_horizon(tmp_path):
    cfg = write_config(tmp_path, days=[0])
    assert main(["export-model", "--config", cfg, "--day", "2",
                 "--synthetic-seed", "3"]) == 0
    assert (tmp_path / "out" / "day_0002.mps").exists()


def test_export_model_negative_day(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["export-model", "--config", cfg, "--day", "-1",
                 "--synthetic-seed", "3"]) == 2
    assert "--day" in capsys.readouterr().err


def test_export_model_deg_objective(tmp_path):
    cfg = write_config(tmp_path, degradation_in_objective=True)
    out_path = str(tmp_path / "deg.mps")
    assert main(["export-model", "--config", cfg, "--day", "0",
                 "--synthetic-seed", "3", "--out", out_path]) == 0
    model = parse_mps(out_path)
    assert any("z_cal" in name for name in model.var_names)


# -- installed entry point ----------------------------------------------------------


def test_console_script_help():
    proc = subprocess.run(["fcr-sched", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0
    for sub in ("run", "report", "export-model"):
        assert sub in proc.stdout


def test_module_invocation(tmp_path):
    cfg = write_config(tmp_path)
    proc = subprocess.run(
        [sys.executable, "-m", "fcrsched.cli", "run", "--config", cfg,
         "--synthetic-seed", "3"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "profit_eur_yr" in proc.stdout
