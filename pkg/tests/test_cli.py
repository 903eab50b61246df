import csv
import json

import numpy as np
import pytest

from amploc.cli import main


def test_sample_command(tmp_path, capsys):
    traj = tmp_path / "traj.csv"
    rc = main(["sample", "--prior", "rademacher", "--N", "40", "--alpha", "0.8",
               "--delta", "0.01", "--T", "5", "--step", "0.1", "--K", "5",
               "--seed", "1", "--trajectory-out", str(traj)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "algorithm_mse=" in out
    rows = list(csv.DictReader(open(traj)))
    assert len(rows) == 51
    assert rows[0]["coord_0"] == ""
    float(rows[1]["coord_0"])   # parses as a number


def test_sample_with_config(tmp_path, capsys):
    cfg = {"prior": {"kind": "gaussian", "mean": 0, "var": 1},
           "N": 24, "alpha": 2.0, "delta": 0.05, "seed": 2}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    rc = main(["sample", "--config", str(path), "--T", "2", "--step", "0.2",
               "--K", "3"])
    assert rc == 0
    assert "N=24 M=48" in capsys.readouterr().out


def test_se_command(capsys):
    rc = main(["se", "--prior", "gaussian", "--alpha", "2", "--delta", "0.01",
               "--K", "60"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "unique=True" in out
    assert "0.00980578" in out


def test_phase_diagram_command(tmp_path, capsys):
    rc = main(["phase-diagram", "--prior", "rademacher",
               "--alpha-grid", "0.5", "--delta-grid", "0.01,0.04",
               "--t-grid", "0:1:2", "--out-dir", str(tmp_path),
               "--out", "pd.csv"])
    assert rc == 0
    rows = list(csv.DictReader(open(tmp_path / "pd.csv")))
    assert len(rows) == 4
    assert {r["unique"] for r in rows} == {"true", "false"}


def test_oracle_check_command(tmp_path, capsys):
    rc = main(["oracle-check", "--prior", "rademacher", "--N", "8",
               "--alpha", "0.8", "--delta", "0.005", "--t", "5.0",
               "--K", "100", "--seed", "0", "--nishimori-instances", "30",
               "--out-dir", str(tmp_path), "--out", "report.json"])
    assert rc == 0
    report = json.load(open(tmp_path / "report.json"))
    for key in ("amp_vs_oracle_l2", "sandwich_lhs", "lambda_m",
                "sandwich_rhs", "nishimori_gap"):
        assert key in report
    assert report["amp_vs_oracle_l2"] < 1e-6   # strong localization pins AMP
    assert report["sandwich_lhs"] <= report["lambda_m"] + 1e-9
    assert report["lambda_m"] <= report["sandwich_rhs"] + 1e-9


def test_bench_command(tmp_path, capsys):
    cfg = {"prior": {"kind": "gaussian", "mean": 0, "var": 1},
           "N": [10], "alpha": 2.0, "delta": 0.05,
           "sampler": {"T": 1.0, "step": 0.2, "K": 2},
           "n_trials": 2, "seed": 3, "dps_steps": 50}
    path = tmp_path / "bench.json"
    path.write_text(json.dumps(cfg))
    rc = main(["bench", "--config", str(path), "--baseline", "dps",
               "--out-dir", str(tmp_path / "out")])
    assert rc == 0
    rows = list(csv.DictReader(open(tmp_path / "out" / "results.csv")))
    assert len(rows) == 2
    assert float(rows[0]["dps_mse"]) > 0
    out = capsys.readouterr().out
    assert "dps_mse=" in out


def test_unknown_prior_rejected():
    with pytest.raises(SystemExit):
        main(["se", "--prior", "cauchy", "--alpha", "1", "--delta", "0.1"])
