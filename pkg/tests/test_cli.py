import json

import numpy as np
import pytest

from nucleongs.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main


def run(args, tmp_path):
    return main(["--out", str(tmp_path)] + args)


def test_constants_writes_report(tmp_path, capsys):
    assert run(["constants"], tmp_path) == EXIT_OK
    report = json.loads((tmp_path / "constants.json").read_text())
    assert report["two_over_S2"] == pytest.approx(10.9558081790626637, rel=1e-15)
    assert report["abar"] == pytest.approx(48.0631987066022, rel=1e-12)
    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert json.loads(line)["S"] == pytest.approx(0.427260542862527, rel=1e-12)


def test_minimize_outputs(tmp_path):
    assert run(["minimize", "--a", "50", "--rmax", "12", "--n", "512"],
               tmp_path) == EXIT_OK
    payload = json.loads((tmp_path / "minimize.json").read_text())
    assert payload["converged"] is True
    assert payload["energy"]["total"] < 0
    assert (tmp_path / "minimize_profile.csv").exists()
    history = (tmp_path / "minimize_history.csv").read_text().splitlines()
    assert history[0] == "iter,energy,residual,step"
    assert len(history) > 10


def test_minimize_validation_error(tmp_path):
    assert run(["minimize", "--a", "-3"], tmp_path) == EXIT_VALIDATION
    assert run(["minimize", "--a", "50", "--n", "2"], tmp_path) == EXIT_VALIDATION


def test_shoot_outputs_and_failure(tmp_path):
    assert run(["shoot", "--a", "8", "--b", "1"], tmp_path) == EXIT_OK
    payload = json.loads((tmp_path / "shoot.json").read_text())
    assert payload["classification"] == "ground-candidate"
    assert 0 < payload["g0"] < 1
    assert (tmp_path / "shoot_trajectory.csv").exists()
    # a - 2b < 0: no decaying solution exists
    assert run(["shoot", "--a", "8", "--b", "5"], tmp_path) == EXIT_NUMERICAL


def test_scan_csv(tmp_path):
    assert run(["scan", "--a-from", "20", "--a-to", "60", "--steps", "3",
                "--rmax", "12", "--n", "256"], tmp_path) == EXIT_OK
    rows = (tmp_path / "scan.csv").read_text().splitlines()
    assert rows[0] == "a,i_estimate,b,converged,regime"
    assert len(rows) == 4
    i_estimates = [float(r.split(",")[1]) for r in rows[1:]]
    assert i_estimates[-1] < i_estimates[0]      # deeper well at larger a


def test_unbounded_demo(tmp_path):
    assert run(["unbounded-demo", "--n-list", "4,8"], tmp_path) == EXIT_OK
    payload = json.loads((tmp_path / "unbounded_demo.json").read_text())
    assert payload["F"][1] < payload["F"][0] < 0


def test_diagnose_roundtrip(tmp_path):
    assert run(["minimize", "--a", "50", "--rmax", "12", "--n", "256"],
               tmp_path) == EXIT_OK
    assert run(["diagnose", "--profile",
                str(tmp_path / "minimize_profile.csv")], tmp_path) == EXIT_OK
    payload = json.loads((tmp_path / "diagnose.json").read_text())
    assert payload["mass"] == pytest.approx(1.0, abs=1e-8)
    assert payload["concentration_radius"] is not None


def test_diagnose_missing_profile(tmp_path):
    assert run(["diagnose", "--profile", str(tmp_path / "nope.csv")],
               tmp_path) == EXIT_VALIDATION


def test_config_file_roundtrip(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("a = 50  # coupling\nn = 256\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path),
                 "minimize", "--a", "50", "--rmax", "12", "--n", "256"]) == EXIT_OK
    bad = tmp_path / "bad.cfg"
    bad.write_text("coupling = 50\n")
    assert main(["--config", str(bad), "--out", str(tmp_path),
                 "constants"]) == EXIT_VALIDATION


def test_outdir_environment_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("NUCLEONGS_OUTDIR", str(tmp_path / "envout"))
    assert main(["constants"]) == EXIT_OK
    assert (tmp_path / "envout" / "constants.json").exists()


def test_json_floats_roundtrip(tmp_path):
    assert run(["constants"], tmp_path) == EXIT_OK
    report = json.loads((tmp_path / "constants.json").read_text())
    # 17 significant digits: values survive a write/read cycle bit-exactly
    assert report["two_over_S2"] == float(f"{report['two_over_S2']:.17g}")
