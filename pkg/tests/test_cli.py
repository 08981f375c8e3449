from __future__ import annotations

import csv
import io
import json

import pytest

from qlap.cli import UsageError, main, worker_count


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_regime_json(capsys):
    code, out, _ = run(capsys, "regime", "--N", "1", "--q", "3", "--p", "7.5")
    rec = json.loads(out)
    assert code == 0
    assert rec["regime"] == "Intermediate"
    assert rec["exponents"]["p2"] == 6.0 and rec["exponents"]["two_star"] == "unbounded"


def test_regime_csv(capsys):
    code, out, _ = run(capsys, "regime", "--N", "5", "--q", "4", "--p", "4", "--format", "csv")
    rows = dict(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows["zero_mass_eligible"] == "True"
    assert rows["liouville"] == "NotCertified"


def test_invalid_parameters_exit_2(capsys):
    code, _, err = run(capsys, "regime", "--N", "1", "--q", "2", "--p", "4")
    assert code == 2 and "q must exceed 2" in err


def test_missing_required_option(capsys):
    code, _, err = run(capsys, "minimize", "--N", "1", "--q", "3", "--p", "4.5", "--alpha", "50")
    assert code == 2 and "m" in err


def test_minimize_writes_outputs_and_config_reproduces(capsys, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    code, stdout1, _ = run(capsys, "minimize", "--N", "1", "--q", "3", "--p", "4.5", "--alpha", "50",
                           "--m", "1", "--out", str(out1))
    assert code == 0
    assert json.loads(stdout1)["status"] == "Converged"
    for name in ("config.ini", "minimize.json", "profile.csv", "energy_report.json"):
        assert (out1 / name).exists()
    code, stdout2, _ = run(capsys, "minimize", "--config", str(out1 / "config.ini"), "--out", str(out2))
    assert code == 0 and stdout2 == stdout1
    assert (out1 / "profile.csv").read_text() == (out2 / "profile.csv").read_text()


def test_vanishing_exit_3(capsys):
    code, out, _ = run(capsys, "minimize", "--N", "1", "--q", "3", "--p", "7.5", "--alpha", "1e-4",
                       "--m", "1")
    assert code == 3 and json.loads(out)["status"] == "VanishingInfimum"


def test_unknown_ini_key_rejected(capsys, tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[params]\nN = 1\nq = 3\np = 4.5\nbogus = 1\n")
    code, _, err = run(capsys, "regime", "--config", str(ini))
    assert code == 2 and "bogus" in err


def test_flags_override_config(capsys, tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[params]\nN = 1\nq = 3\np = 4.5\n")
    code, out, _ = run(capsys, "regime", "--config", str(ini), "--p", "7.5")
    assert code == 0 and json.loads(out)["regime"] == "Intermediate"


def test_alpha0_outside_window_exit_2(capsys):
    code, _, err = run(capsys, "alpha0", "--N", "1", "--q", "3", "--p", "4.5")
    assert code == 2 and "Subcritical" in err


def test_shoot_trajectory(capsys, tmp_path):
    code, out, _ = run(capsys, "shoot", "--N", "1", "--q", "3", "--p", "4.5", "--lambda", "1",
                       "--u0", "2", "--horizon", "20", "--out", str(tmp_path))
    rec = json.loads(out)
    assert code == 0 and rec["classification"] == "Crossing"
    assert (tmp_path / "trajectory.csv").read_text().startswith("r,u,du,F\n")


def test_zero_mass_without_solution_exit_4(capsys):
    code, out, _ = run(capsys, "zero-mass", "--N", "3", "--q", "3", "--p", "4")
    rec = json.loads(out)
    assert code == 4 and rec["found"] is False and rec["liouville"] == "Pohozaev"


def test_scan_parallel_matches_serial(capsys, monkeypatch):
    argv = ["scan", "--N", "1", "--q", "3", "--p", "4.5", "--alpha", "50", "--vary", "m",
            "--from", "0.5", "--to", "2", "--steps", "4"]
    monkeypatch.setenv("QLAP_THREADS", "1")
    code1, serial, _ = run(capsys, *argv)
    monkeypatch.setenv("QLAP_THREADS", "2")
    code2, parallel, _ = run(capsys, *argv)
    assert code1 == code2 == 0
    assert serial == parallel
    rows = list(csv.DictReader(io.StringIO(serial)))
    energies = [float(r["energy"]) for r in rows]
    assert all(b <= a for a, b in zip(energies, energies[1:]))


def test_worker_count_validation(monkeypatch):
    monkeypatch.setenv("QLAP_THREADS", "0")
    with pytest.raises(UsageError):
        worker_count()
    monkeypatch.setenv("QLAP_THREADS", "3")
    assert worker_count() == 3


def test_verify_quick(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--quick", "--out", str(tmp_path))
    assert code == 0
    assert all(line.startswith("PASS") for line in out.splitlines())
    assert len(json.loads((tmp_path / "verify.json").read_text())) == len(out.splitlines())
