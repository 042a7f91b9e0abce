import csv
import json

import numpy as np
import pytest

from tauberweyl.cli import main

TORUS = ["--manifold", "torus", "--basis", "1,0;0,1"]
TORUS_2PI = ["--manifold", "torus", "--basis", "6.283185307179586,0;0,6.283185307179586"]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_spectrum_files(tmp_path):
    assert main(["spectrum", *TORUS, "--sigma-max", "100", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "spectrum.csv")
    assert float(rows[0]["sigma"]) == 0 and int(rows[0]["multiplicity"]) == 1
    assert int(rows[1]["multiplicity"]) == 4
    lengths = [float(r["length"]) for r in read_csv(tmp_path / "lengths.csv")]
    assert lengths[:2] == [1.0, pytest.approx(2 ** 0.5)]
    report = json.loads((tmp_path / "spectrum.json").read_text())
    assert report["version"] and len(report["config_hash"]) == 64


def test_missing_basis(tmp_path, capsys):
    assert main(["spectrum", "--manifold", "torus", "--sigma-max", "100", "--out", str(tmp_path)]) == 2
    assert "basis" in capsys.readouterr().err


def test_sphere_levels(tmp_path):
    assert main(["spectrum", "--manifold", "sphere", "--dim", "2", "--sigma-max", "50",
                 "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "spectrum.csv")
    assert len(rows) == 50
    assert [int(r["multiplicity"]) for r in rows[:3]] == [1, 3, 5]


def test_trace_derivatives(tmp_path):
    assert main(["trace", *TORUS, "--eigenvalues", "101", "--tau-min", "0.5", "--tau-max", "1.5",
                 "--tau-step", "0.01", "--derivatives", "2", "--out", str(tmp_path)]) == 0
    for k in range(3):
        rows = read_csv(tmp_path / f"trace_d{k}.csv")
        assert list(rows[0]) == ["tau", "re", "im"]
        assert len(rows) == 101


def test_trace_weighted_grid_touching_zero(tmp_path, capsys):
    code = main(["trace", *TORUS, "--eigenvalues", "101", "--weighted", "--out", str(tmp_path)])
    assert code == 2
    assert "tau = 0" in capsys.readouterr().err


def test_trace_square_torus_peaks(tmp_path):
    assert main(["trace", *TORUS, "--eigenvalues", "10201", "--tau-min", "-4", "--tau-max", "4",
                 "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "singularities.json").read_text())
    assert report["all_matched"] and report["no_spurious"]
    assert len(report["expected_lengths"]) == 8


def test_verify_default_passes(tmp_path):
    assert main(["verify", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "verify.csv")
    assert all(r["pass"] == "true" for r in rows)
    assert {r["suite"] for r in rows} >= {"identity", "ibp_high_frequency"}


def test_verify_forced_failure(tmp_path, capsys):
    assert main(["verify", "--tolerance", "1e-12", "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "FAIL ibp_high_frequency" in err
    rows = read_csv(tmp_path / "verify.csv")
    assert any(r["pass"] == "false" for r in rows)


def test_weyl_dry_run(tmp_path, capsys):
    assert main(["weyl", *TORUS_2PI, "--sigma-max", "200", "--dry-run", "--out", str(tmp_path)]) == 0
    echo = json.loads(capsys.readouterr().out)
    assert echo["config"]["sigma_max"] == 200.0
    assert list(tmp_path.iterdir()) == []


def test_weyl_deterministic(tmp_path):
    args = ["weyl", *TORUS_2PI, "--sigma-max", "128", "--T-list", "2,4,8"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b"), "--threads", "2"]) == 0
    for name in ("weyl.json", "weyl_envelope.csv", "weyl_A.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    report = json.loads((tmp_path / "a" / "weyl.json").read_text())
    assert report["mean_to_max"]["holds"]
    R = np.array(report["regulator"]["R"])
    assert np.all(np.diff(R) >= 0) and np.all(R >= 1)


def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"manifold": "sphere", "dim": 2, "sigma_max": 50}))
    out = tmp_path / "out"
    assert main(["spectrum", "--config", str(cfg), "--sigma-max", "20", "--out", str(out)]) == 0
    report = json.loads((out / "spectrum.json").read_text())
    assert report["config"]["sigma_max"] == 20.0
    assert len(read_csv(out / "spectrum.csv")) == 20


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sigma_maximum": 50}))
    assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_help_documents_columns(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    assert "tau,re,im" in capsys.readouterr().out
