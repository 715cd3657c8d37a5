import json

import numpy as np
import pytest

from morphflight.cli import main


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_missing_config_is_an_error(tmp_path, capsys):
    rc = main(["trim", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)])
    assert rc == 2
    assert not (tmp_path / "trim.json").exists()  # no partial outputs


def test_trim_subcommand(tmp_path, capsys):
    out = tmp_path / "trim"
    rc = main(["trim", "--out", str(out)])
    assert rc == 0
    result = json.loads((out / "trim.json").read_text())
    assert result["converged"]
    assert result["residual_norm"] < 1e-8
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "trim"
    assert "version" in manifest
    assert "thrust" in capsys.readouterr().out


def test_simulate_subcommand(tmp_path):
    out = tmp_path / "sim"
    rc = main(
        [
            "simulate",
            "--duration",
            "0.2",
            "--rel-tol",
            "1e-6",
            "--abs-tol",
            "1e-8",
            "--probe",
            "wing_right[15]",
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    assert (out / "trajectory.csv").exists()
    assert (out / "attitude.svg").exists()
    assert (out / "probe_wing_right_15.csv").exists()
    data = np.genfromtxt(out / "trajectory.csv", delimiter=",", names=True, dtype=None, encoding=None)
    assert data["t"][-1] == pytest.approx(0.2, abs=1e-9)


def test_env_var_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("MORPHFLIGHT_OUT", str(tmp_path / "envout"))
    rc = main(["trim"])
    assert rc == 0
    assert (tmp_path / "envout" / "trim.json").exists()


def test_pitch_sweep_subcommand(tmp_path):
    out = tmp_path / "ts"
    rc = main(
        ["trimspace", "--pitch-only", "--alpha-max", "0.1", "--grid-step", "2", "--out", str(out)]
    )
    assert rc == 0
    rows = (out / "pitch_sweep.csv").read_text().splitlines()
    assert rows[0].startswith("alpha,converged")
    assert len(rows) > 3


def test_stability_subcommand(tmp_path, capsys):
    out = tmp_path / "stab"
    rc = main(["stability", "--gamma", "0.3", "--out", str(out)])
    assert rc == 0
    text = (out / "stability_map.csv").read_text()
    header = text.splitlines()[0]
    assert header == (
        "alpha,beta,Gamma,policy,max_real_eig,dutch_roll_damping,"
        "delta_psi,delta_phi,static_alpha,static_beta"
    )
    assert (out / "eigenvalues.svg").exists()
    assert "Phugoid" in capsys.readouterr().out


def test_unknown_control_rejected(tmp_path):
    with pytest.raises(SystemExit):
        main(["simulate", "--controls", "warp=1.0", "--out", str(tmp_path)])
