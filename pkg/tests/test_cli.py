"""Tests for the command-line entry point."""
import json

import pandas as pd
import pytest

from src.main import EXIT_ERROR, EXIT_OK, EXIT_VERIFY_FAILED, main
from src.pipeline.verification import VerificationSuite


@pytest.fixture(autouse=True)
def no_env_out_dir(monkeypatch):
    monkeypatch.delenv("QMS_OUT_DIR", raising=False)


def _error(capsys):
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
    return json.loads(lines[-1])["error"]


def test_analyze_writes_report(tmp_path, capsys):
    """Test analyze exits 0, writes report.json and prints the text table."""
    assert main(["analyze", "--sigma", "0.5", "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert report["schema_version"] == 1
    assert report["config"]["measurement"]["sigma"] == 0.5
    assert report["oracle"]["passed"]
    assert report["parameters"]["PR"]["stddevs"]["x"] == pytest.approx(1.118034, abs=1e-6)
    assert report["entropy"]["delta_tau"] is None
    assert "Parameters" in capsys.readouterr().out


def test_env_out_dir(tmp_path, monkeypatch):
    """Test QMS_OUT_DIR is used when --out is absent."""
    monkeypatch.setenv("QMS_OUT_DIR", str(tmp_path / "env"))
    assert main(["analyze"]) == EXIT_OK
    assert (tmp_path / "env" / "report.json").is_file()


def test_domain_error_exit_code(tmp_path, capsys):
    """Test a domain violation exits 2 with a JSON error on stderr."""
    code = main(["analyze", "--k", "1", "--lambda", "1.5", "--out", str(tmp_path)])
    assert code == EXIT_ERROR
    error = _error(capsys)
    assert error["type"] == "domain_error"
    assert "lambda" in error["message"]
    assert not (tmp_path / "report.json").exists()


def test_single_sample_rejected(tmp_path, capsys):
    """Test --samples 1 is a configuration error."""
    assert main(["sample", "--samples", "1", "--out", str(tmp_path)]) == EXIT_ERROR
    assert _error(capsys)["type"] == "config_error"


def test_omega_with_alpha_rejected(tmp_path, capsys):
    """Test --omega cannot be combined with state flags."""
    assert main(["analyze", "--omega", "1", "--alpha", "2", "--out", str(tmp_path)]) == EXIT_ERROR
    assert _error(capsys)["type"] == "config_error"


def test_sample_is_reproducible(tmp_path):
    """Test two sample runs with the same seed give the same FR section."""
    sections = []
    for name in ("a", "b"):
        out = tmp_path / name
        args = ["sample", "--sigma", "0.5", "--samples", "2000", "--seed", "7", "--out", str(out)]
        assert main(args) == EXIT_OK
        report = json.loads((out / "sample_report.json").read_text(encoding="utf-8"))
        sections.append(report["parameters"]["FR"])
        assert report["sampling"]["seeds"] == {"x": 7, "p": 8}
        assert (out / "samples_x.csv").is_file()
    assert sections[0] == sections[1]


def test_config_file_run(tmp_path):
    """Test a JSON run file drives an oscillator analysis."""
    path = tmp_path / "run.json"
    path.write_text(json.dumps({
        "schema_version": 1,
        "oscillator": {"omega": 1.0},
        "measurement": {"sigma": 0.5},
    }), encoding="utf-8")
    assert main(["analyze", "--config", str(path), "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert "H" in report["parameters"]["PR"]["means"]


def test_sweep_writes_csv(tmp_path):
    """Test sweep writes one LF-terminated row per axis value."""
    args = ["sweep", "--axis", "sigma", "--values", "0,0.5", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    path = tmp_path / "sweep_sigma.csv"
    assert b"\r\n" not in path.read_bytes()
    table = pd.read_csv(path)
    assert list(table["value"]) == [0.0, 0.5]


def test_bad_sweep_values(tmp_path, capsys):
    """Test non-numeric --values are a configuration error."""
    args = ["sweep", "--axis", "sigma", "--values", "0,abc", "--out", str(tmp_path)]
    assert main(args) == EXIT_ERROR
    assert _error(capsys)["type"] == "config_error"


def test_curves_files(tmp_path):
    """Test curves writes density and current tables with oracle columns."""
    assert main(["curves", "--sigma", "0.5", "--out", str(tmp_path)]) == EXIT_OK
    for name in ("curves_density.csv", "curves_current.csv"):
        header = (tmp_path / name).read_text(encoding="utf-8").splitlines()[0]
        assert header == "x,IN,PR,oracle_IN,oracle_PR"


def test_verify_exit_codes(tmp_path, monkeypatch):
    """Test verify exits 0 on success and 1 when the kernel check is faulted."""
    monkeypatch.setattr(VerificationSuite, "criteria", lambda self: [self.kernel_normalization])
    assert main(["verify", "--out", str(tmp_path)]) == EXIT_OK
    assert main(["verify", "--inject-kernel-scale", "0.9", "--out", str(tmp_path)]) == (
        EXIT_VERIFY_FAILED
    )
    table = pd.read_csv(tmp_path / "verify.csv")
    assert list(table["status"]) == ["FAIL"]


@pytest.mark.slow
def test_full_verify(tmp_path):
    """Test the complete acceptance suite exits 0."""
    assert main(["verify", "--out", str(tmp_path)]) == EXIT_OK


def test_sample_trial_flags(tmp_path):
    """Test --trials and --trial-samples size the repeated position campaigns."""
    args = [
        "sample", "--sigma", "0.5", "--samples", "2000", "--trials", "3",
        "--trial-samples", "200", "--out", str(tmp_path),
    ]
    assert main(args) == EXIT_OK
    report = json.loads((tmp_path / "sample_report.json").read_text(encoding="utf-8"))
    assert report["sampling"]["trials"]["trials"] == 3
    assert report["sampling"]["trials"]["n"] == 200
    assert report["config"]["sampling"]["trial_samples"] == 200
