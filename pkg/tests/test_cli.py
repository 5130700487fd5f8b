import subprocess
import sys
from pathlib import Path

import pytest

from mppnc.cli import EXIT_CONFIG, EXIT_DECODING, EXIT_OK, EXIT_ORACLE, main
from mppnc.harness import read_csv

ROOT = Path(__file__).resolve().parents[1]
TINY = ROOT / "tests" / "fixtures" / "tiny_sweep.cfg"


def write(tmp_path, text, name="c.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_sweep_writes_csv(tmp_path, capsys):
    out = tmp_path / "out.csv"
    plot = tmp_path / "out.dat"
    assert main(["sweep", "--config", str(TINY), "--out", str(out), "--plotdata", str(plot)]) == EXIT_OK
    assert len(read_csv(out)) == 12
    assert plot.read_text().startswith("# decoder=")


def test_sweep_seed_override(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["sweep", "--config", str(TINY), "--out", str(a)])
    main(["sweep", "--config", str(TINY), "--out", str(b), "--seed", "99"])
    assert a.read_bytes() != b.read_bytes()


def test_coeffs_prints_table(capsys):
    assert main(["coeffs", "--config", str(TINY)]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("slot 4:") == 2
    assert "x_B[n-1]" in out


def test_validate_passes_on_presets(tmp_path, capsys):
    cfg = write(tmp_path, "profile = INDOOR_A\ndelta = 0.5\nmethod = DOUBLE\n")
    assert main(["validate", "--config", cfg]) == EXIT_OK
    assert "FAIL" not in capsys.readouterr().out


def test_validate_reports_oracle_mismatch(monkeypatch, tmp_path, capsys):
    import mppnc.cli as cli

    real = cli.quadrature_coefficients

    def skewed(p, method, n_sub=100_000):
        out = real(p, method, n_sub)
        coeffs, energy = out[0]
        k = next(iter(coeffs))
        coeffs[k] += 1e-6
        return out

    monkeypatch.setattr(cli, "quadrature_coefficients", skewed)
    cfg = write(tmp_path, "profile = INDOOR_A\ntruncate = 2\nmethod = QUAD\n")
    assert main(["validate", "--config", cfg]) == EXIT_ORACLE
    assert "FAIL" in capsys.readouterr().out


def test_decode_reports_ber(capsys):
    assert main(["decode", "--config", str(TINY), "--snr", "8", "--frames", "50"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "MP_PNC" in out and "bits=1600" in out


def test_decode_failure_exit_code(monkeypatch, capsys):
    import mppnc.cli as cli
    from mppnc.decoder import DecodingFailure

    def boom(*a, **k):
        raise DecodingFailure("belief vanished")

    monkeypatch.setattr(cli, "decode_pairs", boom)
    assert main(["decode", "--config", str(TINY), "--snr", "8", "--frames", "2"]) == EXIT_DECODING


@pytest.mark.parametrize(
    "text",
    ["modulation = 16QAM\n", "profile = INDOOR_A\nmethod = QUAD\n", "delta = 1.5\n"],
)
def test_config_error_exit_code(tmp_path, text, capsys):
    cfg = write(tmp_path, text)
    for cmd in (["coeffs"], ["validate"], ["decode", "--snr", "3"], ["sweep", "--out", str(tmp_path / "x.csv")]):
        assert main(cmd[:1] + ["--config", cfg] + cmd[1:]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_config_is_config_error(tmp_path):
    assert main(["coeffs", "--config", str(tmp_path / "none.cfg")]) == EXIT_CONFIG


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    res = subprocess.run(
        [sys.executable, "-m", "mppnc", "sweep", "--config", str(TINY), "--out", str(out), "--workers", "2"],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr
    assert out.read_bytes() == (ROOT / "tests" / "fixtures" / "tiny_sweep_golden.csv").read_bytes()
