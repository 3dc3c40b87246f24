import json

import pytest

from lambda_repeater.cli import main


def write_config(tmp_path, **extra):
    data = {"params": {"g1": 1, "g2": 2, "Delta": 2, "delta": 2, "Gamma": 4, "gamma": 0},
            "gt": 2, "g_tau_range": [0, 15, 30], "cases": [{"case": 1, "outcome": "eg"}],
            "output": str(tmp_path / "out")}
    data.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return path


def test_sweep_writes_csv(tmp_path, capsys):
    assert main(["sweep", str(write_config(tmp_path))]) == 0
    files = sorted((tmp_path / "out").glob("*.csv"))
    assert [f.name for f in files] == ["case1_eg_negativity.csv", "case1_eg_success_probability.csv"]
    text = files[0].read_text()
    assert "g_tau,value" in text and "gef-msd" in text


def test_sweep_is_byte_identical(tmp_path):
    path = write_config(tmp_path)
    main(["sweep", str(path), "--out", str(tmp_path / "a")])
    main(["sweep", str(path), "--out", str(tmp_path / "b")])
    for f in (tmp_path / "a").glob("*.csv"):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["sweep", str(write_config(tmp_path, cases=[]))]) == 2
    assert main(["sweep", str(write_config(tmp_path, typo=1))]) == 2
    assert main(["sweep", str(tmp_path / "missing.json")]) == 2
    assert main(["figure", "9z", "--out", str(tmp_path)]) == 2
    assert main(["nonsense"]) == 2
    assert "error" in capsys.readouterr().err


def test_figure_command(tmp_path, capsys):
    assert main(["figure", "4b", "--out", str(tmp_path), "--points", "10"]) == 0
    assert len(list(tmp_path.glob("fig4b_*.csv"))) == 3


def test_validate_command(tmp_path, capsys):
    report = tmp_path / "report.json"
    assert main(["validate", "--out", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert doc["pass"] and doc["level"] == "fast"
    assert all({"tolerance", "observed", "pass"} <= set(c) for c in doc["checks"])


def test_validate_detects_flipped_lambda2(tmp_path, capsys):
    assert main(["validate", "--flip-lambda2", "--out", str(tmp_path / "r.json")]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_dump_state(capsys):
    assert main(["dump-state", "--stage", "two", "--case", "Psi,PsiP"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["num_atoms"] == 4 and doc["convention"] == "gef-msd"
    assert len(doc["amplitudes"]) == 81
    assert main(["dump-state", "--stage", "one"]) == 0
    assert json.loads(capsys.readouterr().out)["num_atoms"] == 4
    assert main(["dump-state"]) == 0
    assert 0 <= json.loads(capsys.readouterr().out)["negativity"] <= 0.5
