import json

import pytest

from minplustree.cli import main


def test_usage_error_on_bad_probability(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["evolve", "--p", "1.5", "--N", "3"])
    assert exc.value.code != 0


def test_usage_error_on_unknown_flag():
    with pytest.raises(SystemExit) as exc:
        main(["evolve", "--N", "3", "--frobnicate"])
    assert exc.value.code != 0


def test_usage_error_on_missing_command():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code != 0


def test_evolve_csv_golden(tmp_path, capsys):
    out = tmp_path / "d.csv"
    rc = main(["evolve", "--N", "3", "--p", "0.5", "--kmax", "auto",
               "--format", "csv", "--output", str(out)])
    assert rc == 0
    assert out.read_text() == (
        "k,pmf,survival\n"
        "1,0.375,1.0\n"
        "2,0.25,0.625\n"
        "3,0.25,0.375\n"
        "4,0.125,0.125\n"
    )
    assert "evolve: N=3" in capsys.readouterr().err


def test_evolve_json_fields(tmp_path):
    out = tmp_path / "d.json"
    assert main(["evolve", "--N", "4", "--p", "0.5", "--kmax", "8",
                 "--format", "json", "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {"level", "p_plus", "k_max", "tail_mass", "probs"}
    assert doc["level"] == 4 and len(doc["probs"]) == 8


def test_evolve_auto_cap_guard(capsys):
    rc = main(["evolve", "--N", "200", "--kmax", "auto"])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_evolve_outputs_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["evolve", "--N", "8", "--p", "0.3", "--kmax", "64",
                     "--output", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sample_deterministic_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["sample", "--depth", "8", "--p", "0.5", "--samples", "20000",
                     "--seed", "42", "--workers", "8", "--output", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "value,count"
    total = sum(int(row.split(",")[1]) for row in lines[1:])
    assert total == 20000


def test_sample_json(tmp_path):
    out = tmp_path / "s.json"
    assert main(["sample", "--depth", "4", "--samples", "500", "--seed", "7",
                 "--format", "json", "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["n"] == 500 and doc["depth"] == 4
    assert sum(doc["counts"].values()) == 500


def test_series_stdout(capsys):
    assert main(["series", "--fn", "h", "--k", "2"]) == 0
    text = capsys.readouterr().out
    assert "0.693147" in text and "1.644934" in text and "OK" in text


def test_series_requires_parameters(capsys):
    assert main(["series", "--fn", "S", "--k", "100"]) == 1
    assert "error:" in capsys.readouterr().err


def test_bounds_upper_json(tmp_path):
    out = tmp_path / "b.json"
    rc = main(["bounds", "--model", "upper", "--C", "3.62", "--beta", "2",
               "--N-range", "1000:1005", "--k-range", "400", "--output", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["min_margin"] >= 0.0
    assert doc["first_violation"] is None


def test_bounds_strict_violation_exit_code(tmp_path):
    out = tmp_path / "b.json"
    rc = main(["bounds", "--model", "upper", "--C", "1.6", "--beta", "2",
               "--N-range", "100:105", "--k-range", "100", "--strict",
               "--output", str(out)])
    assert rc == 2
    assert json.loads(out.read_text())["min_margin"] < 0.0


def test_bounds_lower_model(tmp_path):
    # the built-in head uses squared logs above 33, so the curve is a valid
    # survival function at k <= 150 only once N clears log(150)^2
    out = tmp_path / "b.json"
    rc = main(["bounds", "--model", "lower", "--c", "1.0", "--K", "151",
               "--N-range", "26:60", "--k-range", "150", "--output", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["min_margin"] >= 0.0 and doc["curve_valid"]


def test_bounds_emit_grid(tmp_path):
    out = tmp_path / "b.json"
    rc = main(["bounds", "--model", "upper", "--N-range", "50:52",
               "--k-range", "20", "--emit-grid", "--output", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["grid_shape"] == [3, 20]
    assert len(doc["residuals"]) == 3


def test_limit_csv_schema(tmp_path):
    out = tmp_path / "l.csv"
    assert main(["limit", "--N", "10", "--kmax", "1024", "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,empirical,limit"
    t, emp, lim = map(float, lines[1].split(","))
    assert t == 0.0 and lim == 0.0 and 0.0 <= emp <= 1.0


def test_regimes_json(tmp_path):
    out = tmp_path / "r.json"
    assert main(["regimes", "--p", "0.4", "--k-max", "8", "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["classification"] == "subcritical"
    assert doc["fixed_point_c2"] == pytest.approx(2 / 3, abs=1e-9)


def test_worker_default_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("MINPLUSTREE_WORKERS", "3")
    out = tmp_path / "s.json"
    assert main(["sample", "--depth", "4", "--samples", "300", "--seed", "1",
                 "--format", "json", "--output", str(out)]) == 0
    # worker count shapes the substreams, so compare against an explicit run
    explicit = tmp_path / "e.json"
    monkeypatch.delenv("MINPLUSTREE_WORKERS")
    assert main(["sample", "--depth", "4", "--samples", "300", "--seed", "1",
                 "--workers", "3", "--format", "json", "--output", str(explicit)]) == 0
    assert out.read_bytes() == explicit.read_bytes()


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    text = capsys.readouterr().out
    assert "FAIL" not in text
    assert "checks passed" in text
