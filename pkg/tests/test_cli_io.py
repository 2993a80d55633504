import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jqnn import io
from jqnn.cli import main, parse_ints, ConfigError
from jqnn.pipeline import CSV_HEADER, ErrorCurve, approximate_multivariate, approximate_univariate, abs_sin
from jqnn.trig_core import PeriodicFn, TrigPoly1D, TrigPolyND


def read_json(path):
    return json.loads(path.read_text())


# ------------------------------------------------------------ approx1d


def test_approx1d_abssin(tmp_path):
    assert main(["approx1d", "--func", "abssin", "--K", "0", "--N", "20", "--out", str(tmp_path)]) == 0
    model = read_json(tmp_path / "model.json")
    assert model["kind"] == "uni" and model["L"] == 20 and model["depth"] == 40
    assert {"K", "N", "L", "c", "theta", "phi"} <= model.keys()
    assert len(model["theta"]) == 41 and len(model["phi"]) == 42
    rep = read_json(tmp_path / "report.json")
    assert rep["param_count"] == 41 + 42
    assert rep["qnn_sup_error"] <= rep["poly_sup_error"] + 1e-6


def test_approx1d_zero(tmp_path):
    assert main(["approx1d", "--func", "zero", "--K", "3", "--N", "8", "--out", str(tmp_path)]) == 0
    rep = read_json(tmp_path / "report.json")
    assert rep["poly_sup_error"] == rep["qnn_sup_error"] == rep["compile_residual"] == 0.0
    assert read_json(tmp_path / "model.json")["c"] == 0.0


def test_approx1d_abssin25_residual(tmp_path):
    assert main(["approx1d", "--func", "abssin25", "--K", "2", "--N", "16", "--tol", "1e-8", "--out", str(tmp_path)]) == 0
    assert read_json(tmp_path / "report.json")["compile_residual"] <= 1e-6


def test_approx1d_config_errors(tmp_path, capsys):
    assert main(["approx1d", "--func", "nope", "--N", "4", "--out", str(tmp_path)]) == 1
    assert main(["approx1d", "--func", "abssin", "--N", "0", "--out", str(tmp_path)]) == 1
    assert "--N" in capsys.readouterr().err
    assert main(["approx1d", "--func", "abssin", "--N", "2,4", "--out", str(tmp_path)]) == 1
    assert main(["approx1d", "--func", "abssin", "--N", "x", "--out", str(tmp_path)]) == 1
    assert main(["approx1d", "--bogus"]) == 1
    assert not (tmp_path / "model.json").exists()


def test_coefficient_file_function(tmp_path):
    poly = {"dims": 1, "degrees": [2], "coeffs": [[0.1, 0], [0.2, 0], [0.3, 0], [0.2, 0], [0.1, 0]]}
    path = tmp_path / "poly.json"
    path.write_text(json.dumps(poly))
    out = tmp_path / "o"
    assert main(["approx1d", "--func", str(path), "--K", "0", "--N", "8", "--out", str(out)]) == 0
    assert read_json(out / "report.json")["compile_residual"] <= 1e-8

    bad = tmp_path / "bad.json"
    bad.write_text('{"dims": 1, "degrees": [1], "coeffs": [[1, 0]]}')
    assert main(["approx1d", "--func", str(bad), "--N", "2", "--out", str(out)]) == 1
    broken = tmp_path / "broken.json"
    broken.write_text('{"dims": 1,')
    assert main(["approx1d", "--func", str(broken), "--N", "2", "--out", str(out)]) == 1


# ------------------------------------------------------------ approxnd


def test_approxnd_prodcos(tmp_path):
    assert main(["approxnd", "--func", "prodcos", "--K", "0,0", "--N", "2,2", "--dense-check", "--out", str(tmp_path)]) == 0
    model = read_json(tmp_path / "model.json")
    assert model["kind"] == "multi" and model["L"] == [2, 2]
    assert model["n_blocks"] == 25 and model["q"] == 5 and model["d"] == 2
    assert len(model["ordering"]) == len(model["blocks"]) == 25
    rep = read_json(tmp_path / "report.json")
    assert rep["dense_check_gap"] <= 1e-10


@pytest.mark.slow
def test_approxnd_heat(tmp_path):
    assert main(["approxnd", "--func", "heat", "--t", "0.5", "--K", "2,2", "--N", "6,6", "--out", str(tmp_path)]) == 0
    model = read_json(tmp_path / "model.json")
    assert model["L"] == [9, 9] and model["n_blocks"] == 19**2 and model["q"] == 9


def test_approxnd_errors(tmp_path, capsys):
    assert main(["approxnd", "--func", "prodcos", "--K", "0,0", "--N", "0,2", "--out", str(tmp_path)]) == 1
    assert "--N" in capsys.readouterr().err
    assert main(["approxnd", "--func", "prodcos", "--K", "0,0,0", "--N", "2,2", "--out", str(tmp_path)]) == 1
    assert main(["approxnd", "--func", "abssin", "--K", "0", "--N", "2,2", "--out", str(tmp_path)]) == 1
    assert main(["approxnd", "--func", "prodcos", "--K", "2", "--N", "20,20", "--max-qubits", "12", "--out", str(tmp_path)]) == 3
    assert "qubits" in capsys.readouterr().err
    assert main(["approxnd", "--func", "prodcos", "--K", "0", "--N", "4,4", "--dense-check", "--max-qubits", "30", "--out", str(tmp_path)]) == 0
    assert main(["approxnd", "--func", "prodcos", "--K", "0", "--N", "128,128", "--dense-check", "--max-qubits", "30", "--out", str(tmp_path)]) == 3


# ---------------------------------------------------------- experiment


def test_experiment_fig1(tmp_path):
    assert main(["experiment", "fig1", "--Nmax", "20", "--Kmax", "5", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "errors.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) - 1 == 120
    rows = list(csv.reader((tmp_path / "points.csv").read_text().splitlines()))
    assert rows[0] == ["x", "f", "predict"] and len(rows) - 1 == 4096
    rep = read_json(tmp_path / "report.json")
    assert rep["points_cell"] == {"N": 20, "K": 5}
    assert -1.6 <= rep["slopes_from_N4"]["0"] <= -0.6


def test_experiment_fig2_slope(tmp_path):
    assert main(["experiment", "fig2", "--Nmax", "12", "--out", str(tmp_path)]) == 0
    rep = read_json(tmp_path / "report.json")
    assert rep["slopes"]["2"] <= -1.8
    assert rep["slope_N_min"]["2"] == 6


@pytest.mark.slow
def test_experiment_heat_rows(tmp_path):
    assert main(["experiment", "heat", "--t", "1.0", "--N", "2..7", "--K", "0..2", "--grid", "64", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "errors.csv").read_text().splitlines()
    assert len(lines) - 1 == 18
    header = (tmp_path / "points.csv").read_text().splitlines()[0]
    assert header == "x1,x2,f,predict"


def test_experiment_errors(tmp_path):
    assert main(["experiment", "fig9", "--out", str(tmp_path)]) == 1
    assert main(["experiment", "fig1", "--N", "0..3", "--out", str(tmp_path)]) == 1
    assert main(["experiment", "fig1", "--N", "5..3", "--out", str(tmp_path)]) == 1


def test_parse_ints():
    assert parse_ints("3", "N") == (3,)
    assert parse_ints("2,4,6", "N") == (2, 4, 6)
    assert parse_ints("2..7", "N") == (2, 3, 4, 5, 6, 7)
    with pytest.raises(ConfigError, match="--K"):
        parse_ints("a", "K")


# -------------------------------------------------------------- verify


def test_verify_round_trip(tmp_path, capsys):
    main(["approx1d", "--func", "abssin25", "--K", "1", "--N", "6", "--out", str(tmp_path)])
    capsys.readouterr()
    assert main(["verify", str(tmp_path / "model.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["deviation"] <= 1e-9 and out["roundtrip_identical"]


def test_verify_wrong_function(tmp_path, capsys):
    main(["approx1d", "--func", "abssin", "--K", "0", "--N", "6", "--out", str(tmp_path)])
    capsys.readouterr()
    assert main(["verify", str(tmp_path / "model.json"), "--func", "cos"]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["deviation"] > 0.01


def test_verify_corrupt_files(tmp_path, capsys):
    main(["approx1d", "--func", "abssin", "--K", "0", "--N", "6", "--out", str(tmp_path)])
    text = (tmp_path / "model.json").read_text()
    data = json.loads(text)
    data["theta"] = data["theta"][:-1]
    (tmp_path / "short.json").write_text(json.dumps(data))
    assert main(["verify", str(tmp_path / "short.json"), "--func", "abssin"]) == 1
    (tmp_path / "cut.json").write_text(text[:57])
    capsys.readouterr()
    assert main(["verify", str(tmp_path / "cut.json"), "--func", "abssin"]) == 1
    assert "byte offset" in capsys.readouterr().err
    assert main(["verify", str(tmp_path / "missing.json"), "--func", "abssin"]) == 1


def test_verify_multivariate(tmp_path, capsys):
    main(["approxnd", "--func", "prodcos", "--K", "0,1", "--N", "2,3", "--out", str(tmp_path)])
    capsys.readouterr()
    assert main(["verify", str(tmp_path / "model.json")]) == 0


# ------------------------------------------------------------ io layer


def test_model_dump_byte_identical():
    for model in (
        approximate_univariate(abs_sin(), 2, 7),
        approximate_multivariate(PeriodicFn(lambda x, y: np.cos(x + 2 * y), 2), (0, 0), (3, 2)),
    ):
        text = io.dumps(io.model_to_dict(model))
        again = io.dumps(io.model_to_dict(io.loads_model(text)))
        assert again == text


def test_loaded_model_predicts_identically():
    m = approximate_univariate(abs_sin(), 1, 9)
    back = io.loads_model(io.dumps(io.model_to_dict(m)))
    x = np.linspace(-3, 3, 101)
    assert np.array_equal(m.predict(x), back.predict(x))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=3, max_size=3))
def test_float_round_trip(vals):
    p = {"kind": "uni", "K": 0, "N": 2, "L": 1, "c": 1.0, "depth": 2, "theta": vals, "phi": vals + [0.5], "residual": 0.0}
    text = io.dumps(p)
    assert io.dumps(io.model_to_dict(io.loads_model(text))) == text


def test_poly_round_trip():
    rng = np.random.default_rng(0)
    p1 = TrigPoly1D(rng.normal(size=5) + 1j * rng.normal(size=5))
    q1 = io.poly_from_dict(json.loads(json.dumps(io.poly_to_dict(p1))))
    assert np.array_equal(p1.coeffs, q1.coeffs)
    pn = TrigPolyND(rng.normal(size=(3, 5)))
    qn = io.poly_from_dict(json.loads(json.dumps(io.poly_to_dict(pn))))
    assert np.array_equal(pn.coeffs, qn.coeffs)
    with pytest.raises(io.ModelFormatError):
        io.poly_from_dict({"dims": 2, "degrees": [1], "coeffs": []})


def test_curve_round_trip_byte_identical():
    text = "N,K,L,param_count,poly_sup_error,qnn_sup_error,compile_residual\n2,0,2,11,0.1,0.10000000000000002,1e-15\n"
    assert ErrorCurve.from_csv(text).to_csv() == text


def test_bad_model_records():
    with pytest.raises(io.ModelFormatError):
        io.loads_model('{"kind": "tri"}')
    with pytest.raises(io.ModelFormatError) as info:
        io.loads_model('{"kind": "uni", "K": 0,,}')
    assert info.value.offset == 23


def test_atomic_write_replaces(tmp_path):
    target = tmp_path / "x" / "f.txt"
    io.write_atomic(target, "one")
    io.write_atomic(target, "two")
    assert target.read_text() == "two"
    assert [p.name for p in target.parent.iterdir()] == ["f.txt"]
