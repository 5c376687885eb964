import csv
import io
import json

import pytest

from fpiter import cli, golden


def call(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_table1_verify(capsys):
    code, out, err = call(capsys, "table1", "--verify")
    assert code == 0
    assert "verified" in err
    table = rows(out)
    assert table[0] == ["Step", "Agarwal", "Noor", "Abbas", "Thakur", "New iter"]
    assert len(table) == 31
    row2 = [float(v) for v in table[2][1:]]
    assert row2 == pytest.approx([36.514581536, 36.1407358454, 34.6327094201, 33.826119187, 32.0516661514], abs=5e-10)
    assert table[30][5] == "5.0000000000"
    assert float(table[30][2]) == pytest.approx(5.00000002543, abs=5e-10)


def test_table1_corrupted_reference_is_located(capsys, monkeypatch):
    bad = list(golden.TABLE1)
    step, *cells = bad[6]
    cells[3] = "7.76797699976"  # 1e-7 off
    bad[6] = (step, *cells)
    monkeypatch.setattr(golden, "TABLE1", tuple(bad))
    code, out, err = call(capsys, "table1", "--verify", "--format", "json")
    assert code == 1
    assert "row 7, column Thakur" in err
    first = json.loads(out)["verify"]["first_mismatch"]
    assert first["row"] == 7 and first["column"] == "Thakur"


def test_table1_plot_data_file(capsys, tmp_path):
    out = tmp_path / "t1.csv"
    code, _, _ = call(capsys, "table1", "--out", str(out))
    assert code == 0
    plot = rows((tmp_path / "t1_plot.csv").read_text())
    assert plot[0] == ["step", "scheme", "abs_error", "log10_error"]
    assert len(plot) == 1 + 30 * 5


def test_output_is_byte_identical_across_runs(capsys):
    for argv in (("table1",), ("compare", "--scheme", "new", "--scheme", "thakur"), ("solve-integral", "--nodes", "17")):
        _, a, _ = call(capsys, *argv)
        _, b, _ = call(capsys, *argv)
        assert a == b


def test_json_round_trip_matches_csv(capsys):
    _, text, _ = call(capsys, "run", "--scheme", "new", "--tol", "1e-9")
    _, js, _ = call(capsys, "run", "--scheme", "new", "--tol", "1e-9", "--format", "json")
    table = rows(text)
    payload = json.loads(js)
    assert payload["command"] == "run"
    assert payload["timing"] is None
    assert payload["columns"] == table[0]
    data = payload["data"]
    assert data["step"] == [int(r[0]) for r in table[1:]]
    assert data["value"] == [float(r[1]) for r in table[1:]]
    assert data["error"] == [float(r[3]) for r in table[1:]]
    assert payload["diagnostics"]["evaluations_per_step"] == 3


def test_tsv_output(capsys):
    _, text, _ = call(capsys, "run", "--scheme", "picard", "--map", "half", "--x0", "1", "--tol", "1e-3", "--format", "tsv")
    lines = text.splitlines()
    assert lines[0].split("\t") == ["step", "value", "residual", "error"]
    assert len(lines) == 12


def test_timing_only_when_requested(capsys):
    _, js, _ = call(capsys, "bounds", "--format", "json", "--timing")
    assert json.loads(js)["timing"]["seconds"] >= 0


def test_compare_verdicts(capsys):
    _, js, _ = call(capsys, "compare", "--scheme", "new", "--scheme", "thakur", "--format", "json")
    d = json.loads(js)["diagnostics"]
    assert d["verdict"] == "a_faster"
    assert d["steps_to_tolerance"] == {"new": 17, "thakur": 21}
    _, js, _ = call(capsys, "compare", "--scheme", "agarwal", "--scheme", "abbas", "--format", "json")
    d = json.loads(js)["diagnostics"]
    assert d["verdict"] == "b_faster"
    assert d["steps_to_tolerance"]["abbas_nazir"] == 24


def test_solve_integral_success(capsys, tmp_path):
    out = tmp_path / "sol.csv"
    code, _, _ = call(capsys, "solve-integral", "--out", str(out))
    assert code == 0
    table = rows(out.read_text())
    assert table[0] == ["t", "value", "exact"]
    assert max(abs(float(r[1]) - float(r[2])) for r in table[1:]) < 1e-8
    hist = json.loads((tmp_path / "sol_history.json").read_text())
    assert hist["converged"] and hist["steps"] <= 60
    for e, b in zip(hist["history"]["error"][1:], hist["history"]["bound_product"][1:]):
        assert e <= b + hist["quadrature_slack"]


def test_solve_integral_rejects_inflated_problem(capsys):
    code, _, err = call(capsys, "solve-integral", "--problem", "mvf-inflated")
    assert code == 3
    assert "1.1" in err


def test_solve_integral_identity_one_step(capsys):
    code, js, _ = call(capsys, "solve-integral", "--problem", "mvf-identity", "--nodes", "9", "--format", "json")
    assert code == 0
    assert json.loads(js)["diagnostics"]["steps"] == 1


def test_bounds_examples(capsys):
    _, text, _ = call(capsys, "bounds", "--xi", "0.5", "--delta", "0.5", "--zeta", "0.5", "--n", "2")
    table = rows(text)
    assert float(table[1][1]) == pytest.approx(0.1875)
    assert float(table[1][2]) == pytest.approx(0.21875)
    assert float(table[1][3]) == pytest.approx(6 / 7, rel=1e-9)
    _, text, _ = call(capsys, "bounds", "--theta", "0.75", "--delta", "0.95", "--n", "1")
    assert float(rows(text)[1][1]) == pytest.approx(0.7625)


@pytest.mark.parametrize(
    "argv",
    [
        ("run", "--scheme", "new", "--map", "nope"),
        ("run", "--scheme", "halpern"),
        ("run",),
        ("compare", "--scheme", "new"),
        ("run", "--scheme", "new", "--delta", "1.5"),
        ("solve-integral", "--nodes", "4"),
        ("bounds", "--xi", "1.2"),
        ("table1", "--precision", "40"),
        ("frobnicate",),
    ],
)
def test_config_errors_exit_2(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 2
    assert err


def test_bounds_non_contraction_exits_3(capsys):
    code, _, _ = call(capsys, "bounds", "--theta", "1.2")
    assert code == 3
