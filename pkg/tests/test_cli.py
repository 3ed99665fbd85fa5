import json
import math

import pytest

from gasket_solenoid.cli import main


def _run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def _strip_wall_time(doc):
    doc = json.loads(json.dumps(doc))
    doc["manifest"].pop("wall_time_s")
    return json.dumps(doc, sort_keys=True)


def test_edges_csv_row_count(capsys):
    code = main(["edges", "--level", "1", "--min-exp", "0", "--max-exp", "1", "--format", "csv"])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.strip().split("\n")
    assert len(lines) == 25  # header + 24 edges
    assert lines[0].startswith("level,word,i,j,len_exp")


def test_edges_json_and_manifest(capsys):
    code, doc = _run_json(capsys, ["edges", "--level", "0", "--min-exp", "0", "--max-exp", "0"])
    assert code == 0
    assert doc["result"]["count"] == 6
    m = doc["manifest"]
    assert m["deterministic_order"] is True
    assert "version" in m and "tolerances" in m and "wall_time_s" in m


def test_determinism_byte_identical(capsys):
    argv = ["residue", "--eps", "1e-1,1e-2"]
    _, doc1 = _run_json(capsys, argv)
    _, doc2 = _run_json(capsys, argv)
    assert _strip_wall_time(doc1) == _strip_wall_time(doc2)


def test_residue_value(capsys):
    code, doc = _run_json(capsys, ["residue", "--eps", "1e-1,1e-2,1e-3"])
    assert code == 0
    assert doc["result"]["residue"] == pytest.approx(6 / math.log(2), abs=1e-2)


def test_trace_exact_rationals(capsys):
    code, doc = _run_json(capsys, ["trace", "--projection", "P^n", "--n", "-2", "--level", "2", "--window-min", "-2"])
    assert code == 0
    assert doc["result"] == {"value_num": 54, "value_den": 1}
    code, doc = _run_json(capsys, ["trace", "--projection", "P^-p,inf", "--p", "2", "--level", "4"])
    assert code == 0
    assert doc["result"] == {"value_num": 81, "value_den": 1}


def test_trace_recursion_flag(capsys):
    code, doc = _run_json(capsys, ["trace", "--check-recursion", "--m", "2", "--level", "3", "--window-min", "-1"])
    assert code == 0
    assert doc["result"]["equal"] is True


def test_groupoid_normal_form(capsys):
    code, doc = _run_json(capsys, ["groupoid", "normal-form", "--word", "R0_02,R0_21"])
    assert code == 0
    assert doc["result"]["descending_word"] == ["R0_01"]
    # a word whose target is a branch cell reports the canonical factorization
    code, doc = _run_json(capsys, ["groupoid", "normal-form", "--word", "R0_21,R0_10"])
    assert code == 0
    assert doc["result"]["descending_word"] is None
    assert doc["result"]["target_descent"] == ["R0_02"]


def test_groupoid_between(capsys):
    code, doc = _run_json(capsys, ["groupoid", "between", "--from", "1:1", "--to", "1:2"])
    assert code == 0
    assert doc["result"]["source"] == "1:1"
    assert doc["result"]["target"] == "1:2"
    assert doc["result"]["rotation_deg"] in (0, 120, 240)


def test_zeta_value_and_grid(capsys):
    code, doc = _run_json(capsys, ["zeta", "--s", "2.0", "--cutoff", "80"])
    assert code == 0
    assert doc["result"]["value"] > 0
    code = main(["zeta", "--s-grid", "1.7", "3.0", "4", "--cutoff", "200"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("s,zeta,tail_bound") and len(out.strip().split("\n")) == 6


def test_integral_methods(capsys):
    code, doc = _run_json(capsys, ["integral", "--function", "alpha", "--level", "0",
                                   "--resolution", "8", "--method", "quadrature"])
    assert code == 0
    assert doc["result"]["value"] == pytest.approx(2 / math.log(3), abs=1e-2)
    assert doc["result"]["error_bound"] >= 0
    code, doc = _run_json(capsys, ["integral", "--function", "one", "--method", "both",
                                   "--resolution", "10"])
    assert code == 0
    assert doc["result"]["routes_gap"] < 5e-3


def test_distance_certificate(capsys):
    code, doc = _run_json(capsys, ["distance", "--from", "0/1,0/1", "--to", "1/1,0/1",
                                   "--level", "0", "--resolution", "6", "--certificate"])
    assert code == 0
    assert doc["result"]["value"] == 1.0
    assert doc["result"]["certificate_ok"] is True
    table = doc["result"]["resolution_table"]
    values = [v for _, v in table]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_verify_quick_exit_zero(capsys):
    assert main(["verify", "--quick"]) == 0
    out = capsys.readouterr().out
    assert "criteria passed" in out


def test_usage_error_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_domain_error_exit_two(capsys):
    code = main(["zeta", "--s", "1.0"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_out_file(tmp_path, capsys):
    target = tmp_path / "edges.csv"
    code = main(["--out", str(target), "edges", "--level", "0", "--min-exp", "0",
                 "--max-exp", "0", "--format", "csv"])
    assert code == 0
    assert target.read_text().count("\n") == 7
