import csv
import json

import numpy as np
import pytest

from operator_tuples import OperatorTuple
from polynomials import elementary_symmetric
from scalar_geometry import GammaPoint
from symdisc import EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK, main


def _run(capsys, argv):
    status = main(argv)
    out = capsys.readouterr().out
    return status, out


def _tuple_file(tmp_path, t, name="tuple.json"):
    path = tmp_path / name
    path.write_text(json.dumps(t.to_dict()))
    return str(path)


def test_membership_boundary_point(capsys):
    status, out = _run(capsys, ["membership", "--point", "3,3,1"])
    data = json.loads(out)
    assert status == EXIT_OK
    assert data["verdict"] == "BoundaryGamma_b"
    assert data["oracle_disagreement"] is False
    assert data["config"]["command"] == "membership"


def test_membership_origin_open_query(capsys):
    status, out = _run(capsys, ["membership", "--point", "0,0,0", "--query", "open_g"])
    data = json.loads(out)
    assert status == EXIT_OK
    assert data["verdict"] == "InteriorG"
    assert data["member"] is True


def test_membership_several_points_text_and_csv(capsys, tmp_path):
    csv_path = tmp_path / "summary.csv"
    status, out = _run(
        capsys,
        [
            "membership",
            "--point", "3,3,1",
            "--point", "4,0,0",
            "--format", "text",
            "--csv-out", str(csv_path),
        ],
    )
    assert status == EXIT_OK
    assert "verdict: BoundaryGamma_b" in out
    assert "verdict: Outside" in out
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:3] == ["query", "n", "verdict"]
    assert [r[2] for r in rows[1:]] == ["BoundaryGamma_b", "Outside"]


def test_membership_reads_input_file(capsys, tmp_path):
    path = tmp_path / "points.json"
    path.write_text("[[0, 0], [2, 1]]")
    status, out = _run(capsys, ["boundary", "--input", str(path)])
    reports = json.loads(out)["reports"]
    assert status == EXIT_OK
    assert [r["member"] for r in reports] == [False, True]


def test_bad_point_is_an_input_error(capsys):
    assert main(["membership", "--point", "1,x"]) == EXIT_INPUT
    assert "symdisc: error:" in capsys.readouterr().err
    assert main(["membership"]) == EXIT_INPUT


def test_symmetrize(capsys):
    status, out = _run(capsys, ["symmetrize", "--z", "1,i,-1"])
    data = json.loads(out)
    assert status == EXIT_OK
    assert data["verdict"] == "BoundaryGamma_b"
    assert data["point"]["n"] == 3


def test_check_tuple_exterior_point(capsys, tmp_path):
    t = OperatorTuple.from_point(GammaPoint.from_coordinates([0, 0, 2]))
    status, out = _run(
        capsys, ["check-tuple", "--input", _tuple_file(tmp_path, t), "--trials", "20"]
    )
    data = json.loads(out)
    assert status == EXIT_NEGATIVE
    assert data["certificates"]["pencil"]["kind"] == "Violation"


def test_check_tuple_unitary(capsys, tmp_path):
    z = np.exp(2j * np.pi * np.array([[0, 1, 2], [3, 5, 7]]) / 24)
    e = elementary_symmetric(z)
    t = OperatorTuple.from_matrices([np.diag(e[:, 0]), np.diag(e[:, 1])], np.diag(e[:, 2]))
    status, out = _run(
        capsys,
        ["check-tuple", "--input", _tuple_file(tmp_path, t), "--require", "unitary", "--trials", "20"],
    )
    assert status == EXIT_OK
    assert json.loads(out)["certificates"]["unitary"]["kind"] == "GammaUnitary"


def test_check_tuple_needs_input(capsys):
    assert main(["check-tuple"]) == EXIT_INPUT


def test_fundamental_on_zero_tuple(capsys, tmp_path):
    status, out = _run(
        capsys,
        ["fundamental", "--input", _tuple_file(tmp_path, OperatorTuple.zero(3, 2)), "--z-grid", "8"],
    )
    data = json.loads(out)
    assert status == EXIT_OK
    assert data["fundamental"]["rank"] == 2
    assert data["almost_normal"] is True


def test_fundamental_on_non_contraction(capsys, tmp_path):
    t = OperatorTuple.from_point(GammaPoint.from_coordinates([0, 2]))
    status, out = _run(capsys, ["fundamental", "--input", _tuple_file(tmp_path, t)])
    assert status == EXIT_NEGATIVE
    assert "error" in json.loads(out)


def test_counterexample_is_reproducible(tmp_path):
    argv = ["counterexample", "--n", "3", "--depth", "2", "--trials", "50", "--torus-grid", "48"]
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(argv + ["--out", str(first)]) == EXIT_OK
    assert main(argv + ["--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    data = json.loads(first.read_text())
    assert data["headline_defect"] == pytest.approx(0.0625, abs=1e-12)
    assert data["obstruction_confirmed"] is True


def test_flags_override_config_file(capsys, tmp_path):
    conf = tmp_path / "symdisc.conf"
    conf.write_text("n = 4\ndepth = 3\ntrials = 20\ntorus_grid = 48\n")
    status, out = _run(capsys, ["counterexample", "--config", str(conf), "--depth", "2"])
    data = json.loads(out)
    assert status == EXIT_OK
    assert data["model"]["n"] == 4
    assert data["model"]["depth"] == 2
    assert data["config"]["trials"] == 20


def test_bad_config_file_is_an_input_error(capsys, tmp_path):
    conf = tmp_path / "symdisc.conf"
    conf.write_text("depht = 3\n")
    assert main(["counterexample", "--config", str(conf)]) == EXIT_INPUT
    assert "line 1" in capsys.readouterr().err


def test_cf_check(capsys):
    status, out = _run(capsys, ["cf-check", "--trials", "200", "--torus-grid", "1024"])
    data = json.loads(out)
    assert status == EXIT_OK
    assert data["cf_norm"] == pytest.approx((1 + 5**0.5) / 2)
    assert data["passed"] is True
