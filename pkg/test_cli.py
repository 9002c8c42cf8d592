"""Command-line dispatch and exit codes."""
import json
import math

import pytest

from angular_lab import cli
from angular_lab.errors import NonConvergenceError

SW_MIXED = {"n": 3, "p": 2, "q": 4, "p_tilde": 2, "q_tilde": 2, "alpha": "-0.4", "beta": 0, "gamma": "2.65"}


def _run(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_pass_exits_zero(capsys):
    code, out, _ = _run(capsys, "check", "--theorem", "mixed-sw", "--tuple", json.dumps(SW_MIXED))
    assert code == 0
    document = json.loads(out)
    assert document["_meta"]["tool"] == "angular-lab"
    assert document["result"]["overall"] == "pass"


def test_check_fail_exits_one(capsys):
    code, out, _ = _run(capsys, "check", "--theorem", "classical-sw", "--tuple", json.dumps(SW_MIXED))
    assert code == 1
    assert json.loads(out)["result"]["overall"] == "fail"


def test_invalid_tuple_exits_two(capsys):
    code, out, err = _run(capsys, "check", "--theorem", "mixed-sw", "--tuple", '{"n": 3, "p": 0.5}')
    assert code == 2
    assert out == ""
    assert "p" in err


@pytest.mark.parametrize("argv", [
    ["check", "--theorem", "bogus", "--tuple", json.dumps(SW_MIXED)],
    ["check", "--theorem", "mixed-sw"],
    ["singint", "--nu", "1"],
    ["frobnicate"],
])
def test_configuration_errors_exit_two(capsys, argv):
    code, _, _ = _run(capsys, *argv)
    assert code == 2


def test_scan_writes_csv(capsys):
    code, out, _ = _run(capsys, "scan", "--checker", "mixed-sw", "--tuple", json.dumps(SW_MIXED),
                        "--axis", "q_tilde:2:3:10", "--format", "csv")
    assert code == 0
    body = [line for line in out.splitlines() if not line.startswith("#")]
    assert body[0] == "q_tilde,overall"
    assert [row.split(",")[1] for row in body[1:]] == ["pass"] * 3 + ["fail"] * 8


def test_output_file_and_config_round_trip(capsys, tmp_path):
    report = tmp_path / "report.json"
    code, out, _ = _run(capsys, "singint", "--nu", "2", "--r", "0.5", "-o", str(report))
    assert code == 0 and out == ""
    document = json.loads(report.read_text(encoding="utf-8"))
    assert document["result"]["value"] == pytest.approx(4 * math.pi * math.log(3), rel=1e-10)

    config = tmp_path / "run.json"
    config.write_text(json.dumps({"command": "singint", "params": {"nu": 2.0, "r": 0.5}}), encoding="utf-8")
    code, out, _ = _run(capsys, "--config", str(config))
    assert code == 0
    assert json.loads(out)["result"]["value"] == document["result"]["value"]


def test_same_flags_give_same_config_hash(capsys):
    argv = ["check", "--theorem", "mixed-sw", "--tuple", json.dumps(SW_MIXED)]
    first = json.loads(_run(capsys, *argv)[1])["_meta"]["config_sha256"]
    second = json.loads(_run(capsys, *argv)[1])["_meta"]["config_sha256"]
    assert first == second and len(first) == 64


def test_non_convergence_exits_three(capsys, monkeypatch):
    def never_settles(*args, **kwargs):
        raise NonConvergenceError("mixed norm changed by 1e-2 at the last doubling")

    monkeypatch.setattr(cli, "converged_mixed_norm", never_settles)
    code, out, err = _run(capsys, "norm", "--p", "2")
    assert code == 3
    assert "mixed norm" in err
