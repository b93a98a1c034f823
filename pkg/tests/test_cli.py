import json
import subprocess
import sys
from pathlib import Path

import pytest

from toricmle import cli, jsonio, selftest

DATA = Path(__file__).resolve().parent.parent / "data"


def d(name):
    return str(DATA / name)


def run_json(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out), out


def test_mle_phylo_worked_example(capsys):
    code, doc, _ = run_json(["mle", "phylo", "--tree", d("tree4.json"), "--data", d("u4.json")], capsys)
    assert code == 0 and doc["status"] == "ok"
    est = doc["payload"]["estimate"]
    assert est["00000"] == "121/675" and est["01101"] == "11/184"
    assert doc["diagnostics"]["cross_check"] == {"tfp": True, "horn": True}
    assert doc["diagnostics"]["residual"]["margins"] == "0/1"


@pytest.mark.parametrize("method", ["direct", "horn", "tfp"])
def test_mle_phylo_methods_agree(method):
    res = cli.run(["mle", "phylo", "--tree", d("tree4.json"), "--data", d("u4.json"),
                   "--method", method])
    assert res.exit_code == 0
    assert jsonio.jsonable(res.payload["estimate"])["10101"] == "231/4600"
    assert all(res.diagnostics["cross_check"].values())


def test_mle_delpezzo_matches_loglinear():
    cf = cli.run(["mle", "delpezzo", "--label", "3", "--data", d("cubic_data.json")])
    it = cli.run(["mle", "loglinear", "--model", d("cubic.json"), "--data", d("cubic_data.json")])
    assert cf.exit_code == it.exit_code == 0
    assert it.payload["converged"]
    diff = max(abs(a - b) for a, b in zip(cf.payload["estimate"], it.payload["estimate"]))
    assert diff < 1e-8
    assert len(cf.diagnostics["real_roots"]) >= 1


def test_mle_tfp_and_generators():
    res = cli.run(["mle", "tfp", "--config", d("tfp_tripods.json"), "--data", d("tfp_data.json")])
    assert res.exit_code == 0
    assert res.diagnostics == {"exact": True, "margins_match": True, "slice_minors_zero": True}
    gens = cli.run(["generators", "tfp", "--config", d("tfp_five_leaf.json")])
    assert gens.diagnostics == {"count": 20, "lifts": 8, "quads": 12}


def test_catalog_and_horn():
    cat = cli.run(["catalog"])
    assert cat.diagnostics["count"] == 16
    assert [e["ml_degree"] for e in cat.payload["entries"]][:5] == [3, 4, 4, 4, 3]
    horn = cli.run(["horn", "--tree", d("tree5.json")])
    assert horn.diagnostics == {"shape": [17, 16], "columns_sum_to_zero": True}


def test_discriminant_commands():
    v = cli.run(["discriminant", "veronese", "--C", d("veronese_row5.json")])
    assert v.exit_code == 0
    assert v.payload["pattern"] == ["zero", "nonzero", "nonzero", "nonzero"]
    assert v.payload["drop"] is True
    s = cli.run(["discriminant", "check-singular", "--model", d("quintic5a.json"),
                 "--theta", d("quintic5a_theta.json")])
    assert s.exit_code == 0 and s.payload["singular"] is True


def test_output_is_byte_identical(capsys):
    argv = ["mle", "delpezzo", "--label", "3", "--data", d("cubic_data.json")]
    _, _, first = run_json(argv, capsys)
    _, _, second = run_json(argv, capsys)
    assert first == second


def test_table_format(capsys):
    code = cli.main(["catalog", "--format", "table"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("status: ok")
    assert "payload.entries:" in out and "ml_degree" in out


def test_usage_errors(capsys):
    assert cli.run(["mle"]).exit_code == cli.EXIT_USAGE
    assert cli.run(["nosuchcommand"]).exit_code == cli.EXIT_USAGE
    code, doc, _ = run_json(["mle", "phylo", "--tree", d("tree4.json")], capsys)
    assert code == 2 and doc["error"]["code"] == "usage"


def test_missing_and_malformed_files(tmp_path, capsys):
    code, doc, _ = run_json(["horn", "--tree", str(tmp_path / "absent.json")], capsys)
    assert code == 3 and doc["error"]["code"] == "malformed_input"
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.run(["horn", "--tree", str(bad)]).exit_code == cli.EXIT_MALFORMED


def test_invalid_inputs(tmp_path):
    short = tmp_path / "short.json"
    short.write_text(json.dumps({"counts": [1, 2, 3]}))
    res = cli.run(["mle", "phylo", "--tree", d("tree4.json"), "--data", str(short)])
    assert res.exit_code == cli.EXIT_INVALID
    frac = tmp_path / "frac.json"
    frac.write_text(json.dumps({"counts": [1.5, 2, 3, 4]}))
    assert cli.run(["mle", "delpezzo", "--label", "3", "--data", str(frac)]).exit_code == cli.EXIT_INVALID
    assert cli.run(["mle", "delpezzo", "--label", "10z", "--data", d("cubic_data.json")]).exit_code == cli.EXIT_INVALID
    claw = tmp_path / "claw.json"
    claw.write_text(json.dumps({"edges": [["c", "a"], ["c", "b"], ["c", "e"], ["c", "f"]]}))
    assert cli.run(["horn", "--tree", str(claw)]).exit_code == cli.EXIT_INVALID


def test_boundary_data_is_a_computation_failure(tmp_path):
    zero = tmp_path / "zero.json"
    labels = ("00000", "11000", "00011", "11011", "10110", "10101", "01110", "01101")
    zero.write_text(json.dumps({"counts": {l: (0 if l[2] == "1" else 3) for l in labels}}))
    res = cli.run(["mle", "phylo", "--tree", d("tree4.json"), "--data", str(zero)])
    assert res.exit_code == cli.EXIT_COMPUTATION
    assert res.as_dict()["error"]["code"] == "computation_failed"


def test_selftest_filter():
    res = cli.run(["selftest", "--filter", "table3"])
    assert res.exit_code == 0
    assert res.diagnostics["total"] == 8 and res.diagnostics["failed"] == []
    assert cli.run(["selftest", "--filter", "no-such-group"]).exit_code == cli.EXIT_USAGE


def test_selftest_failure_exit_code(monkeypatch):
    def broken(rng):
        raise AssertionError("deliberately broken")

    monkeypatch.setattr(selftest, "REGISTRY", selftest.REGISTRY + [selftest.Check("zz", "broken", broken)])
    res = cli.run(["selftest", "--filter", "zz."])
    assert res.exit_code == cli.EXIT_SELFTEST
    assert res.diagnostics["failed"] == ["zz.broken"]


def test_console_script_runs():
    out = subprocess.run([sys.executable, "-m", "toricmle.cli", "catalog"],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 0
    assert json.loads(out.stdout)["diagnostics"]["count"] == 16
