import json

import pytest

from dwork_bv.cli import EXIT_OK, EXIT_PRECISION, EXIT_VALIDATION, JobSpec, Report, main, run


def job(p=7, polys=None, n=2, command="zeta", **overrides):
    polys = polys or [[((3, 0, 0), 1), ((0, 3, 0), 1), ((0, 0, 3), 1)]]
    return {
        "command": command,
        "field": {"p": str(p), "a": "1"},
        "variety": {"n": str(n), "polys": [[{"c": str(c), "e": [str(x) for x in e]} for e, c in f] for f in polys]},
        "overrides": {k: str(v) for k, v in overrides.items()},
    }


CONIC = [[((2, 0, 0), 1), ((0, 2, 0), 1), ((0, 0, 2), 1)]]


def test_jobspec_roundtrip():
    j = JobSpec.from_json(job(N=5))
    assert JobSpec.from_json(j.to_json()) == j
    assert j.overrides == {"N": 5}


@pytest.mark.parametrize(
    "patch",
    [
        lambda d: d["field"].update(p="9"),
        lambda d: d["field"].update(p="seven"),
        lambda d: d.update(command="explode"),
        lambda d: d["overrides"].update(zz="1"),
        lambda d: d["variety"].update(polys=[]),
        lambda d: d.pop("field"),
    ],
)
def test_bad_jobs_are_validation_errors(patch):
    d = job()
    patch(d)
    try:
        j = JobSpec.from_json(d)
    except ValueError:
        return
    assert run(j.command, j).exit_code == EXIT_VALIDATION


def test_params_report():
    rep = run("params", JobSpec.from_json(job()))
    assert rep.exit_code == EXIT_OK
    r = rep.result
    assert (r["p"], r["M"], r["N"], r["b"]) == ("7", "42", "4", "1")
    assert r["expected_degree"] == "2"


def test_count_and_zeta_agree():
    j = JobSpec.from_json(job())
    c = run("count", j)
    z = run("zeta", j)
    assert c.result["P"] == z.result["P"] == ["1", "1", "7"]
    assert z.result["counts_match"] is True and z.exit_code == EXIT_OK


def test_conic_charpoly():
    rep = run("charpoly", JobSpec.from_json(job(polys=CONIC)))
    assert rep.exit_code == EXIT_OK
    assert rep.result["dim_H0"] == "0"
    assert [c["value"] for c in rep.result["det_1_minus_T_psi"]] == ["1"]


def test_precision_floor_exit():
    rep = run("charpoly", JobSpec.from_json(job(N=2, floor=9)))
    assert rep.exit_code == EXIT_PRECISION and rep.reason == "precision floor"


def test_singular_and_ceiling_exits():
    # x^3 + y^3 + z^3 is a cube of a linear form in characteristic 3
    rep = run("zeta", JobSpec.from_json(job(p=3)))
    assert rep.exit_code == EXIT_VALIDATION and "singular" in rep.result["detail"]
    rep = run("count", JobSpec.from_json(job(ceiling=100)))
    assert rep.exit_code == EXIT_VALIDATION and rep.reason == "enumeration ceiling"


def test_verify_passes():
    rep = run("verify", JobSpec.from_json(job(polys=CONIC)))
    assert rep.exit_code == EXIT_OK
    assert all(row["pass"] for row in rep.result["checks"])


def test_reports_are_deterministic():
    j = JobSpec.from_json(job())
    a, b = run("zeta", j), run("zeta", JobSpec.from_json(job()))
    assert a.dumps(timing=False) == b.dumps(timing=False)
    assert "seconds" in a.to_json()["timing"]
    assert Report.from_json(json.loads(a.dumps())).dumps() == a.dumps()


def test_main_writes_json(tmp_path):
    inp = tmp_path / "job.json"
    out = tmp_path / "out.json"
    inp.write_text(json.dumps(job(polys=CONIC, command="count")))
    assert main(["--input", str(inp), "--json-out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["result"]["P"] == ["1"]
    assert main(["--input", str(inp), "--command", "params", "--precision", "6", "--json-out", str(out)]) == 0
    assert json.loads(out.read_text())["result"]["N"] == "6"
    inp.write_text("{not json")
    assert main(["--input", str(inp), "--json-out", str(out)]) == EXIT_VALIDATION
