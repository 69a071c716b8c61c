"""Command-line behavior: exit codes, output formats, determinism."""

import json

import pytest

from mdvkit.cli import (
    EXIT_CHECK_FAILED,
    EXIT_INVALID,
    EXIT_OK,
    main,
)

GOOD_SCENARIO = {
    "name": "cli-good",
    "dim": 2,
    "seed": 3,
    "operators": [
        {"affine": {"M": [[0.5, 0.0], [0.0, 0.5]], "b": [0.2, 0.0]}},
        {"affine": {"M": [[0.0, 0.0], [0.0, 0.0]], "b": [0.0, 0.3]}},
    ],
    "checks": [
        {"name": "range_formula_composition"},
        {"name": "norm_bound_composition", "ops": [0, 1]},
    ],
}

FAILING_SCENARIO = {
    "name": "cli-bad",
    "dim": 2,
    "seed": 3,
    "operators": [],
    "checks": [
        # overstated cocoercivity modulus: check applies and fails
        {"name": "cocoercive_averaged_equivalence", "mu": 5.0,
         "A": {"Q": [[2.0, 0.0], [0.0, 0.5]], "q": [0.0, 0.0]}, "samples": 100}
    ],
}


def _dump(tmp_path, payload, name="scn.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


def test_verify_scenario_ok(tmp_path, capsys):
    rc = main(["verify", _dump(tmp_path, GOOD_SCENARIO)])
    assert rc == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["kind"] == "verify" and payload["summary"]["failed"] == 0
    assert payload["seed"] == 3  # scenario seed wins when no flag


def test_verify_failing_check_exits_one(tmp_path, capsys):
    rc = main(["verify", _dump(tmp_path, FAILING_SCENARIO)])
    assert rc == EXIT_CHECK_FAILED
    payload = json.loads(capsys.readouterr().out)
    assert payload["summary"]["failed"] == 1


def test_verify_seed_flag_overrides(tmp_path, capsys):
    rc = main(["verify", _dump(tmp_path, GOOD_SCENARIO), "--seed", "99"])
    assert rc == EXIT_OK
    assert json.loads(capsys.readouterr().out)["seed"] == 99


def test_estimate_json_and_csv(tmp_path, capsys):
    path = _dump(tmp_path, GOOD_SCENARIO)
    assert main(["estimate", path]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert [e["label"] for e in payload["estimates"]] == ["op[0]", "op[1]"]
    assert payload["estimates"][0]["method"] == "exact_affine"

    assert main(["estimate", path, "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "label,method,converged,iterations,residual,norm"
    assert len(lines) == 3


def test_estimate_honors_estimator_block(tmp_path, capsys):
    scn = dict(GOOD_SCENARIO)
    scn["operators"] = [{"compose": [
        {"projector": {"ball": {"center": [0.0, 0.0], "radius": 1.0}}},
        {"affine": {"M": [[1.0, 0.0], [0.0, 1.0]], "b": [0.5, 0.0]}},
    ]}]
    scn["estimator"] = {"x0": [2.0, 2.0], "max_iter": 9, "tol": 1e-12}
    assert main(["estimate", _dump(tmp_path, scn)]) == EXIT_OK
    est = json.loads(capsys.readouterr().out)["estimates"][0]
    assert est["method"] == "residual_iteration"
    assert est["iterations"] == 9 and est["converged"] is False
    # the command-line cap takes precedence over the scenario block
    assert main(["estimate", _dump(tmp_path, scn), "--max-iter", "4"]) == EXIT_OK
    est = json.loads(capsys.readouterr().out)["estimates"][0]
    assert est["iterations"] == 4


def test_report_roundtrip(tmp_path, capsys):
    scn_path = _dump(tmp_path, GOOD_SCENARIO)
    out_path = str(tmp_path / "report.json")
    assert main(["verify", scn_path, "--out", out_path]) == EXIT_OK
    assert capsys.readouterr().out == ""  # written to the file, not stdout

    assert main(["report", out_path]) == EXIT_OK
    csv_text = capsys.readouterr().out
    assert csv_text.splitlines()[0].startswith("check_name,pass,")

    assert main(["report", out_path, "--format", "json"]) == EXIT_OK
    rendered = capsys.readouterr().out
    assert json.loads(rendered)["name"] == "cli-good"


def test_builtin_suite_deterministic(tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert main(["verify", "--builtin-suite", "--seed", "7", "--out", a]) == EXIT_OK
    assert main(["verify", "--builtin-suite", "--seed", "7", "--out", b]) == EXIT_OK
    with open(a, "rb") as fa, open(b, "rb") as fb:
        assert fa.read() == fb.read()


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "/nonexistent/scenario.json"],
        ["verify"],                      # neither path nor --builtin-suite
        ["estimate", "/nonexistent/scenario.json"],
        ["report", "/nonexistent/report.json"],
    ],
)
def test_invalid_inputs_exit_two(argv, capsys):
    assert main(argv) == EXIT_INVALID
    assert "error:" in capsys.readouterr().err


def test_builtin_suite_refuses_extra_scenario(tmp_path, capsys):
    path = _dump(tmp_path, GOOD_SCENARIO)
    assert main(["verify", path, "--builtin-suite"]) == EXIT_INVALID


def test_scenario_without_checks_rejected_by_verify(tmp_path, capsys):
    scn = dict(GOOD_SCENARIO)
    scn.pop("checks")
    assert main(["verify", _dump(tmp_path, scn)]) == EXIT_INVALID
    assert "no checks" in capsys.readouterr().err


def test_malformed_scenario_exits_two(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["verify", str(p)]) == EXIT_INVALID
    assert "malformed JSON" in capsys.readouterr().err


def test_bad_flags_exit_two(capsys):
    assert main(["no-such-command"]) == EXIT_INVALID
    assert main([]) == EXIT_INVALID
    assert main(["--help"]) == EXIT_OK
