"""End-to-end runs of the command-line verbs."""

import hashlib
import io
import json

import pytest

from conftest import FIXTURES
from main import EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK, add_halves, render_text, run


def invoke(*argv, stdin=None):
    out = io.StringIO()
    code = run(list(argv), stdout=out, stdin=io.StringIO(stdin) if stdin is not None else None)
    return code, out.getvalue()


def invoke_json(*argv, stdin=None):
    code, text = invoke(*argv, stdin=stdin)
    return code, json.loads(text)


def test_validate_reports_branching_locus():
    code, report = invoke_json("validate", "bad_branching.bsh")
    assert code == EXIT_INPUT
    assert report["verdict"] == "ERROR"
    assert report["data"]["code"] == "branching"
    assert report["data"]["locus"] == "edge 0"


def test_validate_digest_is_of_input_bytes():
    code, report = invoke_json("validate", str(FIXTURES / "seed_one_vertex.bsh"))
    assert code == EXIT_OK
    assert report["verdict"] == "VALID"
    digest = hashlib.sha256((FIXTURES / "seed_one_vertex.bsh").read_bytes()).hexdigest()
    assert report["input_digest"] == digest


def test_stein_check_emits_certificate():
    code, report = invoke_json("stein-check", "spine_solid_torus.bsh")
    assert code == EXIT_OK
    assert report["verdict"] == "FEASIBLE"
    assert [r["framing"] for r in report["data"]["certificate"]["regions"]] == [-1, -1]


def test_stein_check_negative_exit(fixture_text):
    text = fixture_text("sphere_spine.bsh").replace("region 2 gleam2 0", "region 2 gleam2 2")
    code, report = invoke_json("stein-check", "-", stdin=text)
    assert code == EXIT_NEGATIVE
    assert report["verdict"] == "INFEASIBLE"
    assert report["data"]["solver"]["certificate"]["kind"] == "farkas"


def test_generate_then_validate_pipeline():
    code, text = invoke("generate-pn", "--n", "3")
    assert code == EXIT_OK
    assert text.startswith("shadow pn-3\n")
    code, report = invoke_json("validate", "-", stdin=text)
    assert code == EXIT_OK
    assert report["data"]["vertices"] == 3


def test_generate_pn_report():
    code, report = invoke_json("generate-pn", "--n", "2", "--report")
    assert code == EXIT_OK
    assert report["input_digest"] is None
    assert report["data"]["report"]["positive"]["verdict"] == "FEASIBLE"


@pytest.mark.parametrize(
    "argv",
    [
        ("stein-check", "sphere_spine.bsh"),
        ("invariants", "spine_solid_torus.bsh"),
        ("certificate", "f1_pn2.bsh"),
        ("enumerate-classes", "spine_solid_torus.bsh"),
        ("spine-report", "spine_solid_torus.bsh"),
        ("stein-embed-check", "solid_torus_embedded.bsh"),
        ("front-to-shadow", "two_eyes.fr", "--embedding"),
        ("generate-pn", "--n", "3", "--report"),
    ],
)
def test_reports_are_deterministic(argv):
    first = invoke(*argv)
    second = invoke(*argv)
    assert first == second
    assert "timing" not in json.loads(first[1])


def test_halves_render_doubled_values():
    code, report = invoke_json("certificate", "f1_pn2.bsh", "--halves")
    assert code == EXIT_OK
    assert sorted(report["data"]["ud"]) == ["0", "0", "0", "0.5"]
    code, report = invoke_json("invariants", "sphere_spine.bsh", "--halves")
    assert report["data"]["regions"][0]["gleam"] == "-1"


def test_add_halves_handles_negative_odd_values():
    assert add_halves({"gleam2": -3, "other2": 5}) == {"gleam2": -3, "gleam": "-1.5", "other2": 5}
    assert add_halves([{"u2": [1, 2]}]) == [{"u2": [1, 2], "u": ["0.5", "1"]}]


def test_text_output():
    code, text = invoke("validate", "seed_one_vertex.bsh", "--text")
    assert code == EXIT_OK
    rows = dict(line.split(None, 1) for line in text.splitlines() if len(line.split(None, 1)) == 2)
    assert rows["verdict"] == "VALID"
    assert rows["data.vertices"] == "1"
    assert render_text({"a": None, "b": [1, 2]}) == "a  -\nb  1 2\n"


def test_spine_report_and_genus_check_verdicts():
    code, report = invoke_json("spine-report", "seed_one_vertex.bsh")
    assert (code, report["verdict"]) == (EXIT_NEGATIVE, "NOT_SPINE")
    code, report = invoke_json("spine-report", "spine_solid_torus.bsh")
    assert (code, report["verdict"]) == (EXIT_OK, "CERTIFIED")
    code, report = invoke_json("genus-check", "sphere_spine.bsh", "--cycle", "0,0,1")
    assert (code, report["verdict"]) == (EXIT_OK, "TIGHT")


def test_embedded_check():
    code, report = invoke_json("stein-embed-check", "solid_torus_embedded.bsh")
    assert code == EXIT_OK
    assert report["data"]["rewritten"]["iplus"] == [0, 0]


def test_front_to_shadow():
    code, report = invoke_json("front-to-shadow", "two_eyes.fr")
    assert code == EXIT_OK
    assert report["data"]["tb"] == {"A": -1, "B": -1}
    assert report["data"]["shadow"].startswith("shadow two-eyes-cylinder\n")
    code, report = invoke_json("front-to-shadow", "kinked.fr", "--embedding", "--cusp-convention", "statement")
    assert code == EXIT_OK
    assert "[embedding]" in report["data"]["shadow"]
    assert any("hyperbolic points" in w for w in report["warnings"])


@pytest.mark.parametrize(
    "argv",
    [
        ("generate-pn", "--n", "0"),
        ("validate", "no_such_file.bsh"),
        ("genus-check", "sphere_spine.bsh", "--cycle", "1,x"),
        ("front-to-shadow", "unknot.fr"),
        ("enumerate-classes", "sphere_spine.bsh", "--ud2", "1,0"),
        ("enumerate-classes", "sphere_spine.bsh", "--ud2=-2,0"),
        ("certificate", "sphere_spine.bsh", "--ud2", "1,0"),
    ],
)
def test_input_errors_exit_64(argv):
    code, report = invoke_json(*argv)
    assert code == EXIT_INPUT
    assert report["verdict"] == "ERROR"


def test_usage_errors_exit_64():
    assert run(["stein-check", "sphere_spine.bsh", "--cap", "abc"], stdout=io.StringIO()) == EXIT_INPUT
    assert run(["no-such-verb"], stdout=io.StringIO()) == EXIT_INPUT
    assert run(["validate", "--help"], stdout=io.StringIO()) == EXIT_OK
