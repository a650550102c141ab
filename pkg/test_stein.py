"""Stein conditions, surgery certificates, class enumeration and corollaries."""

import itertools

import pytest
from sympy import Matrix

from chain_algebra import PresentedGroup
from errors import CochainError, EnumerationLimitError, ShadowInputError, ValidationError
from ilp import FEASIBLE, INFEASIBLE, ilp_feasible
from invariants import euler_cochain, up_down_cochain
from shadow_core import generate_pn, negate_gleams
from stein import (
    build_genfo_problem,
    check_genfo,
    check_lift,
    check_mainteo,
    emit_surgery_certificate,
    enumerate_split_classes,
    enumerate_stein_classes,
    minimal_genus_check,
    pn_report,
    spine_report,
    zigzag_bounds,
)


def one_region_oracle(shadow):
    """Feasibility of the first condition on a one-region shadow by brute force over labellings."""
    const = 2 * euler_cochain(shadow).values[0] + shadow.regions[0].gleam2
    fewest_odd = min(
        sum(x % 2 for x in up_down_cochain(shadow, choice).values)
        for choice in itertools.product((0, 1), repeat=shadow.n_vertices)
    )
    return fewest_odd <= -const


def test_sphere_spine_is_feasible_with_zero_lift(shadow, settings):
    s = shadow("sphere_spine.bsh")
    check = check_mainteo(s, settings)
    assert check.verdict == FEASIBLE
    assert check.ud2 == (0, 0)
    certificate = emit_surgery_certificate(s, check.ud2)
    assert certificate.framing == (-1, -1, -1)
    assert certificate.hplus == (0, 0, 0)
    assert certificate.to_dict()["class_shift"] == [0, 0, 0]


def test_solid_torus_witness(shadow, settings):
    s = shadow("spine_solid_torus.bsh")
    check = check_mainteo(s, settings)
    assert check.verdict == FEASIBLE
    assert check.choice == (0, 1)
    assert check.ud2 == (0, 0, 0, 0)
    data = check.to_dict()
    assert data["solver"]["witness"] == {"a0": 0, "a1": 1, "t0": 0, "t1": 0, "t2": 0, "t3": 0}
    assert data["constraints"]["name"] == "solid-torus-spine: Eul+gl+dUD<=0"
    assert emit_surgery_certificate(s, check.ud2).framing == (-1, -1)


def test_pn2_certificate(shadow, settings):
    s = shadow("f1_pn2.bsh")
    check = check_mainteo(s, settings)
    assert check.verdict == FEASIBLE
    assert sum(check.ud2) == 1
    certificate = emit_surgery_certificate(s, check.ud2)
    assert certificate.framing == (-1,)
    assert zigzag_bounds(s, check.ud2) == [0]


def test_positive_gleam_blocks_the_condition(shadow, settings):
    s = shadow("sphere_spine.bsh").with_gleams([-2, -2, 2])
    check = check_mainteo(s, settings)
    assert check.verdict == INFEASIBLE
    assert check.ud2 is None


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_pn_family_matches_labelling_oracle(n, settings):
    for target in (generate_pn(n), negate_gleams(generate_pn(n))):
        check = check_mainteo(target, settings)
        assert (check.verdict == FEASIBLE) == one_region_oracle(target)
        assert check.verdict == (FEASIBLE if n >= 2 else INFEASIBLE)
        if check.verdict == FEASIBLE:
            parities = tuple(x % 2 for x in up_down_cochain(target, check.choice).values)
            assert tuple(x % 2 for x in check.ud2) == parities
            emit_surgery_certificate(target, check.ud2)


def test_certificate_splits_shift_the_class(shadow):
    s = shadow("sphere_spine.bsh").with_gleams([-2, -2, -4])
    assert zigzag_bounds(s, (0, 0)) == [0, 0, 2]
    certificate = emit_surgery_certificate(s, (0, 0), splits=[(0, 0), (0, 0), (1, 1)])
    assert certificate.framing == (-1, -1, -3)
    assert certificate.hminus == (0, 0, 1)
    assert certificate.class_shift.values == (0, 0, -1)


def test_certificate_input_errors(shadow):
    sphere = shadow("sphere_spine.bsh")
    with pytest.raises(ShadowInputError):
        emit_surgery_certificate(sphere, (0, 0, 0))
    with pytest.raises(ShadowInputError):
        emit_surgery_certificate(sphere, (2, 0))
    with pytest.raises(ShadowInputError):
        emit_surgery_certificate(sphere, (0, 0), splits=[(1, 0), (0, 0), (0, 0)])
    with pytest.raises(ValidationError) as info:
        emit_surgery_certificate(shadow("spine_solid_torus.bsh"), (1, 0, 0, 0))
    assert info.value.code == "u_parity"


def test_enumerate_classes_on_sphere(shadow, settings):
    s = shadow("sphere_spine.bsh").with_gleams([-2, -2, -4])
    found = enumerate_stein_classes(s, (0, 0), settings)
    assert found["bounds"] == [0, 0, 2]
    assert found["splits"] == 3
    assert found["zero_splits"] == 1
    assert len(found["classes"]) == 2
    assert found["h2"]["group"] == "Z"


def test_enumerate_classes_checks_the_lift(shadow, settings):
    s = shadow("sphere_spine.bsh")
    with pytest.raises(ValidationError) as info:
        enumerate_stein_classes(s, (1, 0), settings)
    assert info.value.code == "u_parity"
    with pytest.raises(ShadowInputError):
        enumerate_stein_classes(s, (-2, 0), settings)
    with pytest.raises(ShadowInputError):
        enumerate_stein_classes(s, (0, 0, 0), settings)
    assert check_lift(s, [2, 0]) == (2, 0)


def test_enumerate_split_classes_in_torsion_group():
    group = PresentedGroup(Matrix([[3]]))
    found = enumerate_split_classes(group, [4], limit=10)
    assert found["classes"] == [{"class": [2], "hminus": [1]}, {"class": [1], "hminus": [2]}]
    assert found["zero_splits"] == 2
    assert found["splits"] == 5
    with pytest.raises(EnumerationLimitError):
        enumerate_split_classes(group, [5], limit=3)


def test_genfo_micro_instances():
    feasible = ilp_feasible(build_genfo_problem([[-1]], [1], [0], [0]), cap=4)
    assert feasible.verdict == FEASIBLE
    assert feasible.values == (1, 0)
    blocked = ilp_feasible(build_genfo_problem([[1]], [1], [0], [0]), cap=4)
    assert blocked.verdict == INFEASIBLE
    assert blocked.certificate["kind"] == "farkas"
    trivial = ilp_feasible(build_genfo_problem([[1]], [0], [0], [0]), cap=4)
    assert trivial.values == (0, 0)


def test_check_genfo_on_embedded_solid_torus(shadow, settings):
    report = check_genfo(shadow("solid_torus_embedded.bsh"), settings=settings)
    assert report["verdict"] == FEASIBLE
    assert report["bplus"] == [0, 0, 0, 0]
    assert report["rewritten"]["u2"] == [1, 1, 1, 1]


def test_check_genfo_needs_embedding(shadow):
    with pytest.raises(ShadowInputError):
        check_genfo(shadow("spine_solid_torus.bsh"))


def test_spine_report_statuses(shadow):
    assert spine_report(shadow("seed_one_vertex.bsh"))["status"] == "not a spine"
    sphere = spine_report(shadow("sphere_spine.bsh"))
    assert sphere["is_spine"]
    assert sphere["status"] == "condition not met"
    torus = spine_report(shadow("spine_solid_torus.bsh"))
    assert torus["status"] == "certificates emitted"
    assert torus["boundary_euler"] == 0
    assert torus["spine_choice"] == [1, 0]
    negative = torus["certificates"]["negative"]
    assert [r["framing"] for r in negative["regions"]] == [-1, -1]


def test_spine_report_ignores_input_gleams(shadow):
    s = shadow("spine_solid_torus.bsh")
    curved = spine_report(s.with_gleams([2, -2]))
    assert curved["is_spine"]
    assert not curved["gleam_flat"]
    assert curved["status"] == "certificates emitted"
    assert curved["certificates"] == spine_report(s)["certificates"]


def test_minimal_genus_on_sphere_spine(shadow, settings):
    report = minimal_genus_check(shadow("sphere_spine.bsh"), [0, 0, 1], settings)
    assert report["status"] == "adjunction-tight"
    assert report["chi"] == 0
    assert report["self_intersection"] == 0
    assert report["c1"] == 0
    assert report["genus"] == 1


def test_minimal_genus_hypothesis_unmet(shadow, settings):
    s = shadow("sphere_spine.bsh").with_gleams([-2, -2, 2])
    report = minimal_genus_check(s, [0, 0, 1], settings)
    assert report["stein"] == INFEASIBLE
    assert report["status"] == "hypothesis unmet"


@pytest.mark.parametrize("z", [[0, 0, 0], [0, 0, -1], [1, 0, 0], [0, 1]])
def test_minimal_genus_rejects_bad_cycles(shadow, z):
    with pytest.raises(CochainError):
        minimal_genus_check(shadow("sphere_spine.bsh"), z)


def test_pn_report_two(settings):
    report = pn_report(2, settings)
    assert report["vertices"] == 2
    positive = report["positive"]
    assert positive["verdict"] == FEASIBLE
    assert positive["expected_min_classes"] == 1
    assert positive["classes_found"] == 0
    assert positive["shortfall"] == 1
    assert report["negative"]["expected_min_classes"] == 0
