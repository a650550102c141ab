"""Exact integer feasibility: certificates, witnesses and the cap policy."""

import itertools
import logging
import random

import pytest

from errors import SolverError
from ilp import (
    FEASIBLE,
    INFEASIBLE,
    UNKNOWN,
    FeasibilityProblem,
    farkas_certificate,
    ilp_feasible,
    propagate_bounds,
    solve_with_cap_policy,
)


def random_problem(rng):
    problem = FeasibilityProblem("random")
    n = rng.randint(1, 5)
    for j in range(n):
        problem.add_variable(f"x{j}", lower=-3, upper=3)
    for i in range(rng.randint(1, 4)):
        coeffs = {j: rng.randint(-3, 3) for j in rng.sample(range(n), rng.randint(1, n))}
        problem.add_inequality(coeffs, rng.randint(-4, 4), f"row {i}")
    for i in range(rng.randint(0, 2)):
        problem.add_parity(rng.sample(range(n), rng.randint(1, n)), rng.randint(0, 1), f"parity {i}")
    return problem


def brute_force(problem):
    order = sorted(range(-3, 4), key=lambda v: (abs(v), v))
    for values in itertools.product(order, repeat=len(problem.variables)):
        if not problem.violations(values):
            return values
    return None


def test_contradiction_without_variables():
    problem = FeasibilityProblem("empty")
    problem.add_inequality({}, -1, "0 <= -1")
    result = ilp_feasible(problem, cap=1)
    assert result.verdict == INFEASIBLE
    assert result.certificate["kind"] == "farkas"
    assert result.complete


def test_parity_pushes_witness_to_even_value():
    problem = FeasibilityProblem("even")
    t = problem.add_variable("t", lower=0)
    problem.add_parity([t], 0, "t even")
    problem.add_inequality({t: -1}, -2, "t >= 2")
    result = ilp_feasible(problem, cap=4)
    assert result.verdict == FEASIBLE
    assert result.witness == {"t": 2}
    assert not result.complete


def test_farkas_certificate_multipliers():
    problem = FeasibilityProblem("split")
    x = problem.add_variable("x")
    y = problem.add_variable("y")
    problem.add_inequality({x: 1, y: 1}, 1, "x + y <= 1")
    problem.add_inequality({x: -1}, -1, "x >= 1")
    problem.add_inequality({y: -1}, -1, "y >= 1")
    certificate = farkas_certificate(problem)
    assert certificate["kind"] == "farkas"
    assert {m["row"] for m in certificate["multipliers"]} == {"x + y <= 1", "x >= 1", "y >= 1"}
    assert all(m["y"] == "1" for m in certificate["multipliers"])


def test_relaxation_feasible_has_no_farkas_certificate():
    problem = FeasibilityProblem("box")
    x = problem.add_variable("x", lower=0, upper=3)
    problem.add_inequality({x: 1}, 2)
    assert farkas_certificate(problem) is None


def test_integer_bounds_close_a_fractional_gap():
    problem = FeasibilityProblem("half")
    x = problem.add_variable("x")
    problem.add_inequality({x: 2}, 1, "2x <= 1")
    problem.add_inequality({x: -2}, -1, "2x >= 1")
    assert farkas_certificate(problem) is None
    lo, hi, empty = propagate_bounds(problem)
    assert empty
    assert (lo[x], hi[x]) == (1, 0)
    result = ilp_feasible(problem, cap=2)
    assert result.verdict == INFEASIBLE
    assert result.certificate["kind"] == "bounds"


def test_conflicting_parities_need_exhaustion():
    problem = FeasibilityProblem("parities")
    a = problem.add_variable("a", lower=0, upper=3)
    b = problem.add_variable("b", lower=0, upper=3)
    problem.add_parity([a, b], 0, "even")
    problem.add_parity([a, b], 1, "odd")
    result = ilp_feasible(problem, cap=3)
    assert result.verdict == INFEASIBLE
    assert result.certificate["kind"] == "exhaustion"
    truncated = ilp_feasible(problem, cap=3, node_limit=3)
    assert truncated.verdict == UNKNOWN
    assert not truncated.complete


def test_repeated_parity_indices_cancel():
    problem = FeasibilityProblem()
    problem.add_variable("a", lower=0, upper=1)
    problem.add_variable("b", lower=0, upper=1)
    problem.add_parity([0, 0, 1], 1)
    assert problem.parities[0].indices == (1,)
    assert ilp_feasible(problem, cap=1).values == (0, 1)


def test_agrees_with_brute_force():
    rng = random.Random(2024)
    for _ in range(60):
        problem = random_problem(rng)
        expected = brute_force(problem)
        result = ilp_feasible(problem, cap=4)
        assert result.complete or result.verdict == FEASIBLE
        if expected is None:
            assert result.verdict == INFEASIBLE
        else:
            assert result.verdict == FEASIBLE
            assert result.values == expected
            assert not problem.violations(result.values)


def test_cap_doubling_reaches_witness(caplog):
    problem = FeasibilityProblem("far")
    problem.add_variable("x", lower=5)
    with caplog.at_level(logging.WARNING, logger="ilp"):
        result = solve_with_cap_policy(problem, cap=1, ceiling=8)
    assert result.verdict == FEASIBLE
    assert result.witness == {"x": 5}
    assert result.cap == 8
    assert len(result.warnings) == 3
    assert "retrying with cap 2" in result.warnings[0]
    assert any("UNKNOWN at cap 1" in record.getMessage() for record in caplog.records)


def test_cap_ceiling_leaves_unknown():
    problem = FeasibilityProblem("farther")
    problem.add_variable("x", lower=20)
    result = solve_with_cap_policy(problem, cap=1, ceiling=4)
    assert result.verdict == UNKNOWN
    assert result.warnings[-1] == "farther: UNKNOWN at cap ceiling 4"


def test_problem_construction_errors():
    problem = FeasibilityProblem()
    with pytest.raises(SolverError):
        problem.add_variable("x", lower=2, upper=1)
    problem.add_variable("x")
    with pytest.raises(SolverError):
        problem.add_inequality({3: 1}, 0)
    with pytest.raises(SolverError):
        problem.add_parity([5], 1)
    with pytest.raises(SolverError):
        ilp_feasible(problem, cap=-1)


def test_problem_to_dict_names_variables():
    problem = FeasibilityProblem("named")
    a = problem.add_variable("a", lower=0, upper=1)
    t = problem.add_variable("t", lower=0)
    problem.add_inequality({a: 1, t: -2}, 0, "a <= 2t")
    problem.add_parity([a, t], 1, "odd")
    data = problem.to_dict()
    assert data["inequalities"] == [{"label": "a <= 2t", "coeffs": {"a": 1, "t": -2}, "rhs": 0}]
    assert data["parities"] == [{"label": "odd", "variables": ["a", "t"], "residue": 1}]
    assert data["variables"][1] == {"name": "t", "lower": 0, "upper": None}
