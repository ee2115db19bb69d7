from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import P1_TEXT, states
from invgh.interp import (
    BudgetExhausted,
    Terminated,
    aligned_variables,
    check_postcondition,
    compile_poly,
    execute,
)
from invgh.lang import parse_poly, parse_program
from invgh.poly import UnboundVariable


def test_freefall_hand_execution(freefall):
    state = {"x0": 0, "v0": 0, "t0": 0, "a": 3, "dt": 1, "g": 1, "rho": 0, "x": 9, "v": -4, "t": Fraction(1, 2)}
    out = execute(freefall.body, state)
    assert isinstance(out, Terminated)
    assert (out.final["x"], out.final["v"], out.final["t"]) == (-3, -3, 3)
    # init + 4 guard tests + 3 bodies
    assert out.steps == 8


def test_divergence_exhausts_budget():
    c = parse_program("while 0 == 0 { skip; }").body
    out = execute(c, {}, 1000)
    assert isinstance(out, BudgetExhausted)


def test_skip_costs_one_step():
    state = {"x": Fraction(2)}
    assert execute(parse_program("skip;").body, state, 10) == Terminated(state, 1)


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        execute(parse_program("x := y;").body, {"x": 1})


def test_guard_is_exact():
    c = parse_program("if x - 1/3 == 0 { y := 1; } else { y := 2; }").body
    assert execute(c, {"x": Fraction(1, 3), "y": 0}).final["y"] == 1
    assert execute(c, {"x": Fraction(333, 1000), "y": 0}).final["y"] == 2


@settings(max_examples=100, deadline=None)
@given(states)
def test_compiled_polynomials_agree(s):
    for p in (parse_poly("x^2*y - 3*z + 1/2"), parse_poly("w^3")):
        assert compile_poly(p)(s) == p.evaluate(s)


def test_freefall_invariant_holds(freefall):
    p1 = parse_poly(P1_TEXT, list(freefall.declared_vars))
    report = check_postcondition(freefall, p1, aligned=aligned_variables(freefall))
    assert report.passed and report.violations == []
    assert report.terminated > 50


def test_constant_one_fails_every_terminating_run(freefall):
    report = check_postcondition(freefall, parse_poly("1"), trials=30, aligned=aligned_variables(freefall))
    assert not report.passed
    assert len(report.violations) == report.terminated > 0


def test_trivial_assignment_passes():
    report = check_postcondition(parse_program("x := 0;"), parse_poly("x"))
    assert report.passed and report.terminated == 100 and report.vacuous_count == 0


def test_check_is_deterministic(freefall):
    p = parse_poly("x - x0", list(freefall.declared_vars))
    a = check_postcondition(freefall, p, trials=20, aligned=aligned_variables(freefall))
    b = check_postcondition(freefall, p, trials=20, aligned=aligned_variables(freefall))
    assert a == b
    assert check_postcondition(freefall, p, trials=20, seed=1, aligned=aligned_variables(freefall)) != a


def test_aligned_variables_follow_guard_degrees(freefall):
    assert aligned_variables(freefall) == {"t", "t0", "a", "dt"}
