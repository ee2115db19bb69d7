from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from invgh.gdeg import GDeg, gdeg_of_monomial, parse_gdeg
from invgh.lang import EQ_ZERO, NEQ_ZERO, Assign, If, Program, Seq, Skip, While, parse_program
from invgh.poly import Polynomial
from invgh.templates import enumerate_monomials

ROOT = Path(__file__).resolve().parent.parent
BENCH = ROOT / "bench"

# -- acceptance summary -------------------------------------------------------------

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# -- fixtures -----------------------------------------------------------------------

def load(name: str) -> Program:
    return parse_program((BENCH / name).read_text())


@pytest.fixture(scope="session")
def freefall() -> Program:
    return load("freefall.imp")


@pytest.fixture(scope="session")
def sumpower5() -> Program:
    return load("sumpower5.imp")


@pytest.fixture(scope="session")
def sumpower1() -> Program:
    return load("sumpower1.imp")


P1_TEXT = "-g*t + g*t0 - v + v0 - x*rho + x0*rho"
P2_TEXT = "-g*t^2 + g*t0^2 - 2*t*v + 2*t0*v0 + 2*x - 2*x0"

# g-degrees of the freefall variables written over bases A (acceleration) and T (time)
FREEFALL_AT = {
    "x": (1, 2), "v": (1, 1), "t": (0, 1), "x0": (1, 2), "v0": (1, 1),
    "t0": (0, 1), "a": (0, 1), "dt": (0, 1), "g": (1, 0), "rho": (0, -1),
}


def at_gamma(table=FREEFALL_AT) -> dict:
    bases = {}
    parse_gdeg("A * T", bases)
    return {v: parse_gdeg(f"A^{a} * T^{t}", bases) for v, (a, t) in table.items()}


# -- random programs ----------------------------------------------------------------

VARS = ("x", "y", "z", "w")

_BASES: dict = {}
TYPED_GAMMA = {
    "x": parse_gdeg("T", _BASES),
    "y": parse_gdeg("T", _BASES),
    "z": parse_gdeg("L", _BASES),
    "w": parse_gdeg("L * T^-1", _BASES),
}
_MONOS = enumerate_monomials(VARS, 2)
_BY_DEG: dict = {}
for _m in _MONOS:
    _BY_DEG.setdefault(gdeg_of_monomial(TYPED_GAMMA, _m), []).append(_m)
GH_DEGREES = list(_BY_DEG)

coeffs = st.integers(-3, 3).map(Fraction)


@st.composite
def polys(draw, monos=tuple(_MONOS), max_terms=4):
    chosen = draw(st.lists(st.sampled_from(list(monos)), min_size=1, max_size=max_terms, unique=True))
    return Polynomial({m: draw(coeffs) for m in chosen})


@st.composite
def gh_polys(draw, tau: GDeg = None):
    if tau is None:
        tau = draw(st.sampled_from(GH_DEGREES))
    return draw(polys(tuple(_BY_DEG[tau]), 3))


@st.composite
def loop_free(draw, depth=3, typed=False):
    """Random loop-free statement; with ``typed`` it is consistent with TYPED_GAMMA."""
    kinds = ["skip", "assign"] + (["seq", "if"] if depth > 0 else [])
    kind = draw(st.sampled_from(kinds))
    if kind == "skip":
        return Skip()
    if kind == "assign":
        targets = draw(st.lists(st.sampled_from(VARS), min_size=1, max_size=2, unique=True))
        if typed:
            rhs = [draw(gh_polys(TYPED_GAMMA[x])) for x in targets]
        else:
            rhs = [draw(polys()) for _ in targets]
        return Assign(tuple(targets), tuple(rhs))
    if kind == "seq":
        return Seq(draw(loop_free(depth - 1, typed)), draw(loop_free(depth - 1, typed)))
    guard = draw(gh_polys()) if typed else draw(polys())
    return If(guard, draw(loop_free(depth - 1, typed)), draw(loop_free(depth - 1, typed)))


states = st.fixed_dictionaries(
    {v: st.fractions(min_value=-5, max_value=5, max_denominator=5) for v in VARS}
)


@st.composite
def small_programs(draw):
    """Random programs possibly containing one bounded counter loop."""
    body = draw(loop_free(2))
    if draw(st.booleans()):
        loop = While(Polynomial.var("n"), NEQ_ZERO, Seq(body, Assign(("n",), (Polynomial.var("n") - 1,))))
        body = loop
    elif draw(st.booleans()):
        body = While(Polynomial.const(1), EQ_ZERO, body)  # never entered
    return Program(body, VARS + ("n",))
