from itertools import product
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FREEFALL_AT
from invgh.gdeg import gdeg_of_monomial, infer_gamma, parse_gdeg
from invgh.poly import Monomial, ParamPool, grlex_key
from invgh.templates import EmptyTemplate, TemplateSpec, build_template, enumerate_monomials, realizable_taus


def brute_force_at(variables, degree, target):
    """Monomials of degree <= d whose (A, T) exponent sum equals ``target``."""
    out = set()
    for exps in product(range(degree + 1), repeat=len(variables)):
        if sum(exps) > degree:
            continue
        a = sum(e * FREEFALL_AT[v][0] for v, e in zip(variables, exps))
        t = sum(e * FREEFALL_AT[v][1] for v, e in zip(variables, exps))
        if (a, t) == target:
            out.add(Monomial((v, e) for v, e in zip(variables, exps) if e))
    return out


def test_full_template_sizes(freefall):
    vs = freefall.declared_vars
    assert len(enumerate_monomials(vs, 2)) == 66
    assert len(enumerate_monomials(vs, 3)) == 286


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 4))
def test_full_enumeration_is_exhaustive(n, d):
    vs = [f"v{i}" for i in range(n)]
    monos = enumerate_monomials(vs, d)
    assert len(monos) == comb(n + d, d) == len(set(monos))
    assert monos == sorted(monos, key=grlex_key(vs))


@pytest.mark.parametrize("degree,target,size", [(2, "v", 8), (3, "x", None)])
def test_freefall_gh_monomials_match_oracle(freefall, degree, target, size):
    inf = infer_gamma(freefall)
    vs = freefall.declared_vars
    tau = inf.gamma[target]
    got = enumerate_monomials(vs, degree, inf.gamma, tau)
    want = brute_force_at(vs, degree, FREEFALL_AT[target])
    assert set(got) == want
    if size is not None:
        assert len(got) == size


def test_template_labels_and_order():
    pool = ParamPool()
    t, params = build_template(TemplateSpec(("x", "y"), 1), pool)
    assert [a.label for a in params] == ["a_1", "a_y", "a_x"]
    assert len(t.terms) == 3 and t.degree() == 1


def test_empty_gh_template():
    bases = {}
    gamma = {"x": parse_gdeg("T", bases)}
    with pytest.raises(EmptyTemplate):
        build_template(TemplateSpec(("x",), 2, gamma, parse_gdeg("T^3", bases)), ParamPool())


def test_realizable_taus_cover_every_monomial(freefall):
    inf = infer_gamma(freefall)
    taus = realizable_taus(freefall.declared_vars, 2, inf.gamma)
    total = sum(len(enumerate_monomials(freefall.declared_vars, 2, inf.gamma, t)) for t in taus)
    assert total == 66
    assert len(set(taus)) == len(taus)
    assert gdeg_of_monomial(inf.gamma, Monomial()) in taus
