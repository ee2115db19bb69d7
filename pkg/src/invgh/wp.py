"""Backward constraint generation over templates, plus a concrete oracle.

``wpc`` threads a state ``(A, G, C)`` of parameters, goal templates and
ideal-equality constraints backwards through a program.  In GH mode the
quotient templates of the parametric remainder only range over monomials of
the right g-degree, so every goal stays GH.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence, Tuple

from .gdeg import ANY_DEGREE, GDeg, NotGH, gdeg_of_monomial, gdeg_of_poly
from .lang import Assign, If, Seq, Skip, Stmt, While
from .poly import ParamId, ParamPool, Polynomial, Template
from .templates import enumerate_monomials


class ContainsLoop(ValueError):
    pass


class NotGHError(ValueError):
    """A polynomial or template is not generalized homogeneous where it must be."""

    def __init__(self, what: str, witness: Optional[NotGH] = None):
        super().__init__(f"{what} is not generalized homogeneous")
        self.witness = witness


@dataclass(frozen=True)
class EqConstraint:
    """Obligation that ``lhs`` and ``rhs`` generate the same ideal."""

    lhs: Tuple[Template, ...]
    rhs: Tuple[Template, ...]


@dataclass(frozen=True)
class GenState:
    params: Tuple[ParamId, ...] = ()
    goal: Tuple[Template, ...] = ()
    constraints: Tuple[EqConstraint, ...] = ()


@dataclass
class WpContext:
    """Per-session settings: variables for quotient templates, optional Γ, parameter pool."""

    variables: Tuple[str, ...]
    pool: ParamPool = field(default_factory=ParamPool)
    gamma: Optional[Mapping[str, GDeg]] = None
    check_gh: bool = True
    rem_calls: int = 0

    @property
    def is_gh(self) -> bool:
        return self.gamma is not None


def _goal(templates: Iterable[Template]) -> Tuple[Template, ...]:
    return tuple(dict.fromkeys(t for t in templates if not t.is_zero()))


def template_gdeg(gamma: Mapping[str, GDeg], t: Template):
    """Common g-degree of a template's monomials (``ANY_DEGREE`` if zero)."""
    seen = None
    for m in t.terms:
        d = gdeg_of_monomial(gamma, m)
        if seen is None:
            seen = (m, d)
        elif d != seen[1]:
            return NotGH(seen, (m, d))
    return ANY_DEGREE if seen is None else seen[1]


def rem_par(
    params: Tuple[ParamId, ...], f: Template, p: Polynomial, ctx: WpContext
) -> Tuple[Tuple[ParamId, ...], Template]:
    """``f - p*q`` with ``q`` a fresh most-general template of degree deg(f) - deg(p).

    ``q`` is 0 when that degree is negative, when ``p`` is 0, or when no
    monomial has the required g-degree in GH mode.  Quotient parameters are
    labelled by call number and monomial, so the same call in GH and full
    mode yields comparable labels.
    """
    call = ctx.rem_calls
    ctx.rem_calls += 1
    if f.is_zero() or p.is_zero():
        return params, f
    d = f.degree() - p.degree()
    if d < 0:
        return params, f
    if ctx.is_gh:
        fd = template_gdeg(ctx.gamma, f)
        pd = gdeg_of_poly(ctx.gamma, p)
        if isinstance(fd, NotGH):
            raise NotGHError("remainder dividend", fd)
        if isinstance(pd, NotGH):
            raise NotGHError(f"divisor {p}", pd)
        monos = enumerate_monomials(ctx.variables, d, ctx.gamma, fd / pd)
    else:
        monos = enumerate_monomials(ctx.variables, d)
    if not monos:
        return params, f
    fresh = [ctx.pool.fresh(f"r{call}_{m.to_str(ctx.variables)}") for m in monos]
    q = Template.general(monos, fresh)
    return params + tuple(fresh), f - q.mul_poly(p)


def _assert_gh(ctx: WpContext, goal: Sequence[Template]) -> None:
    for t in goal:
        d = template_gdeg(ctx.gamma, t)
        if isinstance(d, NotGH):
            raise NotGHError("goal template", d)


def wpc(c: Stmt, s: GenState, ctx: WpContext) -> GenState:
    """Backward transformer generating ideal-equality constraints for loops."""
    out = _wpc(c, s, ctx)
    if ctx.is_gh and ctx.check_gh:
        _assert_gh(ctx, out.goal)
    return out


def _wpc(c: Stmt, s: GenState, ctx: WpContext) -> GenState:
    if isinstance(c, Skip):
        return s
    if isinstance(c, Assign):
        b = c.binding
        return replace(s, goal=_goal(g.substitute(b) for g in s.goal))
    if isinstance(c, Seq):
        return _wpc(c.first, _wpc(c.second, s, ctx), ctx)
    if isinstance(c, If):
        s1 = _wpc(c.then, s, ctx)
        s2 = _wpc(c.orelse, GenState(s1.params, s.goal, s1.constraints), ctx)
        params = s2.params
        rems = []
        for g in s1.goal:
            params, r = rem_par(params, g, c.guard, ctx)
            rems.append(r)
        goal = _goal([g.mul_poly(c.guard) for g in s2.goal] + rems)
        return GenState(params, goal, s2.constraints)
    if isinstance(c, While):
        s1 = _wpc(c.body, s, ctx)
        return GenState(s1.params, s.goal, s1.constraints + (EqConstraint(s.goal, s1.goal),))
    raise TypeError(f"not a statement: {c!r}")


# -- concrete oracle ------------------------------------------------------------

def _pset(ps: Iterable[Polynomial]) -> Tuple[Polynomial, ...]:
    return tuple(dict.fromkeys(p for p in ps if not p.is_zero()))


def wp_concrete(
    c: Stmt, goal: Sequence[Polynomial], gamma: Optional[Mapping[str, GDeg]] = None
) -> Tuple[Polynomial, ...]:
    """Loop-free backward transformer with the identity remainder.

    With ``gamma`` every intermediate set is checked to be GH, which is the
    restriction of the transformer to GH inputs.
    """
    if gamma is not None:
        for p in goal:
            d = gdeg_of_poly(gamma, p)
            if isinstance(d, NotGH):
                raise NotGHError(str(p), d)
    out = _wp_concrete(c, _pset(goal))
    if gamma is not None:
        for p in out:
            d = gdeg_of_poly(gamma, p)
            if isinstance(d, NotGH):
                raise NotGHError(str(p), d)
    return out


def _wp_concrete(c: Stmt, goal: Tuple[Polynomial, ...]) -> Tuple[Polynomial, ...]:
    if isinstance(c, Skip):
        return goal
    if isinstance(c, Assign):
        b = c.binding
        return _pset(p.substitute(b) for p in goal)
    if isinstance(c, Seq):
        return _wp_concrete(c.first, _wp_concrete(c.second, goal))
    if isinstance(c, If):
        g1 = _wp_concrete(c.then, goal)
        g2 = _wp_concrete(c.orelse, goal)
        return _pset([c.guard * p for p in g2] + list(g1))
    if isinstance(c, While):
        raise ContainsLoop("concrete transformer is defined on loop-free programs only")
    raise TypeError(f"not a statement: {c!r}")
