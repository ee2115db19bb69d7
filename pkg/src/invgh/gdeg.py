"""Generalized degrees (g-degrees) and dimension-type inference.

A g-degree is an element of the free Abelian group over a finite set of
symbols.  During inference the symbols are *unknowns* (one per program
variable, plus fresh ones from the splitting rule); once constraints are
solved every surviving unknown is replaced by a distinct *base* symbol.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .lang import (
    LIFT_ALL,
    Assign,
    If,
    LiteralEntry,
    LiteralTable,
    Program,
    Seq,
    Skip,
    Stmt,
    While,
    lift_literals,
    substitute_program,
)
from .poly import Monomial, Polynomial, UnboundVariable

UNKNOWN = "unknown"
BASE = "base"


@dataclass(frozen=True, order=True)
class GSym:
    kind: str
    index: int
    name: str = field(compare=False)

    def __str__(self) -> str:
        return self.name


class GDeg:
    """Immutable element of a free Abelian group: symbol -> nonzero exponent."""

    __slots__ = ("exps", "_hash")

    def __init__(self, exps: Union[Mapping[GSym, int], Iterable[Tuple[GSym, int]]] = ()):
        items = exps.items() if isinstance(exps, Mapping) else exps
        acc: Dict[GSym, int] = {}
        for s, e in items:
            acc[s] = acc.get(s, 0) + e
        self.exps: Tuple[Tuple[GSym, int], ...] = tuple(sorted((s, e) for s, e in acc.items() if e))
        self._hash = hash(self.exps)

    @classmethod
    def sym(cls, s: GSym, e: int = 1) -> "GDeg":
        return cls({s: e})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GDeg) and self.exps == other.exps

    def __hash__(self) -> int:
        return self._hash

    def __mul__(self, other: "GDeg") -> "GDeg":
        return GDeg(itertools.chain(self.exps, other.exps))

    def __truediv__(self, other: "GDeg") -> "GDeg":
        return self * other.inv()

    def inv(self) -> "GDeg":
        return GDeg((s, -e) for s, e in self.exps)

    def __pow__(self, n: int) -> "GDeg":
        return GDeg((s, e * n) for s, e in self.exps)

    def is_one(self) -> bool:
        return not self.exps

    def as_dict(self) -> Dict[GSym, int]:
        return dict(self.exps)

    def exponent(self, s: GSym) -> int:
        return dict(self.exps).get(s, 0)

    @property
    def symbols(self) -> Tuple[GSym, ...]:
        return tuple(s for s, _ in self.exps)

    def apply(self, subst: Mapping[GSym, "GDeg"]) -> "GDeg":
        out = GDeg()
        for s, e in self.exps:
            out = out * (subst[s] ** e if s in subst else GDeg.sym(s, e))
        return out

    def __str__(self) -> str:
        if not self.exps:
            return "1"
        return " * ".join(s.name if e == 1 else f"{s.name}^{e}" for s, e in self.exps)

    def __repr__(self) -> str:
        return f"GDeg({self})"


ONE_DEG = GDeg()


def gdeg_group(op: str, *args):
    """Group operations by name: ``mul``, ``inv``, ``pow``, ``one``."""
    if op == "one":
        return ONE_DEG
    if op == "mul":
        return args[0] * args[1]
    if op == "inv":
        return args[0].inv()
    if op == "pow":
        return args[0] ** args[1]
    raise ValueError(f"unknown group op {op!r}")


GammaAssign = Dict[str, GDeg]


def base_symbols(names: Sequence[str]) -> List[GSym]:
    return [GSym(BASE, i, n) for i, n in enumerate(names)]


_DEG_TERM = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\^\s*(-?\d+))?\s*")


def parse_gdeg(text: str, bases: Optional[Dict[str, GSym]] = None) -> GDeg:
    """Parse ``L^2 * T^-1`` (or ``1``) into a g-degree over base symbols.

    ``bases`` maps names to symbols and is extended with new names.
    """
    bases = {} if bases is None else bases
    text = text.strip()
    if text == "1":
        return ONE_DEG
    out = ONE_DEG
    for part in text.split("*"):
        m = _DEG_TERM.fullmatch(part)
        if not m:
            raise ValueError(f"bad g-degree {text!r}")
        name, e = m.group(1), int(m.group(2) or 1)
        if name not in bases:
            bases[name] = GSym(BASE, len(bases), name)
        out = out * GDeg.sym(bases[name], e)
    return out


# -- g-degrees of monomials and polynomials ------------------------------------

def gdeg_of_monomial(gamma: Mapping[str, GDeg], w: Monomial) -> GDeg:
    out = ONE_DEG
    for v, e in w.exps:
        try:
            out = out * (gamma[v] ** e)
        except KeyError:
            raise UnboundVariable(v) from None
    return out


@dataclass(frozen=True)
class NotGH:
    """Witness that a polynomial mixes g-degrees."""

    first: Tuple[Monomial, GDeg]
    second: Tuple[Monomial, GDeg]


class _AnyDegree:
    def __repr__(self) -> str:
        return "ANY_DEGREE"


ANY_DEGREE = _AnyDegree()


def gdeg_of_poly(gamma: Mapping[str, GDeg], p: Polynomial) -> Union[GDeg, NotGH, _AnyDegree]:
    """Common g-degree of all monomials, ``ANY_DEGREE`` for 0, else a ``NotGH`` witness."""
    seen: Optional[Tuple[Monomial, GDeg]] = None
    for m in p.terms:
        d = gdeg_of_monomial(gamma, m)
        if seen is None:
            seen = (m, d)
        elif d != seen[1]:
            return NotGH(seen, (m, d))
    return ANY_DEGREE if seen is None else seen[1]


def is_gh(gamma: Mapping[str, GDeg], p: Polynomial) -> bool:
    return not isinstance(gdeg_of_poly(gamma, p), NotGH)


def gh_components(gamma: Mapping[str, GDeg], p: Polynomial) -> Dict[GDeg, Polynomial]:
    """Homogeneous components of ``p`` keyed by g-degree."""
    from .poly import gh_decompose

    return gh_decompose(p, lambda m: gdeg_of_monomial(gamma, m))


def typing_violations(gamma: Mapping[str, GDeg], c: Stmt) -> List[str]:
    """Reasons ``gamma |- c`` fails; empty when the program is consistent."""
    out: List[str] = []

    def walk(s: Stmt) -> None:
        if isinstance(s, Skip):
            return
        if isinstance(s, Seq):
            walk(s.first)
            walk(s.second)
        elif isinstance(s, Assign):
            for x, p in zip(s.targets, s.rhs):
                d = gdeg_of_poly(gamma, p)
                if isinstance(d, NotGH):
                    out.append(f"{p} is not GH")
                elif d is not ANY_DEGREE and d != gamma[x]:
                    out.append(f"{x} has g-degree {gamma[x]} but {p} has {d}")
        elif isinstance(s, (If, While)):
            if isinstance(gdeg_of_poly(gamma, s.guard), NotGH):
                out.append(f"guard {s.guard} is not GH")
            if isinstance(s, If):
                walk(s.then)
                walk(s.orelse)
            else:
                walk(s.body)

    walk(c)
    return out


def is_consistent(gamma: Mapping[str, GDeg], c: Stmt) -> bool:
    return not typing_violations(gamma, c)


# -- constraint generation ------------------------------------------------------

@dataclass(frozen=True)
class GConstraint:
    """Normalized equation ``lhs = 1``."""

    lhs: GDeg

    @classmethod
    def equate(cls, t1: GDeg, t2: GDeg) -> "GConstraint":
        return cls(t1 / t2)

    def __str__(self) -> str:
        return f"{self.lhs} = 1"


def _gdeg_prime(gamma, p: Polynomial, order: Sequence[str]):
    from .poly import grlex_key

    monos = sorted(p.terms, key=grlex_key(order), reverse=True)
    degs = [gdeg_of_monomial(gamma, m) for m in monos]
    return degs[0], [GConstraint.equate(a, b) for a, b in zip(degs, degs[1:])]


def pt_constraints(gamma: Mapping[str, GDeg], c: Stmt, order: Sequence[str] = ()) -> List[GConstraint]:
    """Constraints whose solutions make ``gamma`` consistent with ``c``.

    Trivial constraints (``1 = 1``) and duplicates are dropped; the zero
    polynomial contributes nothing.  Loop guards are constrained like
    if-guards so every guard is GH.
    """
    out: Dict[GConstraint, None] = {}

    def add(cs: Iterable[GConstraint]) -> None:
        for k in cs:
            if not k.lhs.is_one():
                out.setdefault(k)

    def walk(s: Stmt) -> None:
        if isinstance(s, Skip):
            return
        if isinstance(s, Seq):
            walk(s.first)
            walk(s.second)
        elif isinstance(s, Assign):
            for x, p in zip(s.targets, s.rhs):
                if p.is_zero():
                    continue
                tau, cs = _gdeg_prime(gamma, p, order)
                add([GConstraint.equate(gamma[x], tau)])
                add(cs)
        elif isinstance(s, If):
            if not s.guard.is_zero():
                add(_gdeg_prime(gamma, s.guard, order)[1])
            walk(s.then)
            walk(s.orelse)
        elif isinstance(s, While):
            if not s.guard.is_zero():
                add(_gdeg_prime(gamma, s.guard, order)[1])
            walk(s.body)
        else:
            raise TypeError(f"not a statement: {s!r}")

    walk(c)
    return list(out)


# -- unification ------------------------------------------------------------

class Unsatisfiable(ValueError):
    def __init__(self, constraint: GConstraint):
        super().__init__(f"unsatisfiable g-degree constraint {constraint}")
        self.constraint = constraint


class UnificationDiverged(RuntimeError):
    pass


class _SymSupply:
    def __init__(self, start: int):
        self.next = start

    def fresh(self) -> GSym:
        s = GSym(UNKNOWN, self.next, f"w{self.next}")
        self.next += 1
        return s


def unify(constraints: Sequence[GConstraint], supply: Optional[_SymSupply] = None) -> Dict[GSym, GDeg]:
    """Most general solution of ``lhs = 1`` constraints over unknown symbols.

    Constraints are processed in order; within one, the unknown with the
    smallest absolute exponent (ties by index) is eliminated.  When that
    exponent does not divide the others a fresh unknown absorbs the
    remainder.  Base symbols are treated as constants.
    """
    unknowns = {s for k in constraints for s in k.lhs.symbols if s.kind == UNKNOWN}
    if supply is None:
        supply = _SymSupply(max((s.index for s in unknowns), default=-1) + 1)
    limit = 10 * (len(unknowns) + len(constraints)) + 10
    pending = deque(k.lhs for k in constraints)
    subst: Dict[GSym, GDeg] = {}
    steps = 0
    while pending:
        steps += 1
        if steps > limit:
            raise UnificationDiverged(f"no convergence after {limit} rewrite steps")
        tau = pending.popleft().apply(subst)
        if tau.is_one():
            continue
        cands = [(abs(e), s) for s, e in tau.exps if s.kind == UNKNOWN]
        if not cands:
            raise Unsatisfiable(GConstraint(tau))
        _, pivot = min(cands, key=lambda c: (c[0], c[1].index))
        k = tau.exponent(pivot)
        rest = [(s, e) for s, e in tau.exps if s != pivot]
        if all(e % k == 0 for _, e in rest):
            binding = {pivot: GDeg((s, -(e // k)) for s, e in rest)}
        else:
            if all(s.kind == BASE for s, _ in rest):
                raise Unsatisfiable(GConstraint(tau))
            omega = supply.fresh()
            binding = {pivot: GDeg.sym(omega) * GDeg((s, -(e // k)) for s, e in rest)}
            pending.appendleft(GDeg.sym(omega, k) * GDeg((s, e % k) for s, e in rest))
        subst = {s: img.apply(binding) for s, img in subst.items()}
        subst.update(binding)
    return subst


# -- inference ----------------------------------------------------------------

@dataclass
class Inference:
    """Result of dimension-type inference on a (possibly literal-lifted) program."""

    gamma: GammaAssign
    table: LiteralTable
    program: Program
    constraints: List[GConstraint]
    subst: Dict[GSym, GDeg]
    template_gamma: Dict[str, GDeg]


def infer_gamma(
    program: Program,
    literal_policy: str = LIFT_ALL,
    pins: Optional[Mapping[str, GDeg]] = None,
) -> Inference:
    """Lift literals, generate typing constraints, unify, then name bases.

    Surviving unknowns become bases ``B0, B1, ...`` in order of first use
    when walking the variables in declaration order, each oriented so that
    its first user gets a positive exponent.
    """
    lifted, table = lift_literals(program, literal_policy)
    variables = list(lifted.declared_vars)
    alpha = {v: GSym(UNKNOWN, i, f"a_{v}") for i, v in enumerate(variables)}
    template = {v: GDeg.sym(s) for v, s in alpha.items()}
    constraints = pt_constraints(template, lifted.body, variables)
    pin_constraints = [GConstraint.equate(template[v], d) for v, d in (pins or {}).items() if v in template]
    subst = unify(constraints + pin_constraints, _SymSupply(len(variables)))

    solved = {v: template[v].apply(subst) for v in variables}
    taken = {s.name for d in solved.values() for s in d.symbols if s.kind == BASE}
    names = (f"B{i}" for i in itertools.count() if f"B{i}" not in taken)
    bases: Dict[GSym, GDeg] = {}
    for v in variables:
        for s in solved[v].symbols:
            if s.kind == UNKNOWN and s not in bases:
                sign = 1 if solved[v].exponent(s) > 0 else -1
                bases[s] = GDeg.sym(GSym(BASE, 1000 + len(bases), next(names)), sign)
    gamma = {v: d.apply(bases) for v, d in solved.items()}
    return Inference(gamma, table, lifted, constraints, subst, template)


def merge_literals(program: Program, table: LiteralTable, gamma: Mapping[str, GDeg]):
    """Identify lifted literals that share both value and g-degree.

    Returns ``(program, table, gamma)`` with one variable per class; the
    first occurrence names the class.
    """
    rep: Dict[Tuple, LiteralEntry] = {}
    rename: Dict[str, Polynomial] = {}
    kept: List[LiteralEntry] = []
    for e in table:
        key = (e.value, gamma[e.name])
        if key in rep:
            rename[e.name] = Polynomial.var(rep[key].name)
        else:
            rep[key] = e
            kept.append(e)
    if not rename:
        return program, table, dict(gamma)
    merged = substitute_program(program, rename)
    new_gamma = {v: gamma[v] for v in merged.declared_vars}
    return merged, LiteralTable(tuple(kept)), new_gamma


def format_gamma(gamma: Mapping[str, GDeg], order: Sequence[str] = ()) -> List[str]:
    names = list(order) + sorted(v for v in gamma if v not in order)
    return [f"{v} : {gamma[v]}" for v in names if v in gamma]


def exponent_matrix(gamma: Mapping[str, GDeg], order: Sequence[str]) -> List[Tuple[int, ...]]:
    """Rows = variables in ``order``, columns = base symbols in first-use order."""
    cols: List[GSym] = []
    for v in order:
        for s in gamma[v].symbols:
            if s not in cols:
                cols.append(s)
    return [tuple(gamma[v].exponent(s) for s in cols) for v in order]


def equal_up_to_renaming(g1: Mapping[str, GDeg], g2: Mapping[str, GDeg], order: Sequence[str]) -> bool:
    """True when some bijection between base symbols maps ``g1`` onto ``g2``."""
    s1 = sorted({s for v in order for s in g1[v].symbols})
    s2 = sorted({s for v in order for s in g2[v].symbols})
    if len(s1) != len(s2):
        return False
    for perm in itertools.permutations(s2):
        ren = {a: GDeg.sym(b) for a, b in zip(s1, perm)}
        if all(g1[v].apply(ren) == g2[v] for v in order):
            return True
    return False
