"""Reduction of ideal-equality constraints to exact linear algebra.

Each constraint ``<G == G'>`` is discharged by a *matching*: every ``h`` in
``G'`` is declared equal to ``m*g`` for some ``g`` in ``G`` and multiplier
``m``, or equal to zero, with every ``g`` hit at least once with ``m = 1``.
Under such a matching ``v(G')`` and ``v(G)`` generate the same ideal, so any
solution of the resulting linear system is sound.  Matchings are explored
depth first, one element of ``G'`` at a time, on an incrementally maintained
reduced echelon form; a subtree is cut as soon as the solution space no
longer reaches the target parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .gdeg import ANY_DEGREE, GDeg, NotGH, gdeg_of_poly
from .poly import AffineForm, ParamId, Polynomial, Template, grlex_key
from .wp import EqConstraint, GenState, template_gdeg

DEFAULT_CAP = 6
CONST = -1  # column index of the constant term


class NoSolution(Exception):
    def __init__(self, message: str = "no nontrivial solution", matchings_tried: int = 0):
        super().__init__(message)
        self.matchings_tried = matchings_tried


class CapExceeded(Exception):
    pass


class ZeroPolynomial(ValueError):
    pass


# -- linear equations -----------------------------------------------------------

Row = Dict[int, int]


def _int_row(f: AffineForm) -> Row:
    """Clear denominators and divide by the content; ``const`` goes to ``CONST``."""
    items = [(a.index, c) for a, c in f.coeffs.items()]
    if f.const:
        items.append((CONST, f.const))
    if not items:
        return {}
    lcm = 1
    for _, c in items:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    row = {k: int(c * lcm) for k, c in items}
    return _normalize(row)


def _normalize(row: Row) -> Row:
    g = 0
    for v in row.values():
        g = math.gcd(g, v)
    if g > 1:
        row = {k: v // g for k, v in row.items()}
    return row


def zero_equations(t: Template) -> List[AffineForm]:
    """One affine form per monomial; all vanish iff the template instantiates to 0."""
    return [f for f in t.terms.values() if not f.is_zero()]


@dataclass
class LinearSystem:
    rows: List[AffineForm] = field(default_factory=list)

    def add_template_zero(self, t: Template) -> None:
        self.rows.extend(zero_equations(t))


class Echelon:
    """Reduced row echelon form over the integers, one row per pivot column.

    Rows are gcd-normalized with a positive pivot; every pivot column occurs
    in exactly one row.  Rows are never mutated, so ``copy`` is shallow.
    """

    __slots__ = ("pivots", "by_col", "inconsistent")

    def __init__(self):
        self.pivots: Dict[int, Row] = {}
        self.by_col: Dict[int, set] = {}  # column -> pivot columns of rows using it
        self.inconsistent = False

    def copy(self) -> "Echelon":
        e = Echelon.__new__(Echelon)
        e.pivots = dict(self.pivots)
        e.by_col = {k: set(v) for k, v in self.by_col.items()}
        e.inconsistent = self.inconsistent
        return e

    @staticmethod
    def _eliminate(row: Row, prow: Row, col: int) -> Row:
        a, b = prow[col], row[col]
        g = math.gcd(a, b)
        ka, kb = a // g, b // g
        out = {k: v * ka for k, v in row.items()}
        for k, v in prow.items():
            nv = out.get(k, 0) - kb * v
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
        return _normalize(out)

    def _set(self, pc: int, row: Optional[Row]) -> None:
        old = self.pivots.get(pc)
        if old is not None:
            for k in old:
                s = self.by_col.get(k)
                if s is not None:
                    s.discard(pc)
        if row is None:
            self.pivots.pop(pc, None)
            return
        self.pivots[pc] = row
        for k in row:
            self.by_col.setdefault(k, set()).add(pc)

    def add(self, row: Row) -> bool:
        """Insert an equation; returns False once the system is inconsistent."""
        if self.inconsistent:
            return False
        for col in sorted(k for k in row if k in self.pivots):
            if col in row:
                row = self._eliminate(row, self.pivots[col], col)
        if not row:
            return True
        cols = [k for k in row if k != CONST]
        if not cols:
            self.inconsistent = True
            return False
        pc = min(cols)
        if row[pc] < 0:
            row = {k: -v for k, v in row.items()}
        for other in sorted(self.by_col.get(pc, ())):
            if other != pc:
                self._set(other, self._eliminate(self.pivots[other], row, pc))
        self._set(pc, row)
        return True

    def reaches(self, targets: frozenset) -> bool:
        """Whether some solution is nonzero on ``targets``.

        A target column that is not a pivot is free.  A pivot target is
        forced to zero only if its row holds nothing else.
        """
        if self.inconsistent:
            return False
        for a in targets:
            row = self.pivots.get(a)
            if row is None or len(row) > 1:
                return True
        return False

    def nullspace(self, columns: Sequence[int]) -> List[Dict[int, Fraction]]:
        """Homogeneous solution basis, one vector per free column in ``columns`` order."""
        out = []
        for f in columns:
            if f in self.pivots:
                continue
            vec = {f: Fraction(1)}
            for pc in self.by_col.get(f, ()):
                row = self.pivots[pc]
                vec[pc] = Fraction(-row[f], row[pc])
            out.append(vec)
        return out

    def particular(self) -> Dict[int, Fraction]:
        """Solution with all free columns zero (nonzero only for pinned systems)."""
        return {pc: Fraction(-row[CONST], row[pc]) for pc, row in self.pivots.items() if CONST in row}

    @property
    def rank(self) -> int:
        return len(self.pivots)


# -- matchings ------------------------------------------------------------------

@dataclass(frozen=True)
class EqualTo:
    g: int
    m: int  # index into the multiplier list; 0 is the unit


ZERO_OPT = "Zero"
Option = Union[EqualTo, str]
Matching = Tuple[Option, ...]


def default_multipliers(guard_polys: Sequence[Polynomial], extra: Sequence[Polynomial] = ()) -> List[Polynomial]:
    out = [Polynomial.const(1)]
    for p in list(guard_polys) + list(extra):
        if not p.is_zero() and not p.is_const() and p not in out:
            out.append(p)
    return out


def _options(
    h: Template, lhs: Sequence[Template], mults: Sequence[Polynomial], gamma: Optional[Mapping[str, GDeg]]
) -> List[Option]:
    """Options for one element, pruning those forcing both sides to zero.

    ``h = m*g`` with deg(m) > deg(h), or with mismatching g-degrees, can only
    hold when both vanish, which the ``Zero`` option already covers.
    """
    hd = h.degree()
    hg = template_gdeg(gamma, h) if gamma is not None else None
    out: List[Option] = []
    for gi, g in enumerate(lhs):
        gg = template_gdeg(gamma, g) if gamma is not None else None
        for mi, m in enumerate(mults):
            if m.degree() > hd:
                continue
            if gamma is not None and isinstance(hg, GDeg) and isinstance(gg, GDeg):
                md = gdeg_of_poly(gamma, m)
                if isinstance(md, GDeg) and md * gg != hg:
                    continue
            out.append(EqualTo(gi, mi))
    out.append(ZERO_OPT)
    return out


def _check_cap(eq: EqConstraint, cap: int) -> None:
    if len(eq.lhs) > cap or len(eq.rhs) > cap:
        raise CapExceeded(f"constraint sets of size {len(eq.lhs)}/{len(eq.rhs)} exceed cap {cap}")


def matchings(
    eq: EqConstraint,
    mult_set: Sequence[Polynomial] = (Polynomial.const(1),),
    cap: int = DEFAULT_CAP,
    gamma: Optional[Mapping[str, GDeg]] = None,
) -> Iterator[Matching]:
    """All surjective unit matchings of one constraint in lexicographic order."""
    _check_cap(eq, cap)
    opts = [_options(h, eq.lhs, mult_set, gamma) for h in eq.rhs]
    n = len(eq.lhs)

    def rec(j: int, chosen: List[Option], covered: frozenset):
        if n - len(covered) > len(eq.rhs) - j:
            return
        if j == len(eq.rhs):
            yield tuple(chosen)
            return
        for o in opts[j]:
            cov = covered | {o.g} if isinstance(o, EqualTo) and o.m == 0 else covered
            chosen.append(o)
            yield from rec(j + 1, chosen, cov)
            chosen.pop()

    yield from rec(0, [], frozenset())


def option_rows(h: Template, o: Option, lhs: Sequence[Template], mults: Sequence[Polynomial]) -> List[Row]:
    diff = h if o == ZERO_OPT else h - lhs[o.g].mul_poly(mults[o.m])
    return [r for r in (_int_row(f) for f in zero_equations(diff)) if r]


# -- solving --------------------------------------------------------------------

@dataclass
class Solution:
    valuation: Dict[ParamId, Fraction]
    matching: List[Matching]
    matchings_tried: int
    rank: int
    columns: int
    basis: List[Dict[ParamId, Fraction]] = field(default_factory=list)


def solve(
    state: GenState,
    targets: Sequence[ParamId],
    mult_set: Sequence[Polynomial] = (Polynomial.const(1),),
    gamma: Optional[Mapping[str, GDeg]] = None,
    cap: int = DEFAULT_CAP,
    pins: Optional[Mapping[ParamId, Fraction]] = None,
    emit_basis: bool = False,
) -> Solution:
    """First valuation, over all matchings, that is nonzero on ``targets``.

    The final goal in ``state`` must vanish identically; ``pins`` fix some
    parameters to constants (making the system inhomogeneous).
    """
    for eq in state.constraints:
        _check_cap(eq, cap)
    params = {a.index: a for a in state.params}
    for a in targets:
        params.setdefault(a.index, a)
    for t in list(state.goal) + [t for eq in state.constraints for t in eq.lhs + eq.rhs]:
        for a in t.params:
            params.setdefault(a.index, a)
    columns = sorted(params)
    target_cols = frozenset(a.index for a in targets)
    pinned = dict(pins or {})

    root = Echelon()
    for a, c in pinned.items():
        root.add(_normalize({a.index: c.denominator, CONST: -c.numerator}) if c else {a.index: 1})
    for t in state.goal:
        for f in zero_equations(t):
            r = _int_row(f)
            if r and not root.add(r):
                break

    def viable(e: Echelon) -> bool:
        if e.inconsistent:
            return False
        if pinned:
            return True
        return e.reaches(target_cols)

    tried = 0
    if not viable(root):
        raise NoSolution("final goal forces the target parameters to zero", tried)

    slots: List[Tuple[int, int]] = [(k, j) for k, eq in enumerate(state.constraints) for j in range(len(eq.rhs))]
    opts = {
        (k, j): _options(state.constraints[k].rhs[j], state.constraints[k].lhs, mult_set, gamma)
        for k, j in slots
    }
    row_cache: Dict[Tuple[int, int, Option], List[Row]] = {}

    def rows_for(k: int, j: int, o: Option) -> List[Row]:
        key = (k, j, o)
        if key not in row_cache:
            eq = state.constraints[k]
            row_cache[key] = option_rows(eq.rhs[j], o, eq.lhs, mult_set)
        return row_cache[key]

    chosen: List[Option] = []

    def dfs(i: int, e: Echelon, covered: frozenset) -> Optional[Echelon]:
        nonlocal tried
        if i == len(slots):
            tried += 1
            return e if viable(e) else None
        k, j = slots[i]
        eq = state.constraints[k]
        last = j == len(eq.rhs) - 1
        for o in opts[(k, j)]:
            cov = covered | {o.g} if isinstance(o, EqualTo) and o.m == 0 else covered
            if len(eq.lhs) - len(cov) > len(eq.rhs) - j - 1:
                continue
            e2 = e.copy()
            ok = True
            for r in rows_for(k, j, o):
                if not e2.add(r):
                    ok = False
                    break
            if not ok or not viable(e2):
                continue
            chosen.append(o)
            res = dfs(i + 1, e2, frozenset() if last else cov)
            if res is not None:
                return res
            chosen.pop()
        return None

    final = dfs(0, root, frozenset())
    if final is None:
        raise NoSolution("no matching admits a nontrivial solution", tried)

    per_constraint: List[Matching] = []
    pos = 0
    for eq in state.constraints:
        per_constraint.append(tuple(chosen[pos:pos + len(eq.rhs)]))
        pos += len(eq.rhs)

    basis_vecs = final.nullspace(columns)
    base = final.particular()
    vec: Optional[Dict[int, Fraction]] = None
    if pinned:
        vec = base
    else:
        for b in basis_vecs:
            if any(c in target_cols for c in b):
                vec = b
                break
    assert vec is not None
    sol = Solution(
        valuation={params[c]: v for c, v in vec.items() if v},
        matching=per_constraint,
        matchings_tried=tried,
        rank=final.rank,
        columns=len(columns),
    )
    if emit_basis:
        sol.basis = [{params[c]: v for c, v in b.items() if v} for b in basis_vecs if any(c in target_cols for c in b)]
    return sol


def span_basis(vectors: Sequence[Dict[ParamId, Fraction]], targets: Sequence[ParamId]) -> List[Dict[ParamId, Fraction]]:
    """Independent generators of the projections of ``vectors`` onto ``targets``."""
    order = {a.index: a for a in targets}
    e = Echelon()
    for v in vectors:
        proj = {a.index: c for a, c in v.items() if a.index in order and c}
        if not proj:
            continue
        lcm = 1
        for c in proj.values():
            lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
        e.add(_normalize({k: int(c * lcm) for k, c in proj.items()}))
    return [{order[k]: Fraction(c) for k, c in row.items()} for _, row in sorted(e.pivots.items())]


def verify_solution(state: GenState, sol: Solution, mult_set: Sequence[Polynomial]) -> List[str]:
    """Direct polynomial check of the matching conditions; returns failures."""
    v = sol.valuation
    problems = []
    for t in state.goal:
        if not t.instantiate(v).is_zero():
            problems.append("final goal does not vanish")
    for k, (eq, match) in enumerate(zip(state.constraints, sol.matching)):
        lhs = [g.instantiate(v) for g in eq.lhs]
        hit = set()
        for h, o in zip(eq.rhs, match):
            hv = h.instantiate(v)
            if o == ZERO_OPT:
                if not hv.is_zero():
                    problems.append(f"constraint {k}: element expected to vanish")
            else:
                if hv != mult_set[o.m] * lhs[o.g]:
                    problems.append(f"constraint {k}: element differs from its match")
                if o.m == 0:
                    hit.add(o.g)
        if len(hit) != len(lhs):
            problems.append(f"constraint {k}: matching not surjective")
    return problems


def normalize_invariant(p: Polynomial, order: Sequence[str] = ()) -> Polynomial:
    """Integer coefficients with gcd 1 and a positive graded-lex leading coefficient."""
    if p.is_zero():
        raise ZeroPolynomial("cannot normalize the zero polynomial")
    lcm = 1
    for c in p.terms.values():
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    g = 0
    for c in p.terms.values():
        g = math.gcd(g, int(c * lcm))
    _, lead = max(p.terms.items(), key=lambda mc: grlex_key(order)(mc[0]))
    sign = 1 if lead > 0 else -1
    return p.scale(Fraction(sign * lcm, g))
