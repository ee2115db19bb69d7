"""Exact multivariate polynomials over Q and templates linear in unknown parameters.

Every value here is immutable after construction and kept canonical: no zero
coefficients, no zero exponents.  Coefficients are :class:`fractions.Fraction`
end to end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

Rational = Fraction
Scalar = Union[int, Fraction]


class UnboundVariable(KeyError):
    """Raised when evaluation or g-degree lookup meets an unassigned variable."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unbound variable {self.name!r}"


class Monomial:
    """A power product ``x1^d1 * ... * xn^dn`` stored as a sorted tuple of (var, exp)."""

    __slots__ = ("exps", "_hash")

    def __init__(self, exps: Union[Mapping[str, int], Iterable[Tuple[str, int]]] = ()):
        items = exps.items() if isinstance(exps, Mapping) else exps
        merged: Dict[str, int] = {}
        for var, e in items:
            if e < 0:
                raise ValueError(f"negative exponent for {var}")
            if e:
                merged[var] = merged.get(var, 0) + e
        self.exps: Tuple[Tuple[str, int], ...] = tuple(sorted(merged.items()))
        self._hash = hash(self.exps)

    @classmethod
    def _raw(cls, exps: Tuple[Tuple[str, int], ...]) -> "Monomial":
        m = cls.__new__(cls)
        m.exps = exps
        m._hash = hash(exps)
        return m

    @classmethod
    def var(cls, name: str, exp: int = 1) -> "Monomial":
        return cls._raw(((name, exp),)) if exp else ONE_MONO

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Monomial) and self.exps == other.exps

    def __repr__(self) -> str:
        return f"Monomial({dict(self.exps)!r})"

    def __iter__(self) -> Iterator[Tuple[str, int]]:
        return iter(self.exps)

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.exps)

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(v for v, _ in self.exps)

    def exponent(self, var: str) -> int:
        for v, e in self.exps:
            if v == var:
                return e
        return 0

    def is_one(self) -> bool:
        return not self.exps

    def __mul__(self, other: "Monomial") -> "Monomial":
        if not other.exps:
            return self
        if not self.exps:
            return other
        a, b = self.exps, other.exps
        i = j = 0
        out = []
        while i < len(a) and j < len(b):
            if a[i][0] == b[j][0]:
                out.append((a[i][0], a[i][1] + b[j][1]))
                i += 1
                j += 1
            elif a[i][0] < b[j][0]:
                out.append(a[i])
                i += 1
            else:
                out.append(b[j])
                j += 1
        out.extend(a[i:])
        out.extend(b[j:])
        return Monomial._raw(tuple(out))

    def to_str(self, order: Optional[Sequence[str]] = None) -> str:
        if not self.exps:
            return "1"
        items = self.exps
        if order is not None:
            idx = _order_index(order)
            items = sorted(items, key=lambda ve: (idx.get(ve[0], len(idx)), ve[0]))
        return "*".join(v if e == 1 else f"{v}^{e}" for v, e in items)

    def __str__(self) -> str:
        return self.to_str()


ONE_MONO = Monomial._raw(())


def _order_index(order: Sequence[str]) -> Dict[str, int]:
    return {v: i for i, v in enumerate(order)}


def grlex_key(order: Sequence[str]):
    """Sort key for graded lexicographic order over ``order``; larger key = larger monomial.

    Variables missing from ``order`` rank after all listed ones, by name.
    """
    idx = _order_index(order)
    n = len(idx)

    def key(m: Monomial):
        vec = [0] * n
        extra = []
        for v, e in m.exps:
            if v in idx:
                vec[idx[v]] = e
            else:
                extra.append((v, e))
        return (m.degree, tuple(vec), tuple(extra))

    return key


def _fmt_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Polynomial:
    """Sparse polynomial: mapping Monomial -> nonzero Fraction."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Union[Mapping[Monomial, Scalar], Iterable[Tuple[Monomial, Scalar]]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: Dict[Monomial, Fraction] = {}
        for m, c in items:
            c = Fraction(c)
            if c:
                s = acc.get(m, 0) + c
                if s:
                    acc[m] = s
                else:
                    acc.pop(m, None)
        self.terms: Dict[Monomial, Fraction] = acc
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Monomial, Fraction]) -> "Polynomial":
        p = cls.__new__(cls)
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c: Scalar) -> "Polynomial":
        c = Fraction(c)
        return cls._raw({ONE_MONO: c} if c else {})

    @classmethod
    def var(cls, name: str) -> "Polynomial":
        return cls._raw({Monomial.var(name): Fraction(1)})

    @classmethod
    def monomial(cls, m: Monomial, c: Scalar = 1) -> "Polynomial":
        c = Fraction(c)
        return cls._raw({m: c} if c else {})

    # -- basic protocol --------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"Polynomial({self.to_str()!r})"

    def __str__(self) -> str:
        return self.to_str()

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and ONE_MONO in self.terms)

    @property
    def variables(self) -> frozenset:
        return frozenset(v for m in self.terms for v in m.variables)

    def coeff(self, m: Monomial) -> Fraction:
        return self.terms.get(m, Fraction(0))

    # -- ring operations -------------------------------------------------
    def __add__(self, other: Union["Polynomial", Scalar]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other)
        acc = dict(self.terms)
        for m, c in other.terms.items():
            s = acc.get(m, 0) + c
            if s:
                acc[m] = s
            else:
                acc.pop(m, None)
        return Polynomial._raw(acc)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Union["Polynomial", Scalar]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other)
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "Polynomial":
        return Polynomial.const(other) - self

    def scale(self, c: Scalar) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return ZERO
        return Polynomial._raw({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other: Union["Polynomial", Scalar]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        acc: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1 * m2
                s = acc.get(m, 0) + c1 * c2
                if s:
                    acc[m] = s
                else:
                    acc.pop(m, None)
        return Polynomial._raw(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- queries ---------------------------------------------------------
    def degree(self) -> Optional[int]:
        """Total degree; ``None`` for the zero polynomial."""
        if not self.terms:
            return None
        return max(m.degree for m in self.terms)

    def evaluate(self, state: Mapping[str, Scalar]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            val = c
            for v, e in m.exps:
                try:
                    x = state[v]
                except KeyError:
                    raise UnboundVariable(v) from None
                val *= Fraction(x) ** e
            total += val
        return total

    def substitute(self, binding: Mapping[str, "Polynomial"]) -> "Polynomial":
        """Simultaneous substitution of variables by polynomials."""
        return substitute_terms(self.terms, binding, _frac_ops)

    def sorted_terms(self, order: Sequence[str] = ()) -> list:
        key = grlex_key(order)
        return sorted(self.terms.items(), key=lambda mc: key(mc[0]), reverse=True)

    def leading(self, order: Sequence[str] = ()) -> Tuple[Monomial, Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        key = grlex_key(order)
        m = max(self.terms, key=key)
        return m, self.terms[m]

    def to_str(self, order: Sequence[str] = ()) -> str:
        if not self.terms:
            return "0"
        parts = []
        for i, (m, c) in enumerate(self.sorted_terms(order)):
            neg = c < 0
            a = -c if neg else c
            if m.is_one():
                body = _fmt_rational(a)
            elif a == 1:
                body = m.to_str(order)
            else:
                body = f"{_fmt_rational(a)}*{m.to_str(order)}"
            if i == 0:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f" - {body}" if neg else f" + {body}")
        return "".join(parts)


ZERO = Polynomial._raw({})
ONE = Polynomial._raw({ONE_MONO: Fraction(1)})


def poly_degree(p: Polynomial) -> Optional[int]:
    return p.degree()


# -- substitution machinery shared by polynomials and templates --------------

class _FracOps:
    zero = Fraction(0)

    @staticmethod
    def mul_scalar(coef, c: Fraction):
        return coef * c

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def is_zero(a) -> bool:
        return not a


_frac_ops = _FracOps()


def _power_table(binding: Mapping[str, Polynomial], terms) -> Dict[Tuple[str, int], Polynomial]:
    needed: Dict[str, int] = {}
    for m in terms:
        for v, e in m.exps:
            if v in binding and e > needed.get(v, 0):
                needed[v] = e
    table: Dict[Tuple[str, int], Polynomial] = {}
    for v, top in needed.items():
        cur = ONE
        for e in range(1, top + 1):
            cur = cur * binding[v]
            table[(v, e)] = cur
    return table


def substitute_terms(terms, binding, ops):
    """Substitute ``binding`` into a term map whose coefficients support ``ops``.

    Returns a Polynomial for Fraction coefficients or a Template for affine ones.
    """
    powers = _power_table(binding, terms)
    acc: Dict[Monomial, object] = {}
    for m, coef in terms.items():
        kept = []
        image = ONE
        for v, e in m.exps:
            if v in binding:
                image = image * powers[(v, e)]
            else:
                kept.append((v, e))
        rest = Monomial._raw(tuple(kept))
        for m2, c2 in image.terms.items():
            mm = rest * m2
            add = ops.mul_scalar(coef, c2)
            if mm in acc:
                s = ops.add(acc[mm], add)
                if ops.is_zero(s):
                    del acc[mm]
                else:
                    acc[mm] = s
            elif not ops.is_zero(add):
                acc[mm] = add
    if ops is _frac_ops:
        return Polynomial._raw(acc)
    return Template._raw(acc)


# -- g-degree decomposition hook (g-degrees live in gdeg; kept generic here) ----

def gh_decompose(p: Polynomial, degree_of) -> Dict[object, Polynomial]:
    """Split ``p`` into homogeneous components keyed by ``degree_of(monomial)``.

    ``degree_of`` is usually ``functools.partial(gdeg_of_monomial, gamma)``; it
    raises :class:`UnboundVariable` for unassigned variables.
    """
    parts: Dict[object, Dict[Monomial, Fraction]] = {}
    for m, c in p.terms.items():
        parts.setdefault(degree_of(m), {})[m] = c
    return {k: Polynomial._raw(v) for k, v in parts.items()}


# -- parameters, affine forms, templates -------------------------------------

@dataclass(frozen=True, order=True)
class ParamId:
    """An unknown coefficient; identity is the index, the label is for humans."""

    index: int
    label: str = field(default="", compare=False)

    def __str__(self) -> str:
        return self.label or f"a{self.index}"


class ParamPool:
    """Monotone allocator of fresh parameters for one synthesis session."""

    def __init__(self):
        self._next = 0
        self.params: list = []

    def fresh(self, label: str = "") -> ParamId:
        p = ParamId(self._next, label or f"a{self._next}")
        self._next += 1
        self.params.append(p)
        return p

    def __len__(self) -> int:
        return self._next


class AffineForm:
    """``const + sum(coeffs[a] * a)`` with rational coefficients."""

    __slots__ = ("const", "coeffs")

    def __init__(self, coeffs: Optional[Mapping[ParamId, Scalar]] = None, const: Scalar = 0):
        self.const = Fraction(const)
        self.coeffs: Dict[ParamId, Fraction] = {a: Fraction(c) for a, c in (coeffs or {}).items() if c}

    @classmethod
    def _raw(cls, coeffs: Dict[ParamId, Fraction], const: Fraction) -> "AffineForm":
        f = cls.__new__(cls)
        f.coeffs = coeffs
        f.const = const
        return f

    @classmethod
    def param(cls, a: ParamId) -> "AffineForm":
        return cls._raw({a: Fraction(1)}, Fraction(0))

    def is_zero(self) -> bool:
        return not self.coeffs and not self.const

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AffineForm) and self.const == other.const and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.const, frozenset(self.coeffs.items())))

    def __add__(self, other: "AffineForm") -> "AffineForm":
        acc = dict(self.coeffs)
        for a, c in other.coeffs.items():
            s = acc.get(a, 0) + c
            if s:
                acc[a] = s
            else:
                acc.pop(a, None)
        return AffineForm._raw(acc, self.const + other.const)

    def __neg__(self) -> "AffineForm":
        return AffineForm._raw({a: -c for a, c in self.coeffs.items()}, -self.const)

    def scale(self, c: Fraction) -> "AffineForm":
        if not c:
            return AffineForm._raw({}, Fraction(0))
        return AffineForm._raw({a: v * c for a, v in self.coeffs.items()}, self.const * c)

    def evaluate(self, valuation: Mapping[ParamId, Scalar]) -> Fraction:
        total = self.const
        for a, c in self.coeffs.items():
            v = valuation.get(a)
            if v:
                total += c * v
        return total

    def __repr__(self) -> str:
        parts = [f"{c}*{a}" for a, c in sorted(self.coeffs.items())]
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts)


class _AffineOps:
    @staticmethod
    def mul_scalar(coef: AffineForm, c: Fraction) -> AffineForm:
        return coef.scale(c)

    @staticmethod
    def add(a: AffineForm, b: AffineForm) -> AffineForm:
        return a + b

    @staticmethod
    def is_zero(a: AffineForm) -> bool:
        return a.is_zero()


_affine_ops = _AffineOps()


class Template:
    """Polynomial whose coefficients are affine forms in parameters."""

    __slots__ = ("terms",)

    def __init__(self, terms: Union[Mapping[Monomial, AffineForm], Iterable[Tuple[Monomial, AffineForm]]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: Dict[Monomial, AffineForm] = {}
        for m, f in items:
            if m in acc:
                f = acc[m] + f
            if f.is_zero():
                acc.pop(m, None)
            else:
                acc[m] = f
        self.terms = acc

    @classmethod
    def _raw(cls, terms: Dict[Monomial, AffineForm]) -> "Template":
        t = cls.__new__(cls)
        t.terms = terms
        return t

    @classmethod
    def from_poly(cls, p: Polynomial) -> "Template":
        return cls._raw({m: AffineForm._raw({}, c) for m, c in p.terms.items()})

    @classmethod
    def general(cls, monomials: Sequence[Monomial], params: Sequence[ParamId]) -> "Template":
        return cls._raw({m: AffineForm.param(a) for m, a in zip(monomials, params)})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Template) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"Template({len(self.terms)} terms)"

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> Optional[int]:
        if not self.terms:
            return None
        return max(m.degree for m in self.terms)

    @property
    def params(self) -> frozenset:
        return frozenset(a for f in self.terms.values() for a in f.coeffs)

    def substitute(self, binding: Mapping[str, Polynomial]) -> "Template":
        return substitute_terms(self.terms, binding, _affine_ops)

    def mul_poly(self, p: Polynomial) -> "Template":
        acc: Dict[Monomial, AffineForm] = {}
        for m1, f in self.terms.items():
            for m2, c in p.terms.items():
                m = m1 * m2
                add = f.scale(c)
                if m in acc:
                    s = acc[m] + add
                    if s.is_zero():
                        del acc[m]
                    else:
                        acc[m] = s
                else:
                    acc[m] = add
        return Template._raw(acc)

    def __add__(self, other: "Template") -> "Template":
        acc = dict(self.terms)
        for m, f in other.terms.items():
            if m in acc:
                s = acc[m] + f
                if s.is_zero():
                    del acc[m]
                else:
                    acc[m] = s
            else:
                acc[m] = f
        return Template._raw(acc)

    def __neg__(self) -> "Template":
        return Template._raw({m: -f for m, f in self.terms.items()})

    def __sub__(self, other: "Template") -> "Template":
        return self + (-other)

    def instantiate(self, valuation: Mapping[ParamId, Scalar]) -> Polynomial:
        return Polynomial((m, f.evaluate(valuation)) for m, f in self.terms.items())


def template_ops(op: str, t: Template, arg=None):
    """Dispatch helper mirroring the substitute / mul_poly / add / instantiate family."""
    if op == "substitute":
        return t.substitute(arg)
    if op == "mul_poly":
        return t.mul_poly(arg)
    if op == "add":
        return t + arg
    if op == "instantiate":
        return t.instantiate(arg)
    raise ValueError(f"unknown template op {op!r}")


def poly_arith(op: str, lhs: Polynomial, rhs: Union[Polynomial, Scalar]) -> Polynomial:
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    if op == "scale":
        return lhs.scale(rhs)
    raise ValueError(f"unknown polynomial op {op!r}")
