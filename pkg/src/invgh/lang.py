"""The small imperative language: AST, parser, pretty printer, literal lifting.

Concrete syntax::

    # comment
    (x, v, t) := (x0, v0, t0);
    while t - a != 0 {
        (x, v, t) := (x + v*dt, v - g*dt - rho*v*dt, t + dt);
    }
    if y == 0 { x := x - 1; } else { skip; }

A leading ``# vars: a, b, c`` comment fixes the declared variable order; the
printer emits it only when first-occurrence order would not reproduce it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .poly import ONE, Monomial, Polynomial

VAR_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
KEYWORDS = frozenset({"skip", "if", "else", "while"})

Loc = Tuple[int, int]


class ParseError(SyntaxError):
    """Syntax error carrying a 1-based line/column and the expected token set."""

    def __init__(self, message: str, line: int, col: int, expected: Sequence[str] = ()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        text = f"{line}:{col}: {message}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(text)


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Skip:
    loc: Optional[Loc] = field(default=None, compare=False)


@dataclass(frozen=True)
class Assign:
    targets: Tuple[str, ...]
    rhs: Tuple[Polynomial, ...]
    loc: Optional[Loc] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.targets or len(self.targets) != len(self.rhs):
            raise ValueError("assignment needs as many right-hand sides as targets")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate assignment target in {self.targets}")

    @property
    def binding(self) -> Dict[str, Polynomial]:
        return dict(zip(self.targets, self.rhs))


@dataclass(frozen=True)
class Seq:
    first: "Stmt"
    second: "Stmt"
    loc: Optional[Loc] = field(default=None, compare=False)


@dataclass(frozen=True)
class If:
    """``if guard == 0 { then } else { orelse }``."""

    guard: Polynomial
    then: "Stmt"
    orelse: "Stmt"
    loc: Optional[Loc] = field(default=None, compare=False)


EQ_ZERO = "=="
NEQ_ZERO = "!="


@dataclass(frozen=True)
class While:
    guard: Polynomial
    sense: str  # EQ_ZERO or NEQ_ZERO
    body: "Stmt"
    loc: Optional[Loc] = field(default=None, compare=False)

    def __post_init__(self):
        if self.sense not in (EQ_ZERO, NEQ_ZERO):
            raise ValueError(f"bad loop sense {self.sense!r}")


Stmt = Union[Skip, Assign, Seq, If, While]


@dataclass(frozen=True)
class Program:
    body: Stmt
    declared_vars: Tuple[str, ...]


def seq(stmts: Sequence[Stmt]) -> Stmt:
    """Right-nested sequence of one or more statements."""
    if not stmts:
        return Skip()
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


def flatten(c: Stmt) -> List[Stmt]:
    if isinstance(c, Seq):
        return flatten(c.first) + flatten(c.second)
    return [c]


def iter_stmts(c: Stmt) -> Iterator[Stmt]:
    yield c
    if isinstance(c, Seq):
        yield from iter_stmts(c.first)
        yield from iter_stmts(c.second)
    elif isinstance(c, If):
        yield from iter_stmts(c.then)
        yield from iter_stmts(c.orelse)
    elif isinstance(c, While):
        yield from iter_stmts(c.body)


def contains_loop(c: Stmt) -> bool:
    return any(isinstance(s, While) for s in iter_stmts(c))


def guards(c: Stmt) -> List[Polynomial]:
    """Distinct guard polynomials in program order."""
    out: List[Polynomial] = []
    for s in iter_stmts(c):
        if isinstance(s, (If, While)) and s.guard not in out:
            out.append(s.guard)
    return out


def stmt_vars(c: Stmt) -> List[str]:
    """Variables in first-occurrence order (targets before right-hand sides)."""
    seen: Dict[str, None] = {}
    for s in iter_stmts(c):
        if isinstance(s, Assign):
            for x in s.targets:
                seen.setdefault(x)
            for p in s.rhs:
                for v in sorted(p.variables):
                    seen.setdefault(v)
        elif isinstance(s, (If, While)):
            for v in sorted(s.guard.variables):
                seen.setdefault(v)
    return list(seen)


def map_polys(c: Stmt, fn: Callable[[Polynomial, Stmt], Polynomial]) -> Stmt:
    """Rebuild ``c`` applying ``fn`` to every right-hand side and guard."""
    if isinstance(c, Skip):
        return c
    if isinstance(c, Assign):
        return Assign(c.targets, tuple(fn(p, c) for p in c.rhs), c.loc)
    if isinstance(c, Seq):
        return Seq(map_polys(c.first, fn), map_polys(c.second, fn), c.loc)
    if isinstance(c, If):
        return If(fn(c.guard, c), map_polys(c.then, fn), map_polys(c.orelse, fn), c.loc)
    if isinstance(c, While):
        return While(fn(c.guard, c), c.sense, map_polys(c.body, fn), c.loc)
    raise TypeError(f"not a statement: {c!r}")


def substitute_program(p: Program, binding: Dict[str, Polynomial]) -> Program:
    """Substitute into every polynomial of a program (targets are left alone)."""
    body = map_polys(p.body, lambda q, _s: q.substitute(binding))
    used = set(stmt_vars(body))
    declared = tuple(v for v in p.declared_vars if v in used)
    declared += tuple(v for v in stmt_vars(body) if v not in declared)
    return Program(body, declared)


# -- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>:=|==|!=|[-+*/^(),;{}])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # "num", "name", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> Tuple[List[Token], List[str]]:
    """Return tokens plus the variable order from a leading ``# vars:`` pragma."""
    tokens: List[Token] = []
    pragma: List[str] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "comment":
            body = m.group()[1:].strip()
            if not tokens and body.startswith("vars:"):
                pragma = [v.strip() for v in body[5:].split(",") if v.strip()]
                for v in pragma:
                    if not VAR_RE.fullmatch(v) or v in KEYWORDS:
                        raise ParseError(f"bad variable {v!r} in vars pragma", line, col)
        elif kind != "ws":
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens, pragma


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks, pragma = tokenize(text)
        self.i = 0
        self.pragma = tuple(pragma)
        self.order: Dict[str, None] = dict.fromkeys(pragma)

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, expected: Sequence[str] = ()) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"{msg}, found {found}", t.line, t.col, expected)

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "name") and t.text in texts

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error("syntax error", [repr(text)])
        t = self.tok
        self.i += 1
        return t

    def note_var(self, name: str) -> None:
        self.order.setdefault(name)

    # program := stmt+
    def program(self) -> Program:
        stmts = [self.stmt()]
        while self.tok.kind != "eof":
            stmts.append(self.stmt())
        body = seq(stmts)
        used = set(stmt_vars(body))
        declared = tuple(v for v in self.order if v in used or v in self.pragma)
        return Program(body, declared)

    def block(self) -> Stmt:
        self.expect("{")
        stmts = [self.stmt()]
        while not self.at("}"):
            stmts.append(self.stmt())
        self.expect("}")
        return seq(stmts)

    def stmt(self) -> Stmt:
        t = self.tok
        loc = (t.line, t.col)
        if self.at("skip"):
            self.i += 1
            self.expect(";")
            return Skip(loc)
        if self.at("if"):
            self.i += 1
            guard = self.poly()
            self.expect("==")
            self.zero()
            then = self.block()
            self.expect("else")
            orelse = self.block()
            return If(guard, then, orelse, loc)
        if self.at("while"):
            self.i += 1
            guard = self.poly()
            if not self.at("==", "!="):
                raise self.error("loop guard must compare with 0", ["'=='", "'!='"])
            sense = self.tok.text
            self.i += 1
            self.zero()
            return While(guard, sense, self.block(), loc)
        if t.kind == "name" or self.at("("):
            return self.assign(loc)
        raise self.error("expected a statement", ["'skip'", "'if'", "'while'", "variable", "'('"])

    def zero(self) -> None:
        if not (self.tok.kind == "num" and int(self.tok.text) == 0):
            raise self.error("guards compare against the literal 0", ["'0'"])
        self.i += 1

    def var(self) -> str:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            raise self.error("expected a variable", ["variable"])
        self.i += 1
        self.note_var(t.text)
        return t.text

    def assign(self, loc: Loc) -> Stmt:
        if self.at("("):
            self.i += 1
            targets = [self.var()]
            while self.at(","):
                self.i += 1
                targets.append(self.var())
            self.expect(")")
        else:
            targets = [self.var()]
        if len(set(targets)) != len(targets):
            raise ParseError("duplicate assignment target", loc[0], loc[1])
        self.expect(":=")
        if len(targets) == 1:
            rhs = [self.poly()]
        else:
            self.expect("(")
            rhs = [self.poly()]
            while self.at(","):
                self.i += 1
                rhs.append(self.poly())
            self.expect(")")
            if len(rhs) != len(targets):
                raise ParseError(
                    f"{len(targets)} targets but {len(rhs)} right-hand sides", loc[0], loc[1]
                )
        self.expect(";")
        return Assign(tuple(targets), tuple(rhs), loc)

    # poly := term (('+'|'-') term)*
    def poly(self) -> Polynomial:
        p = self.term()
        while self.at("+", "-"):
            op = self.tok.text
            self.i += 1
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while self.at("*", "/"):
            op = self.tok.text
            t = self.tok
            self.i += 1
            q = self.unary()
            if op == "*":
                p = p * q
            else:
                if not q.is_const() or q.is_zero():
                    raise ParseError("division only by a nonzero constant", t.line, t.col)
                p = p.scale(1 / q.coeff(Monomial()))
        return p

    def unary(self) -> Polynomial:
        if self.at("-"):
            self.i += 1
            return -self.unary()
        if self.at("+"):
            self.i += 1
            return self.unary()
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.at("^"):
            self.i += 1
            if self.tok.kind != "num":
                raise self.error("exponent must be a nonnegative integer", ["integer"])
            e = int(self.tok.text)
            self.i += 1
            base = base ** e
        return base

    def atom(self) -> Polynomial:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Polynomial.const(int(t.text))
        if t.kind == "name" and t.text not in KEYWORDS:
            self.i += 1
            self.note_var(t.text)
            return Polynomial.var(t.text)
        if self.at("("):
            self.i += 1
            p = self.poly()
            self.expect(")")
            return p
        raise self.error("expected an expression", ["number", "variable", "'('"])


def parse_program(text: str) -> Program:
    return _Parser(text).program()


def parse_poly(text: str, order: Optional[List[str]] = None) -> Polynomial:
    """Parse a standalone polynomial; appends first occurrences to ``order`` if given."""
    p = _Parser(text)
    out = p.poly()
    if p.tok.kind != "eof":
        raise p.error("trailing input after polynomial", ["end of input"])
    if order is not None:
        for v in p.order:
            if v not in order:
                order.append(v)
    return out


# -- printer -----------------------------------------------------------------

def _print_stmt(c: Stmt, order: Sequence[str], indent: int, out: List[str]) -> None:
    pad = "    " * indent
    for s in flatten(c):
        if isinstance(s, Skip):
            out.append(f"{pad}skip;")
        elif isinstance(s, Assign):
            rhs = [p.to_str(order) for p in s.rhs]
            if len(s.targets) == 1:
                out.append(f"{pad}{s.targets[0]} := {rhs[0]};")
            else:
                out.append(f"{pad}({', '.join(s.targets)}) := ({', '.join(rhs)});")
        elif isinstance(s, If):
            out.append(f"{pad}if {s.guard.to_str(order)} == 0 {{")
            _print_stmt(s.then, order, indent + 1, out)
            out.append(f"{pad}}} else {{")
            _print_stmt(s.orelse, order, indent + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(s, While):
            out.append(f"{pad}while {s.guard.to_str(order)} {s.sense} 0 {{")
            _print_stmt(s.body, order, indent + 1, out)
            out.append(f"{pad}}}")
        else:
            raise TypeError(f"not a statement: {s!r}")


def pretty_print(p: Program) -> str:
    lines: List[str] = []
    _print_stmt(p.body, p.declared_vars, 0, lines)
    text = "\n".join(lines)
    if parse_program(text).declared_vars != tuple(p.declared_vars):
        text = f"# vars: {', '.join(p.declared_vars)}\n{text}"
    return text


def pretty_stmt(c: Stmt, order: Sequence[str] = ()) -> str:
    lines: List[str] = []
    _print_stmt(c, order, 0, lines)
    return "\n".join(lines)


# -- literal lifting ---------------------------------------------------------

LIFT_ALL = "all"
LIFT_NONE = "none"


@dataclass(frozen=True)
class LiteralEntry:
    name: str
    value: Fraction
    loc: Optional[Loc]


@dataclass(frozen=True)
class LiteralTable:
    entries: Tuple[LiteralEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(e.name for e in self.entries)

    def binding(self) -> Dict[str, Polynomial]:
        return {e.name: Polynomial.const(e.value) for e in self.entries}


def _fresh_names(taken: set, prefix: str = "k") -> Iterator[str]:
    i = 1
    while True:
        name = f"{prefix}{i}"
        if name not in taken:
            yield name
        i += 1


def lift_literals(p: Program, policy: str = LIFT_ALL) -> Tuple[Program, LiteralTable]:
    """Replace every nonzero numeric literal occurrence by a fresh variable.

    A literal occurrence is a constant term ``c`` or a non-unit coefficient
    ``c`` of a canonical polynomial; it becomes ``sign(c) * k`` with ``k = |c|``.
    Zero is never lifted.
    """
    if policy == LIFT_NONE:
        return p, LiteralTable()
    if policy != LIFT_ALL:
        raise ValueError(f"unknown literal policy {policy!r}")
    names = _fresh_names(set(p.declared_vars))
    entries: List[LiteralEntry] = []

    def lift(q: Polynomial, stmt: Stmt) -> Polynomial:
        terms = {}
        for m, c in q.sorted_terms(p.declared_vars):
            a = abs(c)
            if m.is_one() or a != 1:
                k = next(names)
                entries.append(LiteralEntry(k, a, stmt.loc))
                m = m * Monomial.var(k)
                c = 1 if c > 0 else -1
            terms[m] = c
        return Polynomial(terms)

    body = map_polys(p.body, lift)
    return Program(body, tuple(p.declared_vars) + tuple(e.name for e in entries)), LiteralTable(tuple(entries))
