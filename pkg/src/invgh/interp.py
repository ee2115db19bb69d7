"""Bounded exact execution and empirical postcondition checks."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .gdeg import infer_gamma
from .lang import EQ_ZERO, Assign, If, Program, Seq, Skip, Stmt, While, iter_stmts, stmt_vars
from .poly import Polynomial, UnboundVariable

State = Dict[str, Fraction]
DEFAULT_BUDGET = 10_000
DEFAULT_SEED = 42
ALIGNED_MAX = 5
ALIGN_RETRIES = 20
PILOT_BUDGET = 300


@dataclass(frozen=True)
class Terminated:
    final: State
    steps: int


@dataclass(frozen=True)
class BudgetExhausted:
    last: State


Outcome = Union[Terminated, BudgetExhausted]


_COMPILED: Dict[Polynomial, Callable[[State], Fraction]] = {}


def compile_poly(p: Polynomial) -> Callable[[State], Fraction]:
    """Evaluator for ``p`` as a Python closure over a state dict (cached)."""
    fn = _COMPILED.get(p)
    if fn is not None:
        return fn
    consts: Dict[str, Fraction] = {}
    parts = []
    for i, (m, c) in enumerate(p.terms.items()):
        consts[f"c{i}"] = c
        factors = [f"c{i}"] + [f"s[{v!r}]" + (f"**{e}" if e > 1 else "") for v, e in m.exps]
        parts.append("*".join(factors))
    body = " + ".join(parts) or "ZERO"
    code = f"lambda s: {body}"
    fn = eval(compile(code, "<poly>", "eval"), {"ZERO": Fraction(0), **consts})
    _COMPILED[p] = fn
    return fn


def _eval(p: Polynomial, st: State) -> Fraction:
    try:
        return compile_poly(p)(st)
    except KeyError as e:
        raise UnboundVariable(e.args[0]) from None


def execute(c: Stmt, state: Mapping[str, object], budget: int = DEFAULT_BUDGET) -> Outcome:
    """Run ``c`` from ``state``; every non-sequence statement and loop test costs a step."""
    st: State = {k: Fraction(v) for k, v in state.items()}
    steps = 0
    stack: List[Stmt] = [c]
    while stack:
        s = stack.pop()
        if isinstance(s, Seq):
            stack.append(s.second)
            stack.append(s.first)
            continue
        if steps == budget:
            return BudgetExhausted(st)
        steps += 1
        if isinstance(s, Skip):
            continue
        if isinstance(s, Assign):
            vals = [_eval(p, st) for p in s.rhs]
            st.update(zip(s.targets, vals))
        elif isinstance(s, If):
            stack.append(s.then if _eval(s.guard, st) == 0 else s.orelse)
        elif isinstance(s, While):
            zero = _eval(s.guard, st) == 0
            if zero == (s.sense == EQ_ZERO):
                stack.append(s)
                stack.append(s.body)
        else:
            raise TypeError(f"not a statement: {s!r}")
    return Terminated(st, steps)


@dataclass
class CheckReport:
    passed: bool
    trials: int
    terminated: int
    vacuous_count: int
    violations: List[Tuple[State, State]] = field(default_factory=list)

    def to_json(self) -> dict:
        show = lambda s: {k: str(v) for k, v in s.items()}  # noqa: E731
        return {
            "passed": self.passed,
            "trials": self.trials,
            "terminated": self.terminated,
            "vacuous": self.vacuous_count,
            "violations": [{"initial": show(a), "final": show(b)} for a, b in self.violations],
        }


def sample_state(rng: random.Random, variables: Sequence[str], aligned: Set[str] = frozenset()) -> State:
    """Rationals num in [-10, 10], den in [1, 10]; aligned variables are small naturals."""
    out: State = {}
    for v in variables:
        if v in aligned:
            out[v] = Fraction(rng.randint(0, ALIGNED_MAX))
        else:
            out[v] = Fraction(rng.randint(-10, 10), rng.randint(1, 10))
    return out


def _realign(rng: random.Random, body: Stmt, init: State, aligned: Set[str], budget: int) -> State:
    """Redraw aligned values until a pilot run (other variables zeroed) terminates.

    The pilot only steers sampling; the real run is still what gets checked.
    """
    names = sorted(aligned)
    for _ in range(ALIGN_RETRIES):
        pilot = {v: (x if v in aligned else Fraction(0)) for v, x in init.items()}
        if isinstance(execute(body, pilot, min(budget, PILOT_BUDGET)), Terminated):
            return init
        init = dict(init)
        init.update({v: Fraction(rng.randint(0, ALIGNED_MAX)) for v in names})
    return init


def check_postcondition(
    program: Union[Program, Stmt],
    p: Polynomial,
    trials: int = 100,
    budget: int = DEFAULT_BUDGET,
    seed: int = DEFAULT_SEED,
    aligned: Set[str] = frozenset(),
) -> CheckReport:
    """Sample initial states and test ``p == 0`` after every terminating run.

    Runs that exhaust the budget are vacuous and never count as violations.
    Variables in ``aligned`` are drawn as small naturals, biased towards
    values for which the loops terminate.
    """
    if isinstance(program, Program):
        body, variables = program.body, list(program.declared_vars)
    else:
        body, variables = program, stmt_vars(program)
    missing = sorted(p.variables - set(variables))
    if missing:
        raise UnboundVariable(missing[0])
    rng = random.Random(seed)
    report = CheckReport(True, trials, 0, 0)
    for _ in range(trials):
        init = sample_state(rng, variables, aligned)
        if aligned:
            init = _realign(rng, body, init, aligned, budget)
        out = execute(body, init, budget)
        if isinstance(out, BudgetExhausted):
            report.vacuous_count += 1
            continue
        report.terminated += 1
        if p.evaluate(out.final) != 0:
            report.passed = False
            report.violations.append((init, out.final))
    return report


def aligned_variables(program: Program, gamma: Optional[Mapping[str, object]] = None) -> Set[str]:
    """Variables sharing a g-degree with some variable of a loop guard.

    Sampling these as naturals makes counter-style loops terminate often.
    """
    if gamma is None:
        gamma = infer_gamma(program).gamma
    degs = {gamma[v] for s in iter_stmts(program.body) if isinstance(s, While) for v in s.guard.variables}
    return {v for v in program.declared_vars if gamma.get(v) in degs}
