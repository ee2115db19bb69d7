"""End-to-end synthesis: parse, infer g-degrees, build template, generate, solve."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .gdeg import GDeg, format_gamma, gdeg_of_monomial, infer_gamma, merge_literals
from .lang import LIFT_ALL, LiteralTable, Program, guards, parse_poly
from .poly import ParamId, ParamPool, Polynomial, Template
from .solver import (
    DEFAULT_CAP,
    CapExceeded,
    NoSolution,
    Solution,
    default_multipliers,
    normalize_invariant,
    solve,
    span_basis,
    verify_solution,
)
from .templates import EmptyTemplate, TemplateSpec, build_template, realizable_taus
from .wp import GenState, WpContext, wpc

FULL = "full"
GH = "gh"

FOUND = "Found"
NO_SOLUTION = "NoSolution"
CAP_EXCEEDED = "CapExceeded"
EMPTY_TEMPLATE = "EmptyTemplate"
ERROR = "Error"


@dataclass(frozen=True)
class InferConfig:
    degree: int
    mode: str = GH
    target: Optional[str] = None
    tau_sweep: bool = False
    mult: Tuple[str, ...] = ()
    emit_basis: bool = False
    cap: int = DEFAULT_CAP
    merge_literals: bool = True


@dataclass
class RunReport:
    program: str
    mode: str
    degree: int
    tau: Optional[str]
    template_size: int
    constraints: int
    matchings_tried: int
    t_inf_ms: float
    t_sol_ms: float
    status: str
    invariants: List[str] = field(default_factory=list)
    gamma: Optional[List[str]] = None
    error: Optional[str] = None
    sweep: Optional[List[dict]] = None

    def to_json(self) -> dict:
        out = asdict(self)
        for k in ("gamma", "error", "sweep"):
            if out[k] is None:
                del out[k]
        return out


@dataclass
class Synthesis:
    """Everything a run produced, for reports and after-the-fact checks."""

    report: RunReport
    source: Program
    program: Program
    gamma: Optional[Dict[str, GDeg]] = None
    table: Optional[LiteralTable] = None
    template: Optional[Template] = None
    targets: List[ParamId] = field(default_factory=list)
    state: Optional[GenState] = None
    solution: Optional[Solution] = None
    mults: List[Polynomial] = field(default_factory=list)
    polys: List[Polynomial] = field(default_factory=list)


def parse_monomial(text: str, variables: Sequence[str]):
    p = parse_poly(text, list(variables))
    if len(p.terms) != 1:
        raise ValueError(f"target {text!r} is not a single monomial")
    (m, _), = p.terms.items()
    unknown = [v for v in m.variables if v not in variables]
    if unknown:
        raise ValueError(f"target mentions unknown variable {unknown[0]!r}")
    return m


def _ms(t0: float) -> float:
    return round((time.perf_counter() - t0) * 1000.0, 3)


def _synthesize(
    name: str,
    source: Program,
    program: Program,
    cfg: InferConfig,
    gamma: Optional[Dict[str, GDeg]],
    tau: Optional[GDeg],
    table: Optional[LiteralTable],
    t_inf_ms: float,
) -> Synthesis:
    variables = tuple(program.declared_vars)
    report = RunReport(
        program=name,
        mode=cfg.mode,
        degree=cfg.degree,
        tau=None if tau is None else str(tau),
        template_size=0,
        constraints=0,
        matchings_tried=0,
        t_inf_ms=t_inf_ms,
        t_sol_ms=0.0,
        status=ERROR,
        gamma=None if gamma is None else format_gamma(gamma, variables),
    )
    syn = Synthesis(report, source, program, gamma, table)
    t0 = time.perf_counter()
    pool = ParamPool()
    try:
        template, targets = build_template(TemplateSpec(variables, cfg.degree, gamma, tau), pool)
    except EmptyTemplate as e:
        report.status, report.error = EMPTY_TEMPLATE, str(e)
        report.t_sol_ms = _ms(t0)
        return syn
    syn.template, syn.targets = template, targets
    report.template_size = len(targets)
    ctx = WpContext(variables, pool, gamma)
    state = wpc(program.body, GenState(tuple(targets), (template,), ()), ctx)
    syn.state = state
    report.constraints = len(state.constraints)
    extra = [parse_poly(m, list(source.declared_vars)) for m in cfg.mult]
    if table is not None:
        # user multipliers are written over source constants; guards already use lifted names
        extra = [lift_constants(p, table) for p in extra]
    syn.mults = default_multipliers(guards(program.body), extra)
    try:
        sol = solve(state, targets, syn.mults, gamma, cfg.cap, emit_basis=cfg.emit_basis)
    except NoSolution as e:
        report.status, report.error = NO_SOLUTION, str(e)
        report.matchings_tried = e.matchings_tried
        report.t_sol_ms = _ms(t0)
        return syn
    except CapExceeded as e:
        report.status, report.error = CAP_EXCEEDED, str(e)
        report.t_sol_ms = _ms(t0)
        return syn
    report.t_sol_ms = _ms(t0)
    syn.solution = sol
    report.matchings_tried = sol.matchings_tried
    vectors = span_basis(sol.basis, targets) if cfg.emit_basis else [sol.valuation]
    order = list(source.declared_vars)
    binding = table.binding() if table is not None else {}
    for vec in vectors:
        p = template.instantiate(vec).substitute(binding)
        if not p.is_zero():
            p = normalize_invariant(p, order)
            if p not in syn.polys:
                syn.polys.append(p)
    if syn.polys:
        report.status = FOUND
        report.invariants = [p.to_str(order) for p in syn.polys]
    else:
        report.status, report.error = NO_SOLUTION, "solutions vanish once literals are restored"
    return syn


def lift_constants(p: Polynomial, table: LiteralTable) -> Polynomial:
    """Rewrite constant terms of ``p`` with a lifted literal of the same value, when one exists."""
    by_value = {e.value: e.name for e in table}
    out = Polynomial()
    for m, c in p.terms.items():
        if m.is_one() and c in by_value:
            out = out + Polynomial.var(by_value[c])
        else:
            out = out + Polynomial.monomial(m, c)
    return out


def run_infer(source: Program, cfg: InferConfig, name: str = "program") -> Synthesis:
    """Run the full or GH pipeline on ``source`` according to ``cfg``."""
    if cfg.mode == FULL:
        return _synthesize(name, source, source, cfg, None, None, None, 0.0)
    if cfg.mode != GH:
        raise ValueError(f"unknown mode {cfg.mode!r}")
    if (cfg.target is None) == (not cfg.tau_sweep):
        raise ValueError("GH mode needs exactly one of target / tau sweep")
    t0 = time.perf_counter()
    inf = infer_gamma(source, LIFT_ALL)
    program, table, gamma = inf.program, inf.table, inf.gamma
    if cfg.merge_literals:
        program, table, gamma = merge_literals(program, table, gamma)
    t_inf = _ms(t0)
    variables = list(program.declared_vars)
    if cfg.target is not None:
        tau = gdeg_of_monomial(gamma, parse_monomial(cfg.target, variables))
        return _synthesize(name, source, program, cfg, gamma, tau, table, t_inf)

    sweep = []
    first_found: Optional[Synthesis] = None
    last: Optional[Synthesis] = None
    for tau in realizable_taus(variables, cfg.degree, gamma):
        syn = _synthesize(name, source, program, cfg, gamma, tau, table, t_inf)
        sweep.append({"tau": str(tau), "template_size": syn.report.template_size, "status": syn.report.status})
        last = syn
        if first_found is None and syn.report.status == FOUND:
            first_found = syn
    chosen = first_found or last
    if chosen is None:
        report = RunReport(name, GH, cfg.degree, None, 0, 0, 0, t_inf, 0.0, EMPTY_TEMPLATE, error="no monomials")
        chosen = Synthesis(report, source, program, gamma, table)
    chosen.report.sweep = sweep
    return chosen


def subset_check(syn: Synthesis) -> List[str]:
    """Replay a GH solution inside the full-mode constraint system of the same program.

    The full-mode run uses the same (literal-lifted) program and degree.
    Parameters are matched by label (template and quotient monomials);
    full-only parameters are set to zero.  Returns the violated conditions.
    """
    if syn.solution is None or syn.gamma is None:
        return ["no GH solution to replay"]
    variables = tuple(syn.program.declared_vars)
    pool = ParamPool()
    template, targets = build_template(TemplateSpec(variables, syn.report.degree), pool)
    ctx = WpContext(variables, pool)
    state = wpc(syn.program.body, GenState(tuple(targets), (template,), ()), ctx)
    if [(len(e.lhs), len(e.rhs)) for e in state.constraints] != [
        (len(e.lhs), len(e.rhs)) for e in syn.state.constraints
    ]:
        return ["constraint shapes differ between GH and full mode"]
    by_label: Dict[str, Fraction] = {a.label: v for a, v in syn.solution.valuation.items()}
    valuation = {a: by_label[a.label] for a in pool.params if a.label in by_label}
    if len(valuation) != len(by_label):
        return ["some GH parameter has no full-mode counterpart"]
    replay = Solution(valuation, syn.solution.matching, 0, 0, 0)
    return verify_solution(state, replay, syn.mults)
