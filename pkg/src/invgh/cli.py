"""Command-line driver: ``invgh infer | gamma | check | bench``."""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

from .gdeg import Unsatisfiable, format_gamma, infer_gamma, parse_gdeg
from .interp import DEFAULT_BUDGET, DEFAULT_SEED, aligned_variables, check_postcondition
from .lang import ParseError, Program, parse_poly, parse_program
from .pipeline import (
    CAP_EXCEEDED,
    EMPTY_TEMPLATE,
    ERROR,
    FOUND,
    FULL,
    GH,
    NO_SOLUTION,
    InferConfig,
    RunReport,
    run_infer,
    subset_check,
)
from .poly import UnboundVariable
from .solver import DEFAULT_CAP

EXIT_FOUND = 0
EXIT_VIOLATION = 1
EXIT_NO_SOLUTION = 2
EXIT_INPUT = 3
EXIT_CAP = 4

STATUS_EXIT = {
    FOUND: EXIT_FOUND,
    NO_SOLUTION: EXIT_NO_SOLUTION,
    EMPTY_TEMPLATE: EXIT_NO_SOLUTION,
    CAP_EXCEEDED: EXIT_CAP,
    ERROR: EXIT_INPUT,
}


class InputError(Exception):
    pass


def default_seed() -> int:
    env = os.environ.get("INVGH_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise InputError(f"INVGH_SEED must be an integer, got {env!r}") from None


def load_program(path: str) -> Program:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    try:
        return parse_program(text)
    except ParseError as e:
        raise InputError(f"{path}:{e.line}:{e.col}: {e.msg}") from None


def _emit(obj, as_json: bool, text: str) -> None:
    print(json.dumps(obj, indent=2) if as_json else text)


def format_report(r: RunReport) -> str:
    lines = [
        f"program: {r.program}  mode: {r.mode}  degree: {r.degree}" + (f"  tau: {r.tau}" if r.tau else ""),
        f"template size: {r.template_size}  constraints: {r.constraints}  matchings tried: {r.matchings_tried}",
        f"t_inf: {r.t_inf_ms:.3f} ms  t_sol: {r.t_sol_ms:.3f} ms",
        f"status: {r.status}",
    ]
    if r.error and r.status != FOUND:
        lines.append(f"reason: {r.error}")
    lines += [f"invariant: {p} = 0" for p in r.invariants]
    for s in r.sweep or ():
        lines.append(f"  tau {s['tau']}: #m={s['template_size']} {s['status']}")
    return "\n".join(lines)


# -- subcommands ------------------------------------------------------------------

def cmd_infer(args) -> int:
    if args.mode == GH and (args.target is None) == (not args.tau_sweep):
        raise InputError("gh mode needs exactly one of --target or --tau-sweep")
    if args.mode == FULL and (args.target or args.tau_sweep):
        raise InputError("--target/--tau-sweep only apply to gh mode")
    program = load_program(args.program)
    cfg = InferConfig(
        degree=args.degree,
        mode=args.mode,
        target=args.target,
        tau_sweep=args.tau_sweep,
        mult=tuple(args.mult or ()),
        emit_basis=args.emit_basis,
        cap=args.cap,
    )
    try:
        syn = run_infer(program, cfg, Path(args.program).name)
    except (ValueError, UnboundVariable) as e:
        raise InputError(str(e)) from None
    _emit(syn.report.to_json(), args.json, format_report(syn.report))
    return STATUS_EXIT[syn.report.status]


def cmd_gamma(args) -> int:
    program = load_program(args.program)
    pins = {}
    bases = {}
    for item in args.pin or ():
        var, _, deg = item.partition("=")
        if not deg or var.strip() not in program.declared_vars:
            raise InputError(f"bad pin {item!r}; expected VAR=DEGREE with a program variable")
        try:
            pins[var.strip()] = parse_gdeg(deg, bases)
        except ValueError as e:
            raise InputError(str(e)) from None
    try:
        inf = infer_gamma(program, pins=pins)
    except Unsatisfiable as e:
        raise InputError(str(e)) from None
    order = list(program.declared_vars)
    literals = [
        {"name": e.name, "value": str(e.value), "line": e.loc[0] if e.loc else None, "gdeg": str(inf.gamma[e.name])}
        for e in inf.table
    ]
    obj = {
        "program": Path(args.program).name,
        "gamma": {v: str(inf.gamma[v]) for v in order},
        "literals": literals,
    }
    text = "\n".join(format_gamma({v: inf.gamma[v] for v in order}, order))
    if literals:
        text += "\nliterals:\n" + "\n".join(
            f"  {d['name']} = {d['value']} (line {d['line']}) : {d['gdeg']}" for d in literals
        )
    _emit(obj, args.json, text)
    return 0


def cmd_check(args) -> int:
    program = load_program(args.program)
    try:
        p = parse_poly(args.invariant, list(program.declared_vars))
    except ParseError as e:
        raise InputError(f"invariant: {e.msg}") from None
    seed = default_seed() if args.seed is None else args.seed
    aligned = aligned_variables(program) if args.align else frozenset()
    try:
        rep = check_postcondition(program, p, args.trials, args.steps, seed, aligned)
    except UnboundVariable as e:
        raise InputError(f"invariant mentions unknown variable {e.name!r}") from None
    obj = {"program": Path(args.program).name, "invariant": args.invariant, "seed": seed, **rep.to_json()}
    text = (
        f"{'passed' if rep.passed else 'FAILED'}: {rep.terminated} terminated, "
        f"{rep.vacuous_count} vacuous, {len(rep.violations)} violations"
    )
    _emit(obj, args.json, text)
    return EXIT_FOUND if rep.passed else EXIT_VIOLATION


# -- benchmark harness ------------------------------------------------------------

MANIFEST = "manifest.ini"


def read_manifest(suite: Path) -> List[dict]:
    """Benchmark entries in file order; an absent manifest means an empty suite."""
    path = suite / MANIFEST
    if not path.exists():
        return []
    cp = configparser.ConfigParser()
    cp.read(path)
    out = []
    for name in cp.sections():
        sec = cp[name]
        try:
            out.append(
                {
                    "name": name,
                    "file": str(suite / sec["file"]),
                    "degree": sec.getint("degree"),
                    "target": sec.get("target"),
                    "align": sec.getboolean("align", fallback=False),
                    "modes": [m.strip() for m in sec.get("modes", "full, gh").split(",") if m.strip()],
                }
            )
        except (KeyError, ValueError) as e:
            raise InputError(f"{path}: section [{name}]: {e}") from None
    return out


def run_bench_task(task: dict) -> dict:
    """One (program, mode) run plus its empirical check; errors are recorded, not raised."""
    mode = task["mode"]
    try:
        program = load_program(task["file"])
        cfg = InferConfig(task["degree"], mode, task["target"] if mode == GH else None)
        syn = run_infer(program, cfg, task["name"])
    except (InputError, ValueError, UnboundVariable) as e:
        report = RunReport(task["name"], mode, task["degree"], None, 0, 0, 0, 0.0, 0.0, ERROR, error=str(e))
        return report.to_json()
    out = syn.report.to_json()
    if syn.report.status == FOUND and task.get("check", True):
        aligned = aligned_variables(program) if task["align"] else frozenset()
        reps = [check_postcondition(program, p, 100, DEFAULT_BUDGET, task["seed"], aligned) for p in syn.polys]
        out["check"] = {
            "passed": all(r.passed for r in reps),
            "terminated": min(r.terminated for r in reps),
            "violations": sum(len(r.violations) for r in reps),
        }
        if mode == GH:
            problems = subset_check(syn)
            out["full_mode_replay"] = "ok" if not problems else problems
    return out


def bench_tasks(entries: Sequence[dict], seed: int, check: bool = True) -> List[dict]:
    return [dict(e, mode=m, seed=seed, check=check) for e in entries for m in e["modes"]]


def run_bench(suite: Path, jobs: int = 1, seed: int = DEFAULT_SEED, check: bool = True) -> List[dict]:
    tasks = bench_tasks(read_manifest(suite), seed, check)
    if jobs <= 1 or len(tasks) <= 1:
        return [run_bench_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_bench_task, tasks))


def comparison_table(reports: Sequence[dict]) -> str:
    rows = {}
    for r in reports:
        rows.setdefault((r["program"], r["degree"]), {})[r["mode"]] = r
    head = f"{'program':<12} {'deg':>3} {'#m full':>8} {'#m gh':>6} {'t_sol full':>11} {'t_sol gh':>9}  status (full/gh)"
    lines = [head, "-" * len(head)]
    for (name, deg), modes in rows.items():
        f, g = modes.get(FULL, {}), modes.get(GH, {})
        lines.append(
            f"{name:<12} {deg:>3} {f.get('template_size', '-'):>8} {g.get('template_size', '-'):>6} "
            f"{f.get('t_sol_ms', '-'):>11} {g.get('t_sol_ms', '-'):>9}  "
            f"{f.get('status', '-')}/{g.get('status', '-')}"
        )
    return "\n".join(lines)


def cmd_bench(args) -> int:
    suite = Path(args.suite)
    if not suite.is_dir():
        raise InputError(f"{suite} is not a directory")
    seed = default_seed() if args.seed is None else args.seed
    reports = run_bench(suite, args.jobs, seed, not args.no_check)
    text = json.dumps(reports, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(comparison_table(reports))
    else:
        print(text)
        print(comparison_table(reports), file=sys.stderr)
    return 0


# -- entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="invgh", description="Algebraic invariant synthesis with g-degree templates.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="synthesize a polynomial invariant")
    p.add_argument("program")
    p.add_argument("--degree", "-d", type=int, required=True)
    p.add_argument("--mode", choices=[FULL, GH], default=GH)
    p.add_argument("--target", help="monomial whose g-degree selects the template (gh mode)")
    p.add_argument("--tau-sweep", action="store_true", help="try every realizable g-degree (gh mode)")
    p.add_argument("--mult", action="append", help="extra multiplier polynomial for matchings (repeatable)")
    p.add_argument("--emit-basis", action="store_true", help="report a basis of all invariants found")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum goal-set size per constraint")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("gamma", help="print the inferred g-degree assignment")
    p.add_argument("program")
    p.add_argument("--pin", action="append", help="fix a variable's g-degree, e.g. v=L*T^-1 (repeatable)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("check", help="test a candidate invariant on random runs")
    p.add_argument("program")
    p.add_argument("--invariant", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--steps", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--seed", type=int)
    p.add_argument("--align", action="store_true", help="sample loop-counter-like variables as small naturals")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="run a benchmark suite described by manifest.ini")
    p.add_argument("--suite", required=True)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-check", action="store_true", help="skip empirical checks of found invariants")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"invgh: error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
