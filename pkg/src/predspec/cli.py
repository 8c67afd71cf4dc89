"""Command-line front end: check, firstify, defun, solve, equiv, bench."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from predspec import __version__
from predspec.analysis import check_program
from predspec.emitter import defunctionalize_reynolds, emit_hl, emit_prolog, format_goal
from predspec.errors import (
    FragmentViolation, NotFirstOrder, PredSpecError, UnknownFamily,
)
from predspec.interp import EngineLimits, check_equivalence, solve
from predspec.parser import load_program, parse_query
from predspec.specializer import firstify, format_report


class UsageError(Exception):
    pass


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _load(args):
    text = _read(args.input)
    program = load_program(text, filename=args.input)
    goal = parse_query(args.query, program) if getattr(args, "query", None) else None
    return text, program, goal


def _limits(args):
    return EngineLimits(max_depth=args.max_depth, max_steps=args.max_steps)


def _write(text, path, out):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        out.write(text)


def cmd_check(args, out, err):
    _, program, _ = _load(args)
    report = check_program(program)
    if not report.admitted:
        err.write(report.render() + "\n")
        return 1
    out.write(f"ok: {len(program.clauses)} clauses, {program.rule_count()} rules\n")
    return 0


def cmd_firstify(args, out, err):
    text, program, goal = _load(args)
    t0 = time.perf_counter()
    res = firstify(program, goal, residual=args.residual)
    ms = (time.perf_counter() - t0) * 1000.0
    try:
        doc = emit_prolog(res.program, res.renamed_goal, driver=args.driver, source=text).text
    except NotFirstOrder:
        # residual predicate variables: keep the surface syntax
        doc = emit_hl(res.program, res.renamed_goal)
    _write(doc, args.output, out)
    if args.output:
        out.write(format_report(res) + "\n")
        out.write(f"{format_goal(goal)} -> {format_goal(res.renamed_goal)}\n")
    for w in res.warnings:
        err.write(f"warning: {w}\n")
    if args.stats:
        err.write(f"transform_ms={ms:.3f} atoms={len(res.spec_set)} iterations={res.iterations} "
                  f"rules={res.program.rule_count()}\n")
    return 0


def cmd_defun(args, out, err):
    text, program, goal = _load(args)
    p, g = defunctionalize_reynolds(program, goal)
    _write(emit_prolog(p, g, driver=args.driver and g is not None, source=text).text, args.output, out)
    return 0


def cmd_solve(args, out, err):
    _, program, goal = _load(args)
    ans, engine = solve(program, goal, _limits(args), args.occurs_check, engine=args.engine)
    lines = ans.render()
    _write("".join(l + "\n" for l in lines) if lines else "no\n", args.output, out)
    if args.stats:
        err.write(f"engine={engine} answers={len(ans)} steps={ans.steps}\n")
    return 0


def cmd_equiv(args, out, err):
    _, program, goal = _load(args)
    res = firstify(program, goal)
    lhs = (program, goal)
    if args.baseline == "reynolds":
        lhs = defunctionalize_reynolds(program, goal)
    v = check_equivalence(lhs[0], lhs[1], res.program, res.renamed_goal, _limits(args), args.occurs_check)
    out.write(v.record() + "\n")
    if v.witness is not None:
        side, binding = v.witness
        out.write(f"witness: {side} {', '.join(f'{k}={x}' for k, x in binding) or 'yes'}\n")
    if v.reason:
        err.write(f"inconclusive: {v.reason}\n")
    if args.stats:
        err.write(f"engines={','.join(v.engines)}\n")
    return 0


def _sizes(text):
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--sizes expects comma-separated integers, got {text!r}") from None
    if not sizes or min(sizes) < 1:
        raise UsageError("--sizes needs positive integers")
    return sizes


def cmd_bench(args, out, err):
    from predspec.corpus import BenchSpec, run_bench
    from predspec.report import csv_text, write_report

    modes = ["original", "specialized"] + (["reynolds"] if args.baseline == "reynolds" else [])
    limits = _limits(args)
    metrics = []
    for fam in args.family.split(","):
        for n in _sizes(args.sizes):
            try:
                spec = BenchSpec(fam.strip(), n, args.seed)
            except UnknownFamily as e:
                raise UsageError(str(e)) from None
            for mode in modes:
                metrics.append(run_bench(spec, mode, limits))
    if args.output:
        for p in write_report(metrics, args.output, with_time=args.stats, plots=args.plot):
            err.write(f"wrote {p}\n")
    else:
        out.write(csv_text(metrics, with_time=args.stats))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="predspec", description="Specialize higher-order logic programs to Prolog.")
    ap.add_argument("--version", action="version", version=f"predspec {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, query=False, output=True):
        p.add_argument("input", help="source program (.hl)")
        p.add_argument("--query", required=query, help="comma-separated goal literals")
        if output:
            p.add_argument("-o", "--output", help="output file (default: stdout)")
        p.add_argument("--stats", action="store_true", help="print statistics to stderr")

    def engine(p):
        p.add_argument("--max-depth", type=int, default=512)
        p.add_argument("--max-steps", type=int, default=1_000_000)
        p.add_argument("--occurs-check", action="store_true")

    p = sub.add_parser("check", help="validate the fragment conditions")
    common(p, output=False)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("firstify", help="specialize to a first-order program")
    common(p, query=True)
    p.add_argument("--driver", action="store_true", help="add a main/0 that prints every answer")
    p.add_argument("--residual", action="store_true", help="allow open goals; keep predicate variables")
    p.set_defaults(func=cmd_firstify)

    p = sub.add_parser("defun", help="apply-based encoding (baseline)")
    common(p)
    p.add_argument("--driver", action="store_true")
    p.set_defaults(func=cmd_defun)

    p = sub.add_parser("solve", help="run a query with the reference engines")
    common(p, query=True)
    engine(p)
    p.add_argument("--engine", choices=("auto", "topdown", "bottomup"), default="topdown")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("equiv", help="compare answers before and after specialization")
    common(p, query=True, output=False)
    engine(p)
    p.add_argument("--baseline", choices=("original", "reynolds"), default="original",
                   help="what to compare the specialized program against")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("bench", help="run corpus families and emit CSV (and figures)")
    p.add_argument("--family", default="closure", help="comma-separated, e.g. closure,conj5,w2")
    p.add_argument("--sizes", default="10,50,100")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--baseline", choices=("none", "reynolds"), default="reynolds")
    p.add_argument("-o", "--output", help="CSV path; figures are written beside it")
    p.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True,
                   help="render figures next to the CSV (with -o)")
    p.add_argument("--stats", action="store_true", help="include transform_ms")
    engine(p)
    p.set_defaults(func=cmd_bench, max_steps=20_000_000)
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if getattr(args, "max_depth", 1) <= 0 or getattr(args, "max_steps", 1) <= 0:
        err.write("predspec: limits must be positive\n")
        return 2
    try:
        return args.func(args, out, err)
    except UsageError as e:
        err.write(f"predspec: {e}\n")
        return 2
    except FragmentViolation as e:
        err.write(e.report.render() + "\n")
        return 1
    except PredSpecError as e:
        err.write(f"{type(e).__name__}: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
