"""Serialization to Prolog / surface text, and the apply-based baseline encoding."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Optional

from predspec import __version__
from predspec.ast import (
    BOOL, IND, App, Clause, Const, Eq, FunApp, Func, Goal, Literal, Pred, Program, Var,
    fold_head_equalities, vars_of,
)
from predspec.errors import NotFirstOrder
from predspec.specializer import first_order_problems

_VAR_NAME = re.compile(r"[A-Z_][A-Za-z0-9_]*\Z")


# -- text formatting ------------------------------------------------------------

def format_expr(e, names=None) -> str:
    if isinstance(e, Var):
        return names.get(e, e.name) if names else e.name
    if isinstance(e, Const):
        return e.name
    if isinstance(e, FunApp):
        return f"{e.functor}({','.join(format_expr(a, names) for a in e.args)})"
    if isinstance(e, App):
        head = format_expr(e.head, names)
        if not e.args:
            return head
        return f"{head}({','.join(format_expr(a, names) for a in e.args)})"
    if isinstance(e, Eq):
        return f"{format_expr(e.lhs, names)} = {format_expr(e.rhs, names)}"
    raise TypeError(f"cannot format {e!r}")


def format_literal(lit: Literal, names=None, negation="\\+") -> str:
    s = format_expr(lit.atom, names)
    return s if lit.positive else f"{negation} {s}"


def _var_names(clause_exprs):
    """Keep source names; invent ``_G<k>`` for names Prolog would not accept."""
    names, k = {}, 0
    for e in clause_exprs:
        for v in vars_of(e):
            if v not in names and not _VAR_NAME.match(v.name):
                k += 1
                names[v] = f"_G{k}"
    return names


def format_clause(c: Clause, negation="\\+", resugar=True) -> str:
    args, body = c.args, c.body
    if resugar and body:
        args, body = fold_head_equalities(c) or (args, body)
    exprs = list(args) + [l.atom for l in body]
    names = _var_names(exprs)
    head = c.head if not args else f"{c.head}({','.join(format_expr(a, names) for a in args)})"
    if not body:
        return head + "."
    return head + " :- " + ", ".join(format_literal(l, names, negation) for l in body) + "."


def format_goal(goal: Goal, negation="\\+") -> str:
    names = _var_names([l.atom for l in goal.literals])
    return ", ".join(format_literal(l, names, negation) for l in goal.literals)


def format_type(t) -> str:
    if t == IND:
        return "i"
    return "pred(" + ",".join(format_type(p) for p in t.params) + ")"


def emit_hl(program: Program, goal: Optional[Goal] = None) -> str:
    """Surface syntax with ``hotype`` directives; re-readable by the parser."""
    lines = []
    for name, t in program.signatures.items():
        if isinstance(t, Pred) and any(isinstance(p, Pred) for p in t.params):
            lines.append(f":- hotype({name}, {format_type(t)}).")
    if goal is not None:
        lines.append(f"% query: {format_goal(goal, 'not')}")
    lines.extend(format_clause(c, negation="not") for c in program.clauses)
    return "\n".join(lines) + "\n"


# -- Prolog output --------------------------------------------------------------

@dataclass
class PrologDoc:
    comments: list = field(default_factory=list)
    directives: list = field(default_factory=list)
    clauses: list = field(default_factory=list)

    @property
    def text(self) -> str:
        lines = [f"% {c}" if c else "%" for c in self.comments]
        lines += self.directives + self.clauses
        return "\n".join(lines) + "\n"

    def __str__(self):
        return self.text


def source_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def emit_prolog(program: Program, goal: Optional[Goal] = None, driver=False,
                source: Optional[str] = None) -> PrologDoc:
    """Standard Prolog text for a first-order program.

    Negation prints as ``\\+`` and equality as ``=``.  With ``driver`` a
    ``main/0`` is added that writes every answer of the goal.
    """
    problems = first_order_problems(program, goal)
    if problems:
        raise NotFirstOrder("; ".join(problems[:5]))
    clause_lines = [format_clause(c) for c in program.clauses]
    digest = source_hash(source if source is not None else "\n".join(clause_lines))
    doc = PrologDoc(comments=[f"generated by predspec {__version__}", f"source sha256: {digest}"])
    if goal is not None:
        doc.comments.append(f"query: {format_goal(goal)}")
    doc.clauses = clause_lines
    if driver and goal is not None:
        gv = [v for v in goal.vars]
        out = f"ans({','.join(v.name for v in gv)})" if gv else "yes"
        doc.clauses.append(f"main :- {format_goal(goal)}, write({out}), nl, fail.")
        doc.clauses.append("main.")
    return doc


# -- apply-based baseline ---------------------------------------------------------

def _is_higher_order(t) -> bool:
    return isinstance(t, Pred) and any(isinstance(p, Pred) for p in t.params)


class _Defun:
    def __init__(self, program: Program):
        self.program = program
        self.sigs = program.signatures
        self.ho = {n for n, t in self.sigs.items() if _is_higher_order(t)}
        taken = set(self.sigs)
        base = "apply"
        while any(n == base or n.startswith(base + "_") for n in taken):
            base += "_"
        self.apply_base = base
        papp = "papp"
        while any(n.startswith(papp) for n in taken):
            papp += "_"
        self.papp = papp
        self.ctor_names = {}
        self.taken = taken | {papp}
        self.used = set()
        self.ctors = {}

    def apply_name(self, k):
        self.used.add(k)
        return f"{self.apply_base}_{k}"

    def apply_atom(self, k, args):
        name = self.apply_name(k)
        return App(Const(name, Pred((IND,) * (k + 1))), tuple(args), BOOL)

    def ctor_name(self, p):
        if p not in self.ctor_names:
            name = p
            if p not in self.ho:
                name = p + "_c"
                while name in self.taken:
                    name += "_"
            self.taken.add(name)
            self.ctor_names[p] = name
        return self.ctor_names[p]

    def value(self, e):
        """Encode a predicate-typed expression as an individual term."""
        if isinstance(e, Const):
            return Const(e.name, IND)
        if isinstance(e, Var):
            return Var(e.name, IND)
        assert isinstance(e, App) and isinstance(e.type, Pred), e
        args = tuple(self.arg(a) for a in e.args)
        if isinstance(e.head, Const):
            self.ctors.setdefault(("pred", e.head.name, len(args)), None)
            return FunApp(self.ctor_name(e.head.name), args)
        self.ctors.setdefault(("var", len(args), e.type.arity), None)
        return FunApp(f"{self.papp}{len(args)}", (self.value(e.head),) + args)

    def arg(self, e):
        return self.value(e) if isinstance(e.type, Pred) else e

    def call(self, atom):
        if isinstance(atom, Eq):
            return atom
        args = tuple(self.arg(a) for a in atom.args)
        if isinstance(atom.head, Const):
            p = atom.head.name
            if p not in self.ho:
                return App(Const(p, self.sigs.get(p, atom.head.type)), args, BOOL)
            return self.apply_atom(len(args), (Const(p, IND),) + args)
        return self.apply_atom(len(args), (self.value(atom.head),) + args)

    def literal(self, lit):
        return Literal(lit.positive, self.call(lit.atom))

    def clause(self, c: Clause) -> Clause:
        body = tuple(self.literal(l) for l in c.body)
        args = tuple(self.arg(a) for a in c.args)
        if c.head in self.ho:
            name = self.apply_name(len(args))
            return Clause(name, (Const(c.head, IND),) + args, body, c.loc)
        return Clause(c.head, args, body, c.loc)

    def full_call(self, p, args):
        if p in self.ho:
            return self.apply_atom(len(args), (Const(p, IND),) + tuple(args))
        return App(Const(p, self.sigs[p]), tuple(args), BOOL)

    def ctor_clauses(self):
        out = []
        done = set()
        while len(done) < len(self.ctors):
            for key in list(self.ctors):
                if key in done:
                    continue
                done.add(key)
                if key[0] == "pred":
                    _, p, m = key
                    k = self.sigs[p].arity - m
                    a = tuple(Var(f"A{i}", IND) for i in range(1, m + 1))
                    x = tuple(Var(f"X{i}", IND) for i in range(1, k + 1))
                    head = (FunApp(self.ctor_name(p), a),) + x
                    out.append(Clause(self.apply_name(k), head, (Literal(True, self.full_call(p, a + x)),)))
                else:
                    _, m, k = key
                    f = Var("F", IND)
                    a = tuple(Var(f"A{i}", IND) for i in range(1, m + 1))
                    x = tuple(Var(f"X{i}", IND) for i in range(1, k + 1))
                    head = (FunApp(f"{self.papp}{m}", (f,) + a),) + x
                    body = Literal(True, self.apply_atom(m + k, (f,) + a + x))
                    out.append(Clause(self.apply_name(k), head, (body,)))
        return out

    def bridges(self):
        out = []
        for k in sorted(self.used):
            for p, t in self.sigs.items():
                if isinstance(t, Pred) and p not in self.ho and t.arity == k and p in self.program.by_pred:
                    x = tuple(Var(f"X{i}", IND) for i in range(1, k + 1))
                    out.append(Clause(self.apply_name(k), (Const(p, IND),) + x,
                                      (Literal(True, App(Const(p, t), x, BOOL)),)))
        return out


def defunctionalize_reynolds(program: Program, goal: Optional[Goal] = None):
    """Warren/HiLog-style first-order encoding with one ``apply_k`` per arity.

    Predicate arguments become their names (or functor terms for partial
    applications); predicates with predicate parameters are defined through
    ``apply_n(name, ...)``; calls through variables go to ``apply_k``.
    First-order predicates keep their clauses and are called directly, with
    one bridging ``apply_k(p, X1..Xk) :- p(X1..Xk)`` clause each.
    """
    d = _Defun(program)
    clauses = [d.clause(c) for c in program.clauses]
    new_goal = Goal(tuple(d.literal(l) for l in goal.literals)) if goal is not None else None
    clauses += d.ctor_clauses()
    clauses += d.bridges()
    sigs = {}
    for p, t in program.signatures.items():
        if p in d.ho:
            continue
        if isinstance(t, Pred) and any(isinstance(x, Pred) for x in t.params):
            continue
        sigs[p] = t
    for k in sorted(d.used):
        sigs[d.apply_name(k)] = Pred((IND,) * (k + 1))
    for key in d.ctors:
        if key[0] == "pred":
            sigs[d.ctor_name(key[1])] = Func(key[2]) if key[2] else None
        else:
            sigs[f"{d.papp}{key[1]}"] = Func(key[1] + 1)
    sigs = {k: v for k, v in sigs.items() if v is not None}
    return Program(tuple(clauses), sigs), new_goal
