"""Predicate specialization: one-step unfolding, abstraction and renaming.

``specialize`` runs the usual partial-evaluation driver: keep a set S of
specialization atoms, unfold each against the program, add every body atom
(abstracted) back to S, and stop once S no longer grows.  Abstraction
replaces individual arguments by fresh variables and keeps predicate
arguments, so S stays finite.  ``rename`` then turns every atom of S into a
fresh predicate over the atom's variables.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from dataclasses import dataclass, field, replace
from typing import Optional

from predspec.analysis import check_extended_fragment, check_program
from predspec.ast import (
    BOOL, IND, App, CanonAtom, Clause, Const, Eq, FunApp, Goal, Literal, Pred, Program, Var,
    apply_subst, canonicalize_atom, clause_exprs, match, rename as rename_vars, subexprs, vars_of,
)
from predspec.errors import (
    FragmentViolation, IterationLimit, OpenGoal, ResidualPredicateVariable,
)

log = logging.getLogger(__name__)

MAX_ITERATIONS = 10_000


class SpecSet:
    """Insertion-ordered set of canonical atoms (no two are variants)."""

    def __init__(self, atoms=()):
        self._d = {}
        for a in atoms:
            self.add(a)

    def add(self, atom) -> bool:
        c = atom if isinstance(atom, CanonAtom) else canonicalize_atom(atom)
        if c in self._d:
            return False
        self._d[c] = None
        return True

    def __contains__(self, atom):
        c = atom if isinstance(atom, CanonAtom) else canonicalize_atom(atom)
        return c in self._d

    def __iter__(self):
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __eq__(self, other):
        return isinstance(other, SpecSet) and set(self._d) == set(other._d)

    def __repr__(self):
        return "{" + ", ".join(map(str, self._d)) + "}"


@dataclass(frozen=True)
class RenameEntry:
    name: str
    params: tuple

    @property
    def type(self):
        return Pred(tuple(v.type for v in self.params))


@dataclass
class SpecOutput:
    program: Program
    spec_set: SpecSet
    goal: Goal
    iterations: int
    table: Optional[dict] = None
    renamed_goal: Optional[Goal] = None
    warnings: list = field(default_factory=list)


def abstract_atom(atom: App) -> CanonAtom:
    """Generalize the individual arguments of ``atom``; keep predicate arguments."""
    args = tuple(a if isinstance(a.type, Pred) else Var(f"#{i}", a.type)
                 for i, a in enumerate(atom.args))
    return canonicalize_atom(App(atom.head, args, atom.type))


def abstract(atoms) -> SpecSet:
    return SpecSet(abstract_atom(a.atom if isinstance(a, CanonAtom) else a) for a in atoms)


def is_most_general(atom) -> bool:
    """All arguments are distinct variables."""
    atom = atom.atom if isinstance(atom, CanonAtom) else atom
    return all(isinstance(a, Var) for a in atom.args) and len(set(atom.args)) == len(atom.args)


def unfold_clause(atom, clause: Clause) -> Clause:
    """Specialize one program clause to one atom of S.

    Variables of the atom standing directly in an argument position take the
    name of the matching clause parameter, so specialized clauses keep the
    source variable names; other atom variables get names fresh for the clause.
    """
    atom = atom.atom if isinstance(atom, CanonAtom) else atom
    if is_most_general(atom):
        return clause
    used = {v.name for e in clause_exprs(clause) for v in vars_of(e)}
    mapping = {}
    for a, p in zip(atom.args, clause.args):
        if isinstance(a, Var) and a not in mapping:
            mapping[a] = Var(p.name, a.type)
    for v in vars_of(atom):
        if v not in mapping:
            name = v.name
            while name in used:
                name += "_"
            used.add(name)
            mapping[v] = Var(name, v.type)
    args = tuple(rename_vars(a, mapping) for a in atom.args)
    theta = {p: a for p, a in zip(clause.params, args) if p != a}
    body = apply_subst(clause.body, theta) if theta else clause.body
    return Clause(clause.head, args, body, clause.loc)


def unfold(program: Program, s, warnings=None) -> list:
    """One-step unfolding of every atom of ``s`` against ``program``."""
    out = []
    for a in s:
        out.extend(_unfold_atom(program, a, warnings))
    return out


def _unfold_atom(program, a, warnings):
    a = a.atom if isinstance(a, CanonAtom) else a
    clauses = program.clauses_for(a.head.name)
    if not clauses:
        msg = f"UndefinedPredicate: {a.head.name}/{a.head.type.arity} has no clauses; {a} always fails"
        log.warning(msg)
        if warnings is not None:
            warnings.append(msg)
    return [unfold_clause(a, c) for c in clauses]


def _body_call_atoms(clause):
    for lit in clause.body:
        if isinstance(lit.atom, App) and isinstance(lit.atom.head, Const):
            yield lit.atom


def specialize(program: Program, goal: Goal, max_iterations=MAX_ITERATIONS) -> SpecOutput:
    """Run unfold/abstract to a fixpoint, seeded with the abstracted goal atoms.

    Work proceeds level by level (FIFO), which gives the same S as the batch
    loop but a reproducible insertion order.  ``iterations`` counts the
    passes, the last of which adds nothing.
    """
    s = SpecSet()
    level = []
    for atom in goal.atoms():
        if isinstance(atom.head, Const):
            key = abstract_atom(atom)
            if s.add(key):
                level.append(key)
    warnings = []
    unfolded = {}
    iterations = 0
    while True:
        iterations += 1
        if iterations > max_iterations:
            raise IterationLimit(f"no fixpoint after {max_iterations} iterations (|S| = {len(s)})")
        new = []
        for key in level:
            clauses = _unfold_atom(program, key, warnings)
            unfolded[key] = clauses
            for c in clauses:
                for b in _body_call_atoms(c):
                    k = abstract_atom(b)
                    if s.add(k):
                        new.append(k)
        if not new:
            break
        level = new
    clauses = tuple(c for key in s for c in unfolded[key])
    return SpecOutput(Program(clauses, program.signatures), s, goal, iterations, warnings=warnings)


def build_rename_table(s: SpecSet, taken) -> dict:
    """Map each atom of S to a predicate name and its parameter variables.

    Most-general atoms keep their own name; others become ``<pred>_s<k>``
    with k counted per predicate in S order.
    """
    taken = set(taken)
    counters = {}
    table = {}
    for a in s:
        if is_most_general(a):
            table[a] = RenameEntry(a.pred, a.args)
            continue
        k = counters.get(a.pred, 0) + 1
        counters[a.pred] = k
        name = f"{a.pred}_s{k}"
        while name in taken:
            name += "_"
        taken.add(name)
        table[a] = RenameEntry(name, a.vars)
    return table


@lru_cache(maxsize=None)
def _general_key(head):
    return abstract_atom(App(head, tuple(Var(f"#{i}", t) for i, t in enumerate(head.type.params)), BOOL))


def rename_atom(atom, table):
    if not (isinstance(atom, App) and isinstance(atom.head, Const)):
        return atom
    if all(a.type == IND for a in atom.args):
        # abstraction of a first-order call is the most general atom
        entry = table[_general_key(atom.head)]
        return App(Const(entry.name, entry.type), atom.args, BOOL)
    key = abstract_atom(atom)
    entry = table[key]
    b = match(key.atom, atom)
    assert b is not None, f"{atom} is not an instance of {key}"
    return App(Const(entry.name, entry.type), tuple(b[v] for v in entry.params), BOOL)


def _rename_literal(lit, table):
    if isinstance(lit.atom, Eq):
        return lit
    return Literal(lit.positive, rename_atom(lit.atom, table))


def _collect_signatures(clauses, goal, base):
    sigs = {}
    exprs = [e for c in clauses for e in clause_exprs(c)] + [l.atom for l in goal.literals]
    for c in clauses:
        sigs.setdefault(c.head, Pred(tuple(a.type for a in c.args)))
    for e in exprs:
        for x in subexprs(e):
            if isinstance(x, Const) and isinstance(x.type, Pred):
                sigs.setdefault(x.name, x.type)
            elif isinstance(x, FunApp):
                sigs.setdefault(x.functor, base.get(x.functor))
    return sigs


def rename(out: SpecOutput, allow_pred_vars=False) -> SpecOutput:
    """Replace every atom of S, and every instance of one, by its fresh predicate."""
    program = out.program
    taken = set(program.signatures)
    table = build_rename_table(out.spec_set, taken)
    clauses = []
    for c in program.clauses:
        head = rename_atom(App(Const(c.head, program.signatures[c.head]), c.args, BOOL), table)
        body = tuple(_rename_literal(l, table) for l in c.body)
        clauses.append(Clause(head.head.name, head.args, body, c.loc))
    goal = Goal(tuple(_rename_literal(l, table) for l in out.goal.literals))
    if not allow_pred_vars:
        for e in [x for c in clauses for x in clause_exprs(c)] + [l.atom for l in goal.literals]:
            for v in vars_of(e):
                if v.is_pred:
                    raise ResidualPredicateVariable(
                        f"predicate variable {v.name} survives specialization in {e}")
    sigs = _collect_signatures(clauses, goal, program.signatures)
    return replace(out, program=Program(tuple(clauses), sigs), table=table, renamed_goal=goal)


def has_pred_vars(goal: Goal) -> bool:
    return any(v.is_pred for v in goal.vars)


def first_order_problems(program: Program, goal: Optional[Goal] = None) -> list:
    """Everything that keeps ``program`` from being first-order, as messages."""
    problems = []
    exprs = [(c.head, e) for c in program.clauses for e in clause_exprs(c)]
    if goal is not None:
        exprs += [("?-", l.atom) for l in goal.literals]
    for owner, e in exprs:
        for x in subexprs(e):
            if isinstance(x, Var) and x.type != IND:
                problems.append(f"{owner}: predicate variable {x.name}")
            elif isinstance(x, App):
                if not isinstance(x.head, Const):
                    problems.append(f"{owner}: call through {x.head}")
                if x.type != BOOL:
                    problems.append(f"{owner}: partial application {x}")
                for a in x.args:
                    if a.type != IND:
                        problems.append(f"{owner}: predicate-typed argument {a} in {x}")
    for c in program.clauses:
        if any(a.type != IND for a in c.args):
            problems.append(f"{c.head}: predicate-typed parameter")
    return problems


def firstify(program: Program, goal: Goal, residual=False, check=True,
             max_iterations=MAX_ITERATIONS) -> SpecOutput:
    """Specialize and rename; the result is first-order for closed goals.

    With ``residual`` an open goal is accepted and surviving predicate
    variables are left in place.
    """
    if check:
        report = check_program(program)
        if not report.admitted:
            raise FragmentViolation(report)
    if has_pred_vars(goal) and not residual:
        names = ", ".join(v.name for v in goal.vars if v.is_pred)
        raise OpenGoal(f"goal {goal} has free predicate variables: {names}")
    out = rename(specialize(program, goal, max_iterations), allow_pred_vars=residual)
    if not residual:
        problems = first_order_problems(out.program, out.renamed_goal)
        assert not problems, problems
    return out


def most_general_goal(program: Program, top: str) -> Goal:
    t = program.signatures[top]
    args = tuple(Var(f"X{i}", p) for i, p in enumerate(t.params, 1))
    return Goal((Literal(True, App(Const(top, t), args, BOOL)),))


def eliminate_partial_apps(program: Program, top: str, max_iterations=MAX_ITERATIONS) -> Program:
    """Rewrite an extended-fragment program into one without partial applications.

    Specializes with respect to the most general call of ``top``; predicate
    variables remain as ordinary parameters.
    """
    report = check_extended_fragment(program)
    if not report.admitted:
        raise FragmentViolation(report)
    out = specialize(program, most_general_goal(program, top), max_iterations)
    return rename(out, allow_pred_vars=True).program


def format_report(out: SpecOutput) -> str:
    lines = [f"atoms: {len(out.spec_set)}", f"iterations: {out.iterations}"]
    if out.table:
        for a, e in out.table.items():
            lines.append(f"{a} -> {e.name}({','.join(v.name for v in e.params)})")
    return "\n".join(lines)
