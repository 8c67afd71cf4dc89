"""Depth-first, left-to-right SLD resolution with negation as failure.

Runs higher-order and first-order programs alike.  Predicate values are
closures (a predicate name plus the arguments supplied so far); a call
through a variable bound to a closure is flattened and then resolved like
any other call.  Closures are never unified with anything but an identical
closure.

The machine uses an explicit continuation and choicepoint stack so that
deep recursion does not consume Python stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from predspec.ast import App, Const, Eq, FunApp, Goal, Pred, Program, Var, fold_head_equalities
from predspec.errors import Floundering, ResourceExhausted, UnboundPredicateCall


@dataclass(frozen=True)
class EngineLimits:
    max_depth: int = 512
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.max_depth <= 0 or self.max_steps <= 0:
            raise ValueError("engine limits must be positive")


@dataclass(frozen=True)
class AnswerSet:
    """Ground answers for the goal variables, under set semantics."""
    vars: tuple
    rows: frozenset
    steps: int = field(default=0, compare=False)
    ground: bool = field(default=True, compare=False)

    def sorted_rows(self):
        return sorted(self.rows)

    def __len__(self):
        return len(self.rows)

    def render(self):
        if not self.vars:
            return ["yes"] if self.rows else []
        return [", ".join(f"{v}={x}" for v, x in zip(self.vars, row)) for row in self.sorted_rows()]


class RVar:
    __slots__ = ("ref",)

    def __init__(self):
        self.ref = None


class PClo:
    """Predicate value: ``name`` applied to ``args`` (possibly none)."""
    __slots__ = ("name", "args")

    def __init__(self, name, args=()):
        self.name = name
        self.args = args

    def __eq__(self, other):
        return isinstance(other, PClo) and self.name == other.name and self.args == other.args

    def __hash__(self):
        return hash((self.name, self.args))


class TFun:
    __slots__ = ("f", "args")

    def __init__(self, f, args):
        self.f = f
        self.args = args


class TClo:
    __slots__ = ("head", "args")

    def __init__(self, head, args):
        self.head = head
        self.args = args


CALL, NEG, EQ = 0, 1, 2


def deref(t):
    while type(t) is RVar:
        r = t.ref
        if r is None:
            return t
        t = r
    return t


def _occurs(v, t):
    t = deref(t)
    if t is v:
        return True
    if type(t) is tuple:
        return any(_occurs(v, a) for a in t[1:])
    if type(t) is PClo:
        return any(_occurs(v, a) for a in t.args)
    return False


def term_str(t, _path=frozenset()) -> str:
    """Prolog text of a runtime term; unbound variables print as ``_`` and
    the back edge of a cyclic term (possible without the occurs check) as ``...``."""
    t = deref(t)
    tt = type(t)
    if tt is str:
        return t
    if tt is RVar:
        return "_"
    if id(t) in _path:
        return "..."
    inner = _path | {id(t)}
    if tt is tuple:
        return f"{t[0]}({','.join(term_str(a, inner) for a in t[1:])})"
    name = term_str(t.name, inner) if type(t.name) is not str else t.name
    if not t.args:
        return name
    return f"{name}({','.join(term_str(a, inner) for a in t.args)})"


def is_ground_term(t, _path=frozenset()) -> bool:
    """No unbound variables; cyclic terms count as non-ground."""
    t = deref(t)
    tt = type(t)
    if tt is RVar:
        return False
    if tt is str:
        return True
    if id(t) in _path:
        return False
    inner = _path | {id(t)}
    if tt is tuple:
        return all(is_ground_term(a, inner) for a in t[1:])
    return is_ground_term(t.name, inner) and all(is_ground_term(a, inner) for a in t.args)


# -- compilation ------------------------------------------------------------------

class _Compiler:
    def __init__(self):
        self.slots = {}

    def slot(self, v):
        i = self.slots.get(v)
        if i is None:
            i = self.slots[v] = len(self.slots)
        return i

    def term(self, e):
        """Template for an expression: int = variable slot, otherwise data."""
        if isinstance(e, Var):
            return self.slot(e)
        if isinstance(e, Const):
            return PClo(e.name) if isinstance(e.type, Pred) else e.name
        if isinstance(e, FunApp):
            args = tuple(self.term(a) for a in e.args)
            if all(_is_data(a) for a in args):
                return (e.functor,) + args
            return TFun(e.functor, args)
        if isinstance(e, App):
            args = tuple(self.term(a) for a in e.args)
            head = self.term(e.head)
            if _is_data(head) and all(_is_data(a) for a in args):
                return PClo(head.name, head.args + args)
            return TClo(head, args)
        raise TypeError(f"cannot compile {e!r}")

    def literal(self, lit):
        a = lit.atom
        if isinstance(a, Eq):
            return (EQ, self.term(a.lhs), self.term(a.rhs))
        head = a.head.name if isinstance(a.head, Const) else self.term(a.head)
        return (CALL if lit.positive else NEG, head, tuple(self.term(x) for x in a.args))


def _is_data(t):
    tt = type(t)
    return tt is str or tt is tuple or tt is PClo


class CClause:
    __slots__ = ("head", "body", "nvars", "src")

    def __init__(self, head, body, nvars, src):
        self.head = head
        self.body = body
        self.nvars = nvars
        self.src = src


def compile_clause(c):
    # fold leading head equalities; when that fails (a clash, or an occurs
    # failure the runtime may not check) leave them to run as body literals
    args, body = fold_head_equalities(c) or (c.args, c.body)
    comp = _Compiler()
    head = tuple(comp.term(a) for a in args)
    lits = tuple(comp.literal(l) for l in body)
    return CClause(head, lits, len(comp.slots), c)


def _head_key(t):
    tt = type(t)
    if tt is str:
        return t
    if tt is tuple:
        return (t[0], len(t))
    if tt is TFun:
        return (t.f, len(t.args) + 1)
    return None


def _arg_key(t):
    t = deref(t)
    tt = type(t)
    if tt is str:
        return t
    if tt is tuple:
        return (t[0], len(t))
    return None


class _PredIndex:
    def __init__(self, clauses):
        self.clauses = clauses
        self.by_pos = {}

    def position(self, i):
        idx = self.by_pos.get(i)
        if idx is None:
            lists, wild = {}, []
            for c in self.clauses:
                k = _head_key(c.head[i])
                if k is None:
                    wild.append(c)
                    for lst in lists.values():
                        lst.append(c)
                else:
                    lst = lists.get(k)
                    if lst is None:
                        lst = lists[k] = list(wild)
                    lst.append(c)
            idx = self.by_pos[i] = (lists, wild)
        return idx

    def candidates(self, args):
        cl = self.clauses
        if len(cl) < 4:
            return cl
        best = cl
        for i, a in enumerate(args):
            k = _arg_key(a)
            if k is None:
                continue
            lists, wild = self.position(i)
            cand = lists.get(k, wild)
            if len(cand) < len(best):
                best = cand
                if len(best) <= 1:
                    break
        return best


# -- the machine ---------------------------------------------------------------------

_FAIL = object()


class _Choice:
    __slots__ = ("args", "cands", "i", "mark", "rest", "depth")

    def __init__(self, args, cands, mark, rest, depth):
        self.args = args
        self.cands = cands
        self.i = 0
        self.mark = mark
        self.rest = rest
        self.depth = depth


class TopDownEngine:
    def __init__(self, program: Program, limits: EngineLimits = EngineLimits(), occurs_check=False):
        self.limits = limits
        self.occurs_check = occurs_check
        preds = {}
        for c in program.clauses:
            preds.setdefault(c.head, []).append(compile_clause(c))
        self.index = {p: _PredIndex(cs) for p, cs in preds.items()}
        self.steps = 0

    # unification
    def bind(self, v, t, trail):
        if self.occurs_check and _occurs(v, t):
            return False
        v.ref = t
        trail.append(v)
        return True

    def unify(self, a, b, trail):
        a = deref(a)
        b = deref(b)
        if a is b:
            return True
        ta, tb = type(a), type(b)
        if ta is RVar:
            return self.bind(a, b, trail)
        if tb is RVar:
            return self.bind(b, a, trail)
        if ta is str or tb is str:
            return a == b
        if ta is tuple and tb is tuple:
            if len(a) != len(b) or a[0] != b[0]:
                return False
            for x, y in zip(a[1:], b[1:]):
                if not self.unify(x, y, trail):
                    return False
            return True
        if ta is PClo and tb is PClo:
            if len(a.args) != len(b.args) or not self.unify(a.name, b.name, trail):
                return False
            return all(self.unify(x, y, trail) for x, y in zip(a.args, b.args))
        return False

    def build(self, t, frame):
        tt = type(t)
        if tt is int:
            v = frame[t]
            if v is None:
                v = frame[t] = RVar()
            return v
        if tt is TFun:
            return (t.f,) + tuple(self.build(a, frame) for a in t.args)
        if tt is TClo:
            head = deref(self.build(t.head, frame))
            args = tuple(self.build(a, frame) for a in t.args)
            if type(head) is PClo:
                return PClo(head.name, head.args + args)
            return PClo(head, args)
        return t

    def unify_head(self, t, x, frame, trail):
        tt = type(t)
        if tt is int:
            v = frame[t]
            if v is None:
                frame[t] = x
                return True
            return self.unify(v, x, trail)
        if tt is str:
            x = deref(x)
            if type(x) is RVar:
                return self.bind(x, t, trail)
            return x == t
        if tt is TFun:
            x = deref(x)
            if type(x) is RVar:
                return self.bind(x, self.build(t, frame), trail)
            if type(x) is not tuple or x[0] != t.f or len(x) != len(t.args) + 1:
                return False
            for a, b in zip(t.args, x[1:]):
                if not self.unify_head(a, b, frame, trail):
                    return False
            return True
        if tt is TClo:
            return self.unify(self.build(t, frame), x, trail)
        return self.unify(t, x, trail)

    def resolve_call(self, head, args, frame):
        args = tuple(self.build(a, frame) for a in args)
        if type(head) is str:
            return head, args
        h = deref(self.build(head, frame))
        extra = ()
        while True:
            if type(h) is RVar:
                raise UnboundPredicateCall("call through an unbound predicate variable")
            if type(h) is not PClo:
                raise UnboundPredicateCall(f"call through a non-predicate value {term_str(h)}")
            extra = h.args + extra
            name = deref(h.name)
            if type(name) is str:
                return name, extra + args
            h = name

    def undo(self, trail, mark):
        while len(trail) > mark:
            trail.pop().ref = None

    def search(self, cont):
        """Yield once per solution of the continuation ``cont``."""
        trail, choices = [], []
        try:
            yield from self._search(cont, trail, choices)
        finally:
            self.undo(trail, 0)

    def _search(self, cont, trail, choices):
        max_steps, max_depth = self.limits.max_steps, self.limits.max_depth
        index = self.index
        while True:
            if cont is _FAIL:
                return
            if cont is None:
                yield True
                cont = self.backtrack(choices, trail)
                continue
            lit, frame, depth, rest = cont
            self.steps += 1
            if self.steps > max_steps:
                raise ResourceExhausted(f"step limit {max_steps} reached")
            kind = lit[0]
            if kind == EQ:
                if self.unify(self.build(lit[1], frame), self.build(lit[2], frame), trail):
                    cont = rest
                else:
                    cont = self.backtrack(choices, trail)
                continue
            pred, args = self.resolve_call(lit[1], lit[2], frame)
            if kind == NEG:
                if not all(is_ground_term(a) for a in args):
                    raise Floundering(f"negative literal \\+ {pred}({','.join(map(term_str, args))}) is not ground")
                if self.exists(pred, args, depth + 1):
                    cont = self.backtrack(choices, trail)
                else:
                    cont = rest
                continue
            if depth >= max_depth:
                raise ResourceExhausted(f"depth limit {max_depth} reached")
            idx = index.get(pred)
            if idx is None:
                cont = self.backtrack(choices, trail)
                continue
            choices.append(_Choice(args, idx.candidates(args), len(trail), rest, depth + 1))
            cont = self.backtrack(choices, trail)

    def backtrack(self, choices, trail):
        while choices:
            cp = choices[-1]
            self.undo(trail, cp.mark)
            cands, n = cp.cands, len(cp.cands)
            while cp.i < n:
                c = cands[cp.i]
                cp.i += 1
                frame = [None] * c.nvars
                ok = True
                for h, a in zip(c.head, cp.args):
                    if not self.unify_head(h, a, frame, trail):
                        ok = False
                        break
                if ok:
                    if cp.i >= n:
                        choices.pop()
                    cont = cp.rest
                    for lit in reversed(c.body):
                        cont = (lit, frame, cp.depth, cont)
                    return cont
                self.undo(trail, cp.mark)
            choices.pop()
        return _FAIL

    def exists(self, pred, args, depth):
        lit = (CALL, pred, tuple(range(len(args))))
        frame = list(args)
        gen = self.search((lit, frame, depth, None))
        try:
            for _ in gen:
                return True
            return False
        finally:
            gen.close()

    def solve(self, goal: Goal) -> AnswerSet:
        comp = _Compiler()
        lits = [comp.literal(l) for l in goal.literals]
        gvars = goal.vars
        slots = [comp.slot(v) for v in gvars]
        frame = [None] * len(comp.slots)
        cont = None
        for lit in reversed(lits):
            cont = (lit, frame, 0, cont)
        for i in range(len(frame)):
            frame[i] = RVar()
        rows = set()
        ground = True
        for _ in self.search(cont):
            vals = [frame[s] for s in slots]
            ground = ground and all(is_ground_term(x) for x in vals)
            rows.add(tuple(term_str(x) for x in vals))
        return AnswerSet(tuple(v.name for v in gvars), frozenset(rows), self.steps, ground)


def solve_topdown(program: Program, goal: Goal, limits: EngineLimits = EngineLimits(),
                  occurs_check=False) -> AnswerSet:
    """All answers of ``goal``; ``AnswerSet.steps`` counts selected literals."""
    return TopDownEngine(program, limits, occurs_check).solve(goal)
