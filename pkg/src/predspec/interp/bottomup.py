"""Semi-naive, stratified bottom-up evaluation of function-free programs."""

from __future__ import annotations

from predspec.analysis import tarjan_scc
from predspec.ast import App, Const, Eq, FunApp, Goal, Program, Var, fold_head_equalities, subexprs
from predspec.errors import HasFunctions, NotStratified, TypeCheckError
from predspec.interp.topdown import AnswerSet


class Relation:
    """Set of tuples with hash indexes on bound-position masks, built on demand."""

    def __init__(self, arity):
        self.arity = arity
        self.tuples = set()
        self.indexes = {}

    def __len__(self):
        return len(self.tuples)

    def __contains__(self, t):
        return t in self.tuples

    def add(self, t) -> bool:
        if t in self.tuples:
            return False
        self.tuples.add(t)
        for positions, idx in self.indexes.items():
            idx.setdefault(tuple(t[i] for i in positions), []).append(t)
        return True

    def lookup(self, positions, key):
        if not positions:
            return self.tuples
        idx = self.indexes.get(positions)
        if idx is None:
            idx = {}
            for t in self.tuples:
                idx.setdefault(tuple(t[i] for i in positions), []).append(t)
            self.indexes[positions] = idx
        return idx.get(key, ())


class Model:
    """Perfect model of a stratified program: predicate name -> Relation."""

    def __init__(self, relations, steps=0, domain=()):
        self.relations = relations
        self.steps = steps
        self.domain = domain

    def facts(self, pred):
        r = self.relations.get(pred)
        return set(r.tuples) if r is not None else set()

    def atoms(self):
        out = set()
        for p, r in self.relations.items():
            for t in r.tuples:
                out.add(f"{p}({','.join(t)})" if t else p)
        return out

    def __len__(self):
        return sum(len(r) for r in self.relations.values())

    def query(self, goal: Goal) -> AnswerSet:
        return query_model(self, goal)


# -- rule compilation ---------------------------------------------------------------

def _check_first_order_function_free(program: Program):
    for c in program.clauses:
        for a in c.args:
            if not isinstance(a, (Var, Const)) and not isinstance(a, FunApp):
                raise TypeCheckError(f"{c.head}: non-individual head argument {a}")
        for e in list(c.args) + [l.atom for l in c.body]:
            for x in subexprs(e):
                if isinstance(x, FunApp):
                    raise HasFunctions(f"{c.head}: function term {x}")
                if isinstance(x, Var) and x.is_pred:
                    raise TypeCheckError(f"{c.head}: predicate variable {x.name} in a first-order program")
                if isinstance(x, App) and not isinstance(x.head, Const):
                    raise TypeCheckError(f"{c.head}: call through {x.head}")


class _Lit:
    """Compiled body literal.  ``terms`` hold variable slots (int) or constants (str)."""
    __slots__ = ("kind", "pred", "terms")

    def __init__(self, kind, pred, terms):
        self.kind = kind  # "pos", "neg" or "eq"
        self.pred = pred
        self.terms = terms


class _Rule:
    def __init__(self, head, head_terms, lits, nvars, src):
        self.head = head
        self.head_terms = head_terms
        self.lits = lits
        self.nvars = nvars
        self.src = src
        self.plans = {}


def _compile_rule(c):
    folded = fold_head_equalities(c)
    if folded is None:
        return None
    args, body = folded
    slots = {}

    def term(e):
        if isinstance(e, Var):
            return slots.setdefault(e, len(slots))
        return e.name

    head_terms = tuple(term(a) for a in args)
    lits = []
    for l in body:
        a = l.atom
        if isinstance(a, Eq):
            lits.append(_Lit("eq", None, (term(a.lhs), term(a.rhs))))
        else:
            lits.append(_Lit("pos" if l.positive else "neg", a.head.name, tuple(term(x) for x in a.args)))
    return _Rule(c.head, head_terms, tuple(lits), len(slots), c)


def _plan(lits, first=None, head=()):
    """Order literals so every join is bound as far as possible.

    Positive atoms go greedily by most bound arguments; equalities and
    negative literals go as soon as they can be decided.  ``first`` forces
    one literal (the delta literal of semi-naive evaluation) to the front.
    A variable nothing else binds (in a negative literal, an equality or the
    head) ranges over the active domain.  Returns the ordered literals.
    """
    bound = set()
    order = []
    rest = list(range(len(lits)))

    def take(i):
        order.append(lits[i])
        rest.remove(i)
        bind(lits[i].terms)

    def bind(terms):
        for t in terms:
            if isinstance(t, int):
                bound.add(t)

    if first is not None:
        take(first)
    while rest:
        ready = None
        for i in rest:
            l = lits[i]
            if l.kind == "neg" and all(not isinstance(t, int) or t in bound for t in l.terms):
                ready = i
                break
            if l.kind == "eq" and any(not isinstance(t, int) or t in bound for t in l.terms):
                ready = i
                break
        if ready is None:
            pos = [i for i in rest if lits[i].kind == "pos"]
            if not pos:
                v = next(t for i in rest for t in lits[i].terms if isinstance(t, int) and t not in bound)
                order.append(_Lit("dom", None, (v,)))
                bound.add(v)
                continue
            ready = max(pos, key=lambda i: sum(1 for t in lits[i].terms if not isinstance(t, int) or t in bound))
        take(ready)
    for t in head:
        if isinstance(t, int) and t not in bound:
            order.append(_Lit("dom", None, (t,)))
            bound.add(t)
    return tuple(order)


class _Evaluator:
    def __init__(self, relations, domain=()):
        self.relations = relations
        self.domain = tuple(domain)
        self.steps = 0

    def rel(self, pred, arity):
        r = self.relations.get(pred)
        if r is None:
            r = self.relations[pred] = Relation(arity)
        return r

    def run(self, order, env, emit, delta=None):
        """Enumerate bindings of the planned literals; ``delta`` replaces the first literal's relation."""
        self._join(order, 0, env, emit, delta)

    def _join(self, order, k, env, emit, delta):
        if k == len(order):
            emit(env)
            return
        l = order[k]
        if l.kind == "dom":
            x = l.terms[0]
            for c in self.domain:
                self.steps += 1
                env[x] = c
                self._join(order, k + 1, env, emit, delta)
            env[x] = None
            return
        if l.kind == "eq":
            a, b = l.terms
            va = env[a] if isinstance(a, int) else a
            vb = env[b] if isinstance(b, int) else b
            if va is None:
                env[a] = vb
                self._join(order, k + 1, env, emit, delta)
                env[a] = None
            elif vb is None:
                env[b] = va
                self._join(order, k + 1, env, emit, delta)
                env[b] = None
            elif va == vb:
                self._join(order, k + 1, env, emit, delta)
            return
        positions, key = [], []
        for i, t in enumerate(l.terms):
            v = env[t] if isinstance(t, int) else t
            if v is not None:
                positions.append(i)
                key.append(v)
        if l.kind == "neg":
            self.steps += 1
            if tuple(key) not in self.rel(l.pred, len(l.terms)):
                self._join(order, k + 1, env, emit, delta)
            return
        rel = delta if (k == 0 and delta is not None) else self.rel(l.pred, len(l.terms))
        for t in list(rel.lookup(tuple(positions), tuple(key))):
            self.steps += 1
            newly = []
            ok = True
            for i, x in enumerate(l.terms):
                if isinstance(x, int):
                    cur = env[x]
                    if cur is None:
                        env[x] = t[i]
                        newly.append(x)
                    elif cur != t[i]:
                        ok = False
                        break
            if ok:
                self._join(order, k + 1, env, emit, delta)
            for x in newly:
                env[x] = None


def active_domain(program: Program):
    """Individual constants of the program, sorted."""
    out = set()
    for c in program.clauses:
        for e in list(c.args) + [l.atom for l in c.body]:
            for x in subexprs(e):
                if isinstance(x, Const) and not x.is_pred:
                    out.add(x.name)
    return sorted(out)


def strata(program: Program):
    """Components of the predicate dependency graph, callees first.

    Raises NotStratified when a negative edge stays inside one component.
    """
    succ, neg, nodes = {}, set(), {}
    for c in program.clauses:
        nodes.setdefault(c.head, None)
        for l in c.body:
            if isinstance(l.atom, App):
                q = l.atom.head.name
                nodes.setdefault(q, None)
                succ.setdefault(c.head, []).append(q)
                if not l.positive:
                    neg.add((c.head, q))
    comps = tarjan_scc(list(nodes), succ)
    where = {n: i for i, comp in enumerate(comps) for n in comp}
    for p, q in sorted(neg):
        if where[p] == where[q]:
            raise NotStratified(f"{p} depends negatively on {q} within one recursive component")
    return comps


def eval_bottom_up(program: Program) -> Model:
    """Perfect model by semi-naive iteration, one dependency component at a time."""
    _check_first_order_function_free(program)
    comps = strata(program)
    rules = {}
    relations = {}
    for c in program.clauses:
        r = _compile_rule(c)
        if r is not None:
            rules.setdefault(c.head, []).append(r)
        relations.setdefault(c.head, Relation(len(c.args)))
    ev = _Evaluator(relations, active_domain(program))
    for comp in comps:
        members = set(comp)
        comp_rules = [r for p in comp for r in rules.get(p, ())]
        delta = {p: Relation(0) for p in comp}
        for r in comp_rules:
            target = ev.rel(r.head, len(r.head_terms))
            out = delta[r.head]
            order = r.plans.get(None)
            if order is None:
                order = r.plans[None] = _plan(r.lits, head=r.head_terms)
            _derive(ev, r, order, None, target, out)
        while any(len(d) for d in delta.values()):
            new = {p: Relation(0) for p in comp}
            for r in comp_rules:
                target = relations[r.head]
                for i, l in enumerate(r.lits):
                    if l.kind != "pos" or l.pred not in members or not len(delta[l.pred]):
                        continue
                    order = r.plans.get(i)
                    if order is None:
                        order = r.plans[i] = _plan(r.lits, first=i, head=r.head_terms)
                    _derive(ev, r, order, delta[l.pred], target, new[r.head])
            delta = new
    return Model(relations, ev.steps, ev.domain)


def _derive(ev, rule, order, delta, target, out):
    head_terms = rule.head_terms

    def emit(env):
        t = tuple(env[x] if isinstance(x, int) else x for x in head_terms)
        if target.add(t):
            out.add(t)

    ev.run(order, [None] * rule.nvars, emit, delta)


def query_model(model: Model, goal: Goal) -> AnswerSet:
    slots = {}

    def term(e):
        if isinstance(e, Var):
            return slots.setdefault(e, len(slots))
        if isinstance(e, FunApp):
            raise HasFunctions(f"function term {e} in the query")
        return e.name

    lits = []
    for l in goal.literals:
        a = l.atom
        if isinstance(a, Eq):
            lits.append(_Lit("eq", None, (term(a.lhs), term(a.rhs))))
        else:
            if not isinstance(a.head, Const):
                raise TypeCheckError(f"call through {a.head} in the query")
            lits.append(_Lit("pos" if l.positive else "neg", a.head.name, tuple(term(x) for x in a.args)))
    gvars = goal.vars
    domain = set(model.domain) | {t for l in lits for t in l.terms if not isinstance(t, int)}
    order = _plan(tuple(lits), head=tuple(slots[v] for v in gvars))
    ev = _Evaluator(model.relations, sorted(domain))
    rows = set()

    def emit(env):
        rows.add(tuple(env[slots[v]] for v in gvars))

    ev.run(order, [None] * len(slots), emit)
    return AnswerSet(tuple(v.name for v in gvars), frozenset(rows), model.steps + ev.steps)


def solve_bottom_up(program: Program, goal: Goal) -> AnswerSet:
    return query_model(eval_bottom_up(program), goal)
