"""Fragment validation and the predicate dependency graph."""

from __future__ import annotations

from dataclasses import dataclass, field

from predspec.ast import App, Const, Pred, Var, subexprs


NON_VARIABLE_PRED_ARG = "NonVariableNonGroundPredArg"
FREE_BODY_PRED_VAR = "FreeBodyPredVar"
CYCLIC_PARTIAL_APP = "CyclicPartialApplication"


@dataclass(frozen=True)
class Violation:
    loc: str
    kind: str
    message: str
    # for partial-application violations: callee and clause head predicate
    callee: str | None = field(default=None, compare=False)
    owner: str | None = field(default=None, compare=False)

    def render(self):
        return f"{self.loc}: {self.kind}: {self.message}"


@dataclass(frozen=True)
class FragmentReport:
    violations: tuple = ()

    @property
    def admitted(self):
        return not self.violations

    def kinds(self):
        return [v.kind for v in self.violations]

    def render(self):
        return "\n".join(v.render() for v in self.violations)

    def __add__(self, other):
        return FragmentReport(self.violations + other.violations)


def _body_atoms(clause):
    for lit in clause.body:
        if isinstance(lit.atom, App):
            yield lit.atom


def check_h_fragment(program) -> FragmentReport:
    """Flag predicate-typed body arguments that are neither variables nor constants."""
    out = []
    for c in program.clauses:
        for atom in _body_atoms(c):
            callee = atom.head.name if isinstance(atom.head, Const) else None
            for i, a in enumerate(atom.args, 1):
                if isinstance(a.type, Pred) and not isinstance(a, (Var, Const)):
                    out.append(Violation(
                        c.loc or "<program>", NON_VARIABLE_PRED_ARG,
                        f"argument {i} of {atom} is {a}, which is neither a variable nor a predicate name",
                        callee, c.head))
    return FragmentReport(tuple(out))


def check_definitional(program) -> FragmentReport:
    """Flag body predicate variables that are not formal parameters of their clause."""
    out = []
    for c in program.clauses:
        params = set(c.args)
        seen = set()
        for lit in c.body:
            for x in subexprs(lit.atom):
                if isinstance(x, Var) and x.is_pred and x not in params and x not in seen:
                    seen.add(x)
                    out.append(Violation(
                        c.loc or "<program>", FREE_BODY_PRED_VAR,
                        f"predicate variable {x.name} in the body of {c.head} is not a head parameter"))
    return FragmentReport(tuple(out))


def tarjan_scc(nodes, succ):
    """Strongly connected components, iteratively; returns a list of node lists.

    Components come out in reverse topological order (callees before callers).
    """
    index, low, on_stack = {}, {}, set()
    stack, comps = [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(comp)
    return comps


@dataclass
class DepGraph:
    nodes: list
    edges: set
    scc_id: dict
    negative_edges: set = field(default_factory=set)

    def successors(self, p):
        return sorted(q for (a, q) in self.edges if a == p)

    def is_cyclic(self, p) -> bool:
        """True if ``p`` lies on a cycle: its component has >1 node or a self-loop."""
        cid = self.scc_id[p]
        members = [n for n in self.nodes if self.scc_id[n] == cid]
        return len(members) > 1 or (p, p) in self.edges

    def same_cycle(self, p, q) -> bool:
        return p in self.scc_id and q in self.scc_id and self.scc_id[p] == self.scc_id[q] and self.is_cyclic(p)

    def components(self):
        out = {}
        for n in self.nodes:
            out.setdefault(self.scc_id[n], []).append(n)
        return [out[k] for k in sorted(out)]


def build_dependency_graph(program) -> DepGraph:
    """Edge p -> q whenever a clause for p mentions predicate constant q in its body."""
    nodes, edges, neg_edges = {}, set(), set()
    for c in program.clauses:
        nodes.setdefault(c.head, None)
        for lit in c.body:
            for x in subexprs(lit.atom):
                if isinstance(x, Const) and x.is_pred:
                    nodes.setdefault(x.name, None)
                    edges.add((c.head, x.name))
                    if not lit.positive:
                        neg_edges.add((c.head, x.name))
    order = list(nodes)
    first = {n: i for i, n in enumerate(order)}
    succ = {}
    for a, b in sorted(edges, key=lambda e: (first[e[0]], first[e[1]])):
        succ.setdefault(a, []).append(b)
    comps = tarjan_scc(order, succ)
    comps.sort(key=lambda comp: min(first[n] for n in comp))
    scc_id = {n: i for i, comp in enumerate(comps) for n in comp}
    return DepGraph(order, edges, scc_id, neg_edges)


def check_extended_fragment(program, graph=None, h_report=None) -> FragmentReport:
    """Waive partial applications passed to predicates outside the caller's cycle.

    A violation in a clause for q at a call of p survives (as a
    CyclicPartialApplication) when p and q share a cyclic component.  Calls
    through a predicate variable cannot be checked and keep their original kind.
    """
    graph = graph or build_dependency_graph(program)
    h_report = h_report if h_report is not None else check_h_fragment(program)
    out = []
    for v in h_report.violations:
        if v.kind != NON_VARIABLE_PRED_ARG:
            out.append(v)
        elif v.callee is None:
            out.append(Violation(v.loc, v.kind, v.message + " (callee is a predicate variable)",
                                 v.callee, v.owner))
        elif graph.same_cycle(v.callee, v.owner):
            out.append(Violation(v.loc, CYCLIC_PARTIAL_APP,
                                 f"{v.message}; {v.callee} and {v.owner} are in the same cycle",
                                 v.callee, v.owner))
    return FragmentReport(tuple(out))


def check_program(program) -> FragmentReport:
    """Everything ``firstify`` requires: definitional and extended-fragment checks."""
    graph = build_dependency_graph(program)
    return check_definitional(program) + check_extended_fragment(program, graph)
