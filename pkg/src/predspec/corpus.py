"""Benchmark program families, deterministic fact generators and the bench driver.

Rule sets for the fixed families live in ``predspec/programs/*.hl``; the
k-ary conjunction and union programs are generated for any k.  Facts are a
pure function of (family, n, seed).
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from importlib import resources
from random import Random
from typing import Optional

from predspec.analysis import check_program
from predspec.emitter import defunctionalize_reynolds
from predspec.errors import UnknownFamily
from predspec.interp.topdown import EngineLimits, solve_topdown
from predspec.parser import load_program, parse_query
from predspec.specializer import firstify

FAMILIES = ("closure", "conj", "genconj", "union", "genunion", "path_naive", "path_dag",
            "winnow", "w", "wt")
MODES = ("original", "specialized", "reynolds")
CSV_HEADER = "family,n,mode,clauses,steps,transform_ms"

_FAMILY_RE = re.compile(r"(closure|genconj|genunion|conj|union|path_naive|path_dag|winnow|wt|w)(?:\(?(\d+)\)?)?\Z")
_NEEDS_K = {"conj", "genconj", "union", "genunion", "w", "wt"}


@dataclass(frozen=True)
class BenchSpec:
    """``family`` is a family name with its k where needed: conj5, genconj10, w2, ..."""
    family: str
    n: int = 10
    seed: int = 0

    def __post_init__(self):
        m = _FAMILY_RE.match(self.family)
        if not m or (m.group(1) in _NEEDS_K) != (m.group(2) is not None):
            raise UnknownFamily(f"unknown benchmark family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def base(self) -> str:
        return _FAMILY_RE.match(self.family).group(1)

    @property
    def k(self) -> Optional[int]:
        g = _FAMILY_RE.match(self.family).group(2)
        return int(g) if g is not None else None


def rules_text(name: str) -> str:
    return resources.files("predspec.programs").joinpath(f"{name}.hl").read_text(encoding="utf-8")


def conj_rules(k: int) -> str:
    """k-ary conjunction written as nested partial applications of conj2."""
    if k < 2:
        raise ValueError("k must be at least 2")
    ps = [f"P{i}" for i in range(1, k + 1)]
    nested = ps[-1]
    for p in reversed(ps[:-1]):
        nested = f"conj2({p},{nested})"
    # the outermost conj2 takes X directly
    call = nested[:-1] + ",X)"
    sig = ", ".join(["pred(i)"] * k)
    rels = ",".join(f"r{i}" for i in range(1, k + 1))
    return (f"% conjunction of {k} unary relations\n"
            f":- hotype(conj2, pred(pred(i), pred(i), i)).\n"
            f":- hotype(conj{k}, pred({sig}, i)).\n"
            f"conj2(P,Q,X) :- P(X), Q(X).\n"
            f"conj{k}({','.join(ps)},X) :- {call}.\n"
            f"query(X) :- conj{k}({rels},X).\n")


def union_rules(k: int) -> str:
    """k-ary union written as nested partial applications of union2."""
    text = conj_rules(k)
    text = text.replace("conjunction", "union").replace("conj", "union")
    return text.replace("union2(P,Q,X) :- P(X), Q(X).", "union2(P,Q,X) :- P(X).\nunion2(P,Q,X) :- Q(X).")


# -- facts ---------------------------------------------------------------------------

def _facts(pred, rows):
    return [f"{pred}({','.join(r)})." for r in rows]


def _sets(rng, n, k, shared):
    """k subsets of size n of a 2n-element universe.

    With ``shared`` the first n//4 elements (at least one) are in every set,
    otherwise each set gets an element of its own.
    """
    universe = [f"e{i}" for i in range(2 * n)]
    out = []
    for j in range(k):
        fixed = universe[:max(1, n // 4)] if shared else [f"u{j + 1}"]
        pool = [e for e in universe if e not in fixed]
        out.append(sorted(set(fixed) | set(rng.sample(pool, n - len(fixed))), key=_natural))
    return out


def _natural(s):
    m = re.match(r"([a-z]+)(\d+)", s)
    return (m.group(1), int(m.group(2))) if m else (s, 0)


def _chain(prefix, k):
    names = [f"{prefix}{i}" for i in range(1, k + 1)]
    return names, [(a, b) for a, b in zip(names, names[1:])]


def _movies(rng, n):
    movies = [f"m{i}" for i in range(1, n + 1)]
    rating = {m: rng.randint(1, 4) for m in movies}
    year = {m: rng.randint(1990, 1999) for m in movies}
    if n > 1 and len(set(rating.values())) == 1:
        rating[movies[0]] += 1
    if n > 2:
        # at least one tie broken by year
        rating[movies[1]] = rating[movies[2]]
        if year[movies[1]] == year[movies[2]]:
            year[movies[1]] = year[movies[2]] - 1 if year[movies[2]] > 1990 else year[movies[2]] + 1
    return movies, rating, year


def _facts_for(spec: BenchSpec, rng: Random):
    n, k, base = spec.n, spec.k, spec.base
    if base == "closure":
        return _facts("edge", [(f"n{i}", f"n{i + 1}") for i in range(n)])
    if base in ("conj", "union"):
        out = []
        for j, s in enumerate(_sets(rng, n, k, base == "conj"), 1):
            out += _facts(f"r{j}", [(e,) for e in s])
        return out
    if base in ("genconj", "genunion"):
        idx, nxt = _chain("k", k)
        out = _facts("first", [(idx[0],)]) + _facts("next", nxt) + _facts("last", [(idx[-1],)])
        for name, s in zip(idx, _sets(rng, n, k, base == "genconj")):
            out += _facts("rel", [(name, e) for e in s])
        return out
    if base == "winnow":
        movies, rating, _ = _movies(rng, n)
        out = _facts("movie", [(m,) for m in movies])
        return out + _facts("pref", [(a, b) for a in movies for b in movies if rating[a] > rating[b]])
    if base in ("w", "wt"):
        movies, rating, year = _movies(rng, n)
        lv, nxt = _chain("v", k)
        out = _facts("first", [(lv[0],)]) + _facts("next", nxt) + _facts("top", [(lv[-1],)])
        out += _facts("movie", [(m,) for m in movies])
        out += _facts("byrating", [(a, b) for a in movies for b in movies if rating[a] > rating[b]])
        out += _facts("byyear", [(a, b) for a in movies for b in movies if year[a] > year[b]])
        if base == "w":
            out += _facts("tie", [(a, b) for a in movies for b in movies
                                  if a != b and rating[a] == rating[b]])
        else:
            out += _facts("rating", [(m, f"r{rating[m]}") for m in movies])
        return out
    if base == "path_dag":
        return _dag_facts(rng, n)
    if base == "path_naive":
        nodes = [f"v{i}" for i in range(n)]
        edges = [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]
        return _facts("edge", edges) + _succ_facts(n)
    raise UnknownFamily(spec.family)


def _succ_facts(n):
    return _facts("succ", [(f"l{i}", f"l{i + 1}") for i in range(n + 1)])


def _dag_facts(rng, n):
    """Layers of two nodes; every node reaches the next layer, some edges skip ahead."""
    nodes = [f"v{i}" for i in range(max(n, 4))]
    layers = [nodes[i:i + 2] for i in range(0, len(nodes), 2)]
    edges = set()
    for li in range(len(layers) - 1):
        for a in layers[li]:
            targets = [b for b in layers[li + 1] if rng.random() < 0.7] or [rng.choice(layers[li + 1])]
            edges.update((a, b) for b in targets)
            if li + 3 < len(layers) and rng.random() < 0.3:
                edges.add((a, rng.choice(layers[li + 3])))
    # a direct edge next to a three-step route: lengths 1 and 3 with no 2
    edges.add((layers[0][0], layers[3][0] if len(layers) > 3 else layers[-1][0]))
    order = {v: i for i, v in enumerate(nodes)}
    return _facts("edge", sorted(edges, key=lambda e: (order[e[0]], order[e[1]]))) + _succ_facts(len(layers))


_QUERIES = {
    "closure": "reach(X,Y)",
    "path_dag": "shortest(edge,X,Y,N)",
    "path_naive": "shortest(edge,X,Y,N)",
}


def rules_for(spec: BenchSpec) -> str:
    base = spec.base
    if base == "conj":
        return conj_rules(spec.k)
    if base == "union":
        return union_rules(spec.k)
    if base in ("path_dag", "path_naive"):
        return rules_text("path")
    return rules_text(base)


def generate_text(spec: BenchSpec):
    """Source text (rules then facts) and the query string for ``spec``."""
    rng = Random(f"{spec.family}/{spec.n}/{spec.seed}")
    facts = _facts_for(spec, rng)
    text = rules_for(spec).rstrip("\n") + "\n" + "\n".join(facts) + "\n"
    return text, _QUERIES.get(spec.base, "query(T)" if spec.base in ("winnow", "w", "wt") else "query(X)")


def generate(spec: BenchSpec):
    """The higher-order program of ``spec`` with its facts, and its closed goal."""
    text, query = generate_text(spec)
    program = load_program(text, filename=f"{spec.family}.hl")
    return program, parse_query(query, program)


# -- bench -------------------------------------------------------------------------

@dataclass(frozen=True)
class BenchMetrics:
    family: str
    n: int
    mode: str
    clauses: int
    steps: int
    transform_ms: float
    answers: int

    def row(self, with_time=True) -> str:
        t = f"{self.transform_ms:.3f}" if with_time else ""
        return f"{self.family},{self.n},{self.mode},{self.clauses},{self.steps},{t}"


def transform(program, goal, mode):
    if mode == "original":
        return program, goal
    if mode == "specialized":
        out = firstify(program, goal)
        return out.program, out.renamed_goal
    if mode == "reynolds":
        return defunctionalize_reynolds(program, goal)
    raise ValueError(f"unknown mode {mode!r}")


def run_bench(spec: BenchSpec, mode: str, limits: EngineLimits = EngineLimits(max_steps=20_000_000)) -> BenchMetrics:
    """Transform, then run the goal under the metered top-down interpreter."""
    program, goal = generate(spec)
    t0 = time.perf_counter()
    p, g = transform(program, goal, mode)
    ms = (time.perf_counter() - t0) * 1000.0
    ans = solve_topdown(p, g, limits)
    return BenchMetrics(spec.family, spec.n, mode, p.rule_count(), ans.steps, ms, len(ans))


# -- random programs ---------------------------------------------------------------

_BASE = {"b1": 1, "b2": 2, "b3": 1}
_CONSTS = ("a", "b", "c")
_T1, _T2, _T3 = ("i",), ("i", "i"), (("i",), "i")


def _type_text(t):
    return "i" if t == "i" else "pred(" + ", ".join(_type_text(x) for x in t) + ")"


class _RandomProgram:
    def __init__(self, rng: Random):
        self.rng = rng
        m = rng.randint(1, 4)
        self.sigs = {}
        for j in range(1, m + 1):
            preds = [rng.choice((_T1, _T1, _T2, _T3)) for _ in range(rng.randint(1, 2))]
            inds = ["i"] * rng.randint(1, 2)
            self.sigs[f"h{j}"] = tuple(preds + inds)

    def consts_of(self, t):
        out = [b for b, k in _BASE.items() if t == ("i",) * k]
        out += [h for h, s in self.sigs.items() if s == t]
        return out

    def pred_expr(self, t, env, depth):
        """An expression of predicate type ``t``: a parameter, a constant or a partial application."""
        rng = self.rng
        options = [v for v, vt in env.items() if vt == t] + self.consts_of(t)
        partial = [h for h, s in self.sigs.items()
                   if len(s) > len(t) and s[len(s) - len(t):] == t and s[0] != "i"]
        if depth > 0 and partial and (not options or rng.random() < 0.3):
            h = rng.choice(partial)
            s = self.sigs[h]
            args = [self.arg(x, env, depth - 1) for x in s[:len(s) - len(t)]]
            if all(a is not None for a in args):
                return f"{h}({','.join(args)})"
        return rng.choice(options) if options else None

    def arg(self, t, env, depth):
        if t == "i":
            inds = [v for v, vt in env.items() if vt == "i"]
            return self.rng.choice(inds + list(_CONSTS[:1]))
        return self.pred_expr(t, env, depth)

    def literal(self, env):
        rng = self.rng
        r = rng.random()
        if r < 0.25:
            b = rng.choice(list(_BASE))
            args = [self.arg("i", env, 0) for _ in range(_BASE[b])]
            neg = "not " if rng.random() < 0.2 else ""
            return f"{neg}{b}({','.join(args)})"
        if r < 0.6:
            pvars = [v for v, vt in env.items() if vt != "i"]
            if pvars:
                v = rng.choice(pvars)
                args = [self.arg(x, env, 1) for x in env[v]]
                if all(a is not None for a in args):
                    return f"{v}({','.join(args)})"
        h = rng.choice(list(self.sigs))
        args = [self.arg(x, env, 1) for x in self.sigs[h]]
        if any(a is None for a in args):
            return None
        return f"{h}({','.join(args)})"

    def text(self):
        rng = self.rng
        lines = [f":- hotype({h}, {_type_text(s)})." for h, s in self.sigs.items()]
        for h, s in self.sigs.items():
            names = {}
            for i, t in enumerate(s, 1):
                names[f"P{i}" if t != "i" else f"X{i}"] = t
            extra = {"Y": "i"}
            for _ in range(rng.randint(1, 3)):
                env = dict(names, **extra)
                body = [l for l in (self.literal(env) for _ in range(rng.randint(1, 3))) if l]
                guards = [f"{rng.choice(('b1', 'b3'))}({v})" for v, t in names.items() if t == "i"]
                lits = guards + body + ["b3(Y)"]
                lines.append(f"{h}({','.join(names)}) :- {', '.join(lits)}.")
        for b, k in _BASE.items():
            for _ in range(3):
                lines.append(f"{b}({','.join(rng.choice(_CONSTS) for _ in range(k))}).")
        h = rng.choice(list(self.sigs))
        args = []
        for j, t in enumerate(self.sigs[h]):
            args.append(f"Q{j}" if t == "i" else self.pred_expr(t, {}, 1))
        if any(a is None for a in args):
            return None, None
        return "\n".join(lines) + "\n", f"{h}({','.join(args)})"


def random_program(seed: int, attempts=100):
    """A definitional extended-fragment program with a closed goal, from ``seed``."""
    rng = Random(seed)
    for _ in range(attempts):
        gen = _RandomProgram(rng)
        text, query = gen.text()
        if query is None:
            continue
        program = load_program(text, filename=f"random{seed}.hl")
        if check_program(program).admitted:
            return program, parse_query(query, program)
    raise RuntimeError(f"no admissible program after {attempts} attempts (seed {seed})")
