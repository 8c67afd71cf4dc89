"""Typed term language: types, expressions, clauses, programs and substitutions.

Everything here is immutable.  Applications are kept in spine-normal form:
the head of an :class:`App` is never itself an :class:`App`, so the curried
``(p E1)(E2)`` and ``p(E1, E2)`` are the same value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Union

from predspec.errors import NotAnAtom, TypeCheckError, TypeMismatch


# -- types -------------------------------------------------------------------

@dataclass(frozen=True)
class Individual:
    def __str__(self):
        return "i"


@dataclass(frozen=True)
class Boolean:
    def __str__(self):
        return "o"


@dataclass(frozen=True)
class Func:
    """Type of an ``arity``-ary function symbol, i -> ... -> i."""
    arity: int

    def __str__(self):
        return f"fun({self.arity})"


@dataclass(frozen=True)
class Pred:
    """``params[0] -> ... -> params[-1] -> o``."""
    params: tuple

    def __init__(self, params=()):
        object.__setattr__(self, "params", tuple(params))

    @property
    def arity(self):
        return len(self.params)

    def __str__(self):
        return "pred(" + ",".join(map(str, self.params)) + ")"


TypeExpr = Union[Individual, Boolean, Func, Pred]

IND = Individual()
BOOL = Boolean()


def classify_type(t) -> str:
    """Return ``'argument'``, ``'predicate'``, ``'functional'`` or ``'ill-formed'``.

    ``i`` is reported as an argument type; a ``Pred`` (which is also a legal
    argument type) is reported as a predicate type.
    """
    if isinstance(t, Individual):
        return "argument"
    if isinstance(t, Boolean):
        return "predicate"
    if isinstance(t, Func):
        return "functional" if isinstance(t.arity, int) and t.arity >= 1 else "ill-formed"
    if isinstance(t, Pred):
        for p in t.params:
            if isinstance(p, Individual):
                continue
            if isinstance(p, Pred) and classify_type(p) == "predicate":
                continue
            return "ill-formed"
        return "predicate"
    return "ill-formed"


def is_pred_type(t) -> bool:
    return isinstance(t, Pred)


# -- expressions ---------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    type: TypeExpr = IND

    @property
    def is_pred(self):
        return isinstance(self.type, Pred)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    """Individual constant (type ``i``) or predicate constant (a ``Pred`` type)."""
    name: str
    type: TypeExpr = IND

    @property
    def is_pred(self):
        return isinstance(self.type, Pred)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class FunApp:
    functor: str
    args: tuple

    @property
    def type(self):
        return IND

    def __str__(self):
        return f"{self.functor}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class App:
    head: object
    args: tuple
    type: TypeExpr

    def __post_init__(self):
        assert not isinstance(self.head, App), "App head must not be an App"

    @property
    def is_atom(self):
        return self.type == BOOL

    @property
    def pred_name(self) -> Optional[str]:
        return self.head.name if isinstance(self.head, Const) else None

    def __str__(self):
        if not self.args:
            return str(self.head)
        return f"{self.head}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Eq:
    lhs: object
    rhs: object

    @property
    def type(self):
        return BOOL

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


Expr = Union[Var, Const, FunApp, App, Eq]


def app(head, args) -> App:
    """Build an application, flattening nested heads and computing its type."""
    args = tuple(args)
    if isinstance(head, App):
        args = head.args + args
        head = head.head
    t = head.type
    if not isinstance(t, Pred):
        raise TypeCheckError(f"{head} of type {t} cannot be applied")
    if len(args) > t.arity:
        raise TypeCheckError(f"{head} takes {t.arity} arguments, got {len(args)}")
    for a, pt in zip(args, t.params):
        if a.type != pt:
            raise TypeCheckError(f"argument {a} of {head} has type {a.type}, expected {pt}")
    rest = t.params[len(args):]
    return App(head, args, BOOL if not rest else Pred(rest))


def eq(lhs, rhs) -> Eq:
    if lhs.type != IND or rhs.type != IND:
        raise TypeCheckError(f"equality only compares individuals: {lhs} = {rhs}")
    return Eq(lhs, rhs)


def is_atom(e) -> bool:
    """Full application or equality: something that can stand as a literal."""
    return isinstance(e, Eq) or (isinstance(e, App) and e.type == BOOL)


def subexprs(e) -> Iterator:
    """Pre-order walk over ``e`` and everything below it."""
    stack = [e]
    while stack:
        x = stack.pop()
        yield x
        if isinstance(x, App):
            stack.extend(reversed(x.args))
            stack.append(x.head)
        elif isinstance(x, FunApp):
            stack.extend(reversed(x.args))
        elif isinstance(x, Eq):
            stack.append(x.rhs)
            stack.append(x.lhs)


def vars_of(e) -> tuple:
    """Variables of ``e`` in left-to-right, depth-first first-occurrence order."""
    seen = {}
    for x in subexprs(e):
        if isinstance(x, Var) and x not in seen:
            seen[x] = None
    return tuple(seen)


def is_ground(e) -> bool:
    return not any(isinstance(x, Var) for x in subexprs(e))


# -- clauses and programs --------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    positive: bool
    atom: object

    def __post_init__(self):
        assert is_atom(self.atom), f"not an atom: {self.atom}"

    def __str__(self):
        return str(self.atom) if self.positive else f"\\+ {self.atom}"


def pos(atom) -> Literal:
    return Literal(True, atom)


def neg(atom) -> Literal:
    return Literal(False, atom)


@dataclass(frozen=True)
class Clause:
    """``head(args) :- body``.

    Source clauses always have pairwise distinct variables as ``args``; the
    intermediate program built during specialization may carry arbitrary
    expressions in head positions.
    """
    head: str
    args: tuple
    body: tuple = ()
    loc: Optional[str] = field(default=None, compare=False)

    @property
    def params(self) -> tuple:
        if not all(isinstance(a, Var) for a in self.args):
            raise ValueError(f"clause head {self.head_atom()} has non-variable arguments")
        return self.args

    @property
    def has_distinct_params(self) -> bool:
        return all(isinstance(a, Var) for a in self.args) and len(set(self.args)) == len(self.args)

    def head_atom(self, signatures=None) -> App:
        if signatures is not None:
            t = signatures[self.head]
        else:
            t = Pred(tuple(a.type for a in self.args))
        return App(Const(self.head, t), self.args, BOOL)

    def __str__(self):
        h = self.head if not self.args else f"{self.head}({','.join(map(str, self.args))})"
        if not self.body:
            return h + "."
        return h + " :- " + ", ".join(map(str, self.body)) + "."


@dataclass(frozen=True)
class Goal:
    literals: tuple

    @property
    def vars(self) -> tuple:
        seen = {}
        for lit in self.literals:
            for v in vars_of(lit.atom):
                seen.setdefault(v, None)
        return tuple(seen)

    def atoms(self):
        return [lit.atom for lit in self.literals if not isinstance(lit.atom, Eq)]

    def __str__(self):
        return ", ".join(map(str, self.literals))


@dataclass(frozen=True)
class Program:
    clauses: tuple
    signatures: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        object.__setattr__(self, "signatures", dict(self.signatures))

    @cached_property
    def by_pred(self) -> dict:
        out = {}
        for c in self.clauses:
            out.setdefault(c.head, []).append(c)
        return out

    def clauses_for(self, name) -> list:
        return self.by_pred.get(name, [])

    def predicates(self) -> list:
        return [n for n, t in self.signatures.items() if isinstance(t, Pred)]

    def rule_count(self) -> int:
        """Number of non-fact clauses."""
        return sum(1 for c in self.clauses if not is_fact(c))

    def fact_count(self) -> int:
        return sum(1 for c in self.clauses if is_fact(c))

    def __str__(self):
        return "\n".join(map(str, self.clauses))


# -- substitutions ---------------------------------------------------------------

class Substitution(Mapping):
    """Type-preserving finite map from variables to expressions."""

    def __init__(self, bindings=(), check=True):
        self._b = dict(bindings)
        if check:
            for v, e in self._b.items():
                if not isinstance(v, Var):
                    raise TypeMismatch(f"{v} is not a variable")
                if v.type != e.type:
                    raise TypeMismatch(f"{v}:{v.type} cannot be bound to {e}:{e.type}")

    def __getitem__(self, v):
        return self._b[v]

    def __iter__(self):
        return iter(self._b)

    def __len__(self):
        return len(self._b)

    def __repr__(self):
        return "{" + ", ".join(f"{v}/{e}" for v, e in self._b.items()) + "}"


EMPTY = Substitution()


def _subst(e, b):
    if isinstance(e, Var):
        return b.get(e, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, FunApp):
        return FunApp(e.functor, tuple(_subst(a, b) for a in e.args))
    if isinstance(e, App):
        head = _subst(e.head, b)
        args = tuple(_subst(a, b) for a in e.args)
        if isinstance(head, App):
            return App(head.head, head.args + args, e.type)
        return App(head, args, e.type)
    if isinstance(e, Eq):
        return Eq(_subst(e.lhs, b), _subst(e.rhs, b))
    raise TypeError(f"not an expression: {e!r}")


def apply_subst(obj, theta):
    """Apply ``theta`` to an expression, literal, goal, clause or literal sequence.

    Substituting a partial application for an applied predicate variable
    re-flattens the spine, so ``Q(X)`` with ``Q/conj2(A,B)`` gives
    ``conj2(A,B,X)``.
    """
    if not isinstance(theta, Substitution):
        theta = Substitution(theta)
    if not theta:
        return obj
    b = theta._b
    if isinstance(obj, Literal):
        return Literal(obj.positive, _subst(obj.atom, b))
    if isinstance(obj, Clause):
        return Clause(obj.head, tuple(_subst(a, b) for a in obj.args),
                      tuple(Literal(l.positive, _subst(l.atom, b)) for l in obj.body), obj.loc)
    if isinstance(obj, Goal):
        return Goal(tuple(Literal(l.positive, _subst(l.atom, b)) for l in obj.literals))
    if isinstance(obj, (tuple, list)):
        return type(obj)(apply_subst(x, theta) for x in obj)
    return _subst(obj, b)


def rename(obj, mapping: Mapping):
    """Variable-to-variable renaming; types are carried over from the originals."""
    return apply_subst(obj, Substitution(mapping, check=False))


def match(pattern, term, binding=None) -> Optional[dict]:
    """One-way matching: find b with ``pattern b == term`` or return None."""
    b = {} if binding is None else binding
    stack = [(pattern, term)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            if p in b:
                if b[p] != t:
                    return None
            elif p.type != t.type:
                return None
            else:
                b[p] = t
        elif type(p) is not type(t):
            return None
        elif isinstance(p, Const):
            if p != t:
                return None
        elif isinstance(p, FunApp):
            if p.functor != t.functor or len(p.args) != len(t.args):
                return None
            stack.extend(zip(p.args, t.args))
        elif isinstance(p, App):
            if len(p.args) != len(t.args):
                return None
            stack.append((p.head, t.head))
            stack.extend(zip(p.args, t.args))
        elif isinstance(p, Eq):
            stack.append((p.lhs, t.lhs))
            stack.append((p.rhs, t.rhs))
    return b


def _walk(e, b):
    while isinstance(e, Var) and e in b:
        e = b[e]
    return e


def _occurs(v, e, b):
    e = _walk(e, b)
    if e == v:
        return True
    if isinstance(e, FunApp):
        return any(_occurs(v, a, b) for a in e.args)
    return False


def unify_terms(a, b_, b: dict) -> bool:
    """First-order unification of individual terms, extending ``b`` in place."""
    a, b_ = _walk(a, b), _walk(b_, b)
    if a == b_:
        return True
    if isinstance(a, Var):
        if _occurs(a, b_, b):
            return False
        b[a] = b_
        return True
    if isinstance(b_, Var):
        return unify_terms(b_, a, b)
    if isinstance(a, FunApp) and isinstance(b_, FunApp):
        if a.functor != b_.functor or len(a.args) != len(b_.args):
            return False
        return all(unify_terms(x, y, b) for x, y in zip(a.args, b_.args))
    return False


def resolve(e, b):
    """Apply a triangular binding produced by :func:`unify_terms` to ``e``."""
    if not b:
        return e
    out = {}
    for v in vars_of(e):
        t = _walk(v, b)
        if t != v:
            out[v] = resolve(t, b)
    return _subst(e, out) if out else e


def fold_head_equalities(clause: Clause):
    """Undo desugaring: absorb the leading equality literals into the head.

    Returns ``(head_args, remaining_body)``, or None when the leading
    equalities cannot be satisfied (the clause never applies).
    """
    b = {}
    k = 0
    for lit in clause.body:
        if not (lit.positive and isinstance(lit.atom, Eq)):
            break
        if not unify_terms(lit.atom.lhs, lit.atom.rhs, b):
            return None
        k += 1
    if not k:
        return clause.args, clause.body
    args = tuple(resolve(a, b) for a in clause.args)
    body = tuple(Literal(l.positive, resolve(l.atom, b)) for l in clause.body[k:])
    return args, body


def is_fact(clause: Clause) -> bool:
    """True for clauses whose body holds nothing but head equalities."""
    if not all(l.positive and isinstance(l.atom, Eq) for l in clause.body):
        return False
    return fold_head_equalities(clause) is not None


# -- canonical atoms -------------------------------------------------------------

@dataclass(frozen=True)
class CanonAtom:
    """An atom whose variables are renamed V1, V2, ... by first occurrence."""
    atom: App

    @property
    def pred(self) -> str:
        return self.atom.head.name

    @property
    def args(self) -> tuple:
        return self.atom.args

    @property
    def vars(self) -> tuple:
        return vars_of(self.atom)

    def __str__(self):
        return str(self.atom)


def canonicalize_atom(a) -> CanonAtom:
    if isinstance(a, CanonAtom):
        a = a.atom
    if not (isinstance(a, App) and a.type == BOOL and isinstance(a.head, Const)):
        raise NotAnAtom(f"{a} is not a full application with a constant head")
    mapping = {v: Var(f"V{i}", v.type) for i, v in enumerate(vars_of(a), 1)}
    return CanonAtom(rename(a, mapping))


def is_variant(a, b) -> bool:
    return canonicalize_atom(a) == canonicalize_atom(b)


def spine_normal(e) -> bool:
    """True if no application below ``e`` has an application as its head."""
    return not any(isinstance(x, App) and isinstance(x.head, App) for x in subexprs(e))


def clause_exprs(c: Clause) -> Iterable:
    yield from c.args
    for lit in c.body:
        yield lit.atom
