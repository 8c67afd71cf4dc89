"""Prolog-like surface syntax with ``hotype`` directives.

The pipeline is ``parse_program`` (text -> surface clauses and directives),
``desugar_clause`` (arbitrary heads -> distinct head variables plus leading
equalities) and ``typecheck_program`` (surface -> typed :class:`Program`).
``load_program`` runs all three.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from predspec.ast import (
    BOOL, IND, App, Clause, Const, Eq, FunApp, Func, Goal, Literal, Pred, Program,
    Var, app, classify_type,
)
from predspec.errors import (
    HLSyntaxError, MissingSignature, PredicateEqualityUnsupported, TypeCheckError,
)


# -- surface syntax ---------------------------------------------------------------

@dataclass(frozen=True)
class SVar:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SName:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SApp:
    head: object
    args: tuple
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SLit:
    positive: bool
    term: object
    rhs: object = None  # set for equalities: ``term = rhs``

    @property
    def is_eq(self):
        return self.rhs is not None


@dataclass(frozen=True)
class SurfaceClause:
    head: object
    body: tuple
    line: int = 0
    col: int = 0
    filename: Optional[str] = None

    @property
    def loc(self):
        return f"{self.filename or '<input>'}:{self.line}"


@dataclass(frozen=True)
class SignatureDirective:
    pred: str
    type: Pred
    line: int = 0


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*|/\*.*?\*/)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<num>\d+)
  | (?P<punct>:-|\?-|\\\+|[(),.=])
""", re.VERBOSE | re.DOTALL)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text, filename=None):
    toks = []
    i, line, line_start = 0, 1, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise HLSyntaxError(f"unexpected character {text[i]!r}", line, i - line_start + 1, filename)
        kind = m.lastgroup
        s = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, s, line, i - line_start + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = i + s.rindex("\n") + 1
        i = m.end()
    toks.append(_Tok("eof", "", line, i - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text, filename=None):
        self.toks = _tokenize(text, filename)
        self.i = 0
        self.filename = filename
        self.anon = 0

    def peek(self, k=0):
        return self.toks[self.i + k]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return HLSyntaxError(msg, tok.line, tok.col, self.filename)

    def expect(self, text):
        t = self.next()
        if t.text != text or t.kind == "eof":
            raise self.error(f"expected {text!r}, found {t.text or 'end of input'!r}", t)
        return t

    def at(self, text):
        t = self.peek()
        return t.kind != "eof" and t.text == text

    # term := primary ('(' args ')')*
    def term(self):
        t = self.next()
        if t.kind == "var":
            name = t.text
            if name == "_":
                self.anon += 1
                name = f"_A{self.anon}"
            e = SVar(name, t.line, t.col)
        elif t.kind in ("name", "num"):
            e = SName(t.text, t.line, t.col)
        elif t.text == "(":
            e = self.term()
            self.expect(")")
        else:
            raise self.error(f"expected a term, found {t.text or 'end of input'!r}", t)
        while self.at("("):
            self.next()
            args = [self.term()]
            while self.at(","):
                self.next()
                args.append(self.term())
            self.expect(")")
            if isinstance(e, SApp):
                e = SApp(e.head, e.args + tuple(args), e.line, e.col)
            else:
                e = SApp(e, tuple(args), t.line, t.col)
        return e

    def literal(self):
        t = self.peek()
        if t.text == "\\+" or (t.kind == "name" and t.text == "not"
                              and self.peek(1).text not in (",", ".", ")", "=")):
            self.next()
            return SLit(False, self.term())
        lhs = self.term()
        if self.at("="):
            self.next()
            return SLit(True, lhs, self.term())
        return SLit(True, lhs)

    def body(self, stop):
        lits = [self.literal()]
        while self.at(","):
            self.next()
            lits.append(self.literal())
        if not (self.peek().text == stop or (stop == "" and self.peek().kind == "eof")):
            raise self.error(f"expected ',' or {stop or 'end of input'!r}")
        return tuple(lits)

    def type_expr(self):
        t = self.next()
        if t.kind == "name" and t.text == "i":
            return IND
        if t.kind == "name" and t.text == "pred":
            self.expect("(")
            params = [self.type_expr()]
            while self.at(","):
                self.next()
                params.append(self.type_expr())
            self.expect(")")
            return Pred(tuple(params))
        raise self.error(f"expected a type ('i' or 'pred(...)'), found {t.text!r}", t)

    def directive(self, start):
        t = self.next()
        if t.text != "hotype":
            raise self.error(f"unknown directive {t.text!r}", t)
        self.expect("(")
        name = self.next()
        if name.kind != "name":
            raise self.error("expected a predicate name", name)
        self.expect(",")
        ty = self.type_expr()
        if not isinstance(ty, Pred):
            raise self.error("a hotype directive needs a pred(...) type", name)
        self.expect(")")
        self.expect(".")
        return SignatureDirective(name.text, ty, start.line)

    def program(self):
        clauses, directives = [], []
        while self.peek().kind != "eof":
            start = self.peek()
            self.anon = 0
            if start.text == ":-":
                self.next()
                directives.append(self.directive(start))
                continue
            head = self.term()
            if isinstance(head, SVar) or (isinstance(head, SApp) and not isinstance(head.head, SName)):
                raise self.error("clause head must start with a predicate name", start)
            body = ()
            if self.at(":-"):
                self.next()
                body = self.body(".")
            self.expect(".")
            clauses.append(SurfaceClause(head, body, start.line, start.col, self.filename))
        return clauses, directives


def parse_program(text: str, filename: Optional[str] = None):
    """Parse ``text`` into ``(surface clauses, signature directives)``."""
    return _Parser(text, filename).program()


def parse_surface_query(text: str):
    p = _Parser(text.strip().removesuffix(".").removeprefix("?-"))
    return p.body("")


# -- desugaring ------------------------------------------------------------------

def _head_parts(head):
    if isinstance(head, SName):
        return head.name, ()
    return head.head.name, head.args


def _surface_vars(t, out):
    if isinstance(t, SVar):
        out.setdefault(t.name, None)
    elif isinstance(t, SApp):
        _surface_vars(t.head, out)
        for a in t.args:
            _surface_vars(a, out)
    return out


def _desugar_surface(c: SurfaceClause, sigs):
    """Return ``(pred, param names, body SLits)`` with distinct head variables."""
    name, args = _head_parts(c.head)
    sig = sigs.get(name)
    if not isinstance(sig, Pred) or sig.arity != len(args):
        raise TypeCheckError(f"{c.loc}: head {name}/{len(args)} does not match signature {sig}")
    used = {}
    _surface_vars(c.head, used)
    for lit in c.body:
        _surface_vars(lit.term, used)
        if lit.rhs is not None:
            _surface_vars(lit.rhs, used)

    def fresh(i):
        n = f"V{i}"
        while n in used:
            n += "_"
        used[n] = None
        return n

    params, eqs, seen = [], [], set()
    for i, (a, t) in enumerate(zip(args, sig.params), 1):
        if isinstance(t, Pred):
            if isinstance(a, SVar) and a.name not in seen:
                seen.add(a.name)
                params.append(a.name)
                continue
            what = f"repeated predicate variable {a.name}" if isinstance(a, SVar) else "a non-variable"
            raise PredicateEqualityUnsupported(
                f"{c.loc}: predicate-typed head argument {i} of {name} is {what}; "
                "predicates cannot be compared for equality")
        if isinstance(a, SVar) and a.name not in seen:
            seen.add(a.name)
            params.append(a.name)
        elif isinstance(a, SVar):
            v = fresh(i)
            params.append(v)
            eqs.append(SLit(True, SVar(a.name), SVar(v)))
        else:
            v = fresh(i)
            params.append(v)
            eqs.append(SLit(True, SVar(v), a))
    return name, params, tuple(eqs) + tuple(c.body)


# -- typing ------------------------------------------------------------------------

class _Typer:
    """Per-program typing context: signatures plus the set of predicate names."""

    def __init__(self, sigs, directives, punning=False):
        self.sigs = sigs
        self.declared = set(directives)
        self.punning = punning

    def predicate_names(self):
        return {n for n, t in self.sigs.items() if isinstance(t, Pred)}

    # variable type inference inside one clause or query
    def infer(self, env, lits):
        env = dict(env)
        pending = {}

        def walk(t, expected):
            if isinstance(t, SVar):
                if expected is None:
                    return
                have = env.get(t.name)
                if have is None:
                    env[t.name] = expected
                    pending.pop(t.name, None)
                    state["changed"] = True
                elif have != expected and not (have == IND and isinstance(expected, Pred)):
                    raise TypeCheckError(f"variable {t.name} used both as {have} and {expected}")
                return
            if not isinstance(t, SApp):
                return
            if isinstance(t.head, SName):
                f = t.head.name
                st = self.sigs.get(f)
                if expected == IND or (st is not None and isinstance(st, Func)):
                    for a in t.args:
                        walk(a, IND)
                    return
                params = st.params if isinstance(st, Pred) else (None,) * len(t.args)
                for a, p in zip(t.args, params + (None,) * len(t.args)):
                    walk(a, p)
                return
            if isinstance(t.head, SVar):
                ht = env.get(t.head.name)
                if isinstance(ht, Pred):
                    for a, p in zip(t.args, ht.params + (None,) * len(t.args)):
                        walk(a, p)
                    return
                if ht is None:
                    rest = expected.params if isinstance(expected, Pred) else ()
                    pending[t.head.name] = (t.args, rest)
                for a in t.args:
                    walk(a, None)

        def guess(a):
            if isinstance(a, SVar):
                return env.get(a.name, IND)
            if isinstance(a, SName) and not self.punning and isinstance(self.sigs.get(a.name), Pred):
                return self.sigs[a.name]
            return IND

        state = {"changed": True}
        while True:
            while state["changed"]:
                state["changed"] = False
                for lit in lits:
                    if lit.rhs is not None:
                        walk(lit.term, IND)
                        walk(lit.rhs, IND)
                    else:
                        walk(lit.term, BOOL)
            if not pending:
                break
            name, (args, rest) = next(iter(pending.items()))
            del pending[name]
            if name not in env:
                env[name] = Pred(tuple(guess(a) for a in args) + tuple(rest))
                state["changed"] = True
        return env

    def convert(self, t, expected, env, callee=None, owner=None):
        if isinstance(t, SVar):
            v = Var(t.name, env.get(t.name, IND))
            if expected is not None and expected != BOOL and v.type != expected:
                if isinstance(expected, Pred) and v.type == IND and owner not in self.declared:
                    raise MissingSignature(
                        f"{t.name} is used as a predicate but {owner} has no hotype directive")
                raise TypeCheckError(f"variable {t.name}: {v.type} where {expected} is expected")
            if expected == BOOL:
                if not isinstance(v.type, Pred) or v.type.params:
                    raise TypeCheckError(f"variable {t.name} of type {v.type} used as a literal")
                return App(v, (), BOOL)
            return v
        if isinstance(t, SName):
            f = t.name
            st = self.sigs.get(f)
            if expected == IND or expected is None:
                if isinstance(st, Pred) and not self.punning:
                    if callee is not None and callee not in self.declared:
                        raise MissingSignature(
                            f"predicate {f} passed as an argument of {callee}, "
                            f"which has no hotype directive")
                    raise TypeCheckError(f"predicate {f} used where an individual is expected")
                if isinstance(st, Func) and not self.punning:
                    raise TypeCheckError(f"function symbol {f}/{st.arity} used as a constant")
                return Const(f, IND)
            if expected == BOOL:
                if st is None:
                    st = self.sigs[f] = Pred(())
                if st != Pred(()):
                    raise TypeCheckError(f"{f} of type {st} used as a nullary atom")
                return App(Const(f, st), (), BOOL)
            if st is None:
                self.sigs[f] = st = expected
            if st != expected:
                raise TypeCheckError(f"predicate {f} has type {st}, expected {expected}")
            return Const(f, st)
        if isinstance(t, SApp):
            if expected == IND and isinstance(t.head, SName):
                f = t.head.name
                st = self.sigs.get(f)
                if isinstance(st, Pred) and not self.punning:
                    raise TypeCheckError(f"predicate {f} used as a function symbol")
                if isinstance(st, Func) and st.arity != len(t.args):
                    raise TypeCheckError(f"function symbol {f} used with arities {st.arity} and {len(t.args)}")
                if not isinstance(st, Func):
                    if st is not None and not self.punning:
                        raise TypeCheckError(f"{f} used as a function symbol and as {st}")
                    if st is None:
                        self.sigs[f] = Func(len(t.args))
                return FunApp(f, tuple(self.convert(a, IND, env) for a in t.args))
            if isinstance(t.head, SName):
                f = t.head.name
                st = self.sigs.get(f)
                if st is None:
                    raise MissingSignature(f"cannot infer the type of {f} in a partial application")
                if not isinstance(st, Pred):
                    raise TypeCheckError(f"{f} of type {st} cannot be applied")
                head = Const(f, st)
                name = f
            else:
                head = self.convert(t.head, None, env)
                name = None
                if not isinstance(head.type, Pred):
                    if owner not in self.declared:
                        raise MissingSignature(
                            f"{t.head.name} is applied as a predicate but {owner} has no hotype directive")
                    raise TypeCheckError(f"variable {t.head.name} of type {head.type} cannot be applied")
            ht = head.type
            if len(t.args) > ht.arity:
                raise TypeCheckError(f"{head} takes {ht.arity} arguments, got {len(t.args)}")
            args = [self.convert(a, p, env, callee=name, owner=owner) for a, p in zip(t.args, ht.params)]
            e = app(head, args)
            if expected is not None and e.type != expected:
                raise TypeCheckError(f"{e} has type {e.type}, expected {expected}")
            return e
        raise TypeCheckError(f"unexpected term {t!r}")

    def literal(self, lit, env, owner):
        if lit.rhs is not None:
            return Literal(True, Eq(self.convert(lit.term, IND, env, owner=owner),
                                    self.convert(lit.rhs, IND, env, owner=owner)))
        return Literal(lit.positive, self.convert(lit.term, BOOL, env, owner=owner))

    def clause(self, name, params, body, loc):
        sig = self.sigs[name]
        env = self.infer(dict(zip(params, sig.params)), body)
        try:
            args = tuple(Var(p, t) for p, t in zip(params, sig.params))
            lits = tuple(self.literal(l, env, name) for l in body)
        except TypeCheckError as e:
            raise type(e)(f"{loc}: {e}") from None
        return Clause(name, args, lits, loc)


def _collect_signatures(clauses, directives):
    sigs = {}
    for d in directives:
        if classify_type(d.type) != "predicate":
            raise TypeCheckError(f"line {d.line}: ill-formed type {d.type} for {d.pred}")
        if d.pred in sigs and sigs[d.pred] != d.type:
            raise TypeCheckError(f"line {d.line}: conflicting hotype directives for {d.pred}")
        sigs[d.pred] = d.type
    for c in clauses:
        name, args = _head_parts(c.head)
        have = sigs.get(name)
        if have is None:
            sigs[name] = Pred((IND,) * len(args))
        elif have.arity != len(args):
            raise TypeCheckError(f"{c.loc}: {name} used with arity {len(args)} but declared {have}")
    for c in clauses:
        for lit in c.body:
            if lit.rhs is not None:
                continue
            t = lit.term
            if isinstance(t, SApp) and isinstance(t.head, SName) and t.head.name not in sigs:
                sigs[t.head.name] = Pred((IND,) * len(t.args))
    return sigs


def desugar_clause(c: SurfaceClause, sigs, directives=None, punning=False) -> Clause:
    """Rewrite one surface clause into the formal clause form and type it.

    Every non-variable individual head argument at position i becomes a fresh
    variable ``Vi`` with ``Vi = E`` at the front of the body; a repeated head
    variable becomes a fresh variable with ``X = Vi``.
    """
    typer = _Typer(sigs, directives if directives is not None else sigs.keys(), punning)
    name, params, body = _desugar_surface(c, sigs)
    return typer.clause(name, params, body, c.loc)


def typecheck_program(clauses, directives, punning=False) -> Program:
    """Desugar and type every clause; returns the typed program.

    Predicates without a directive get all-individual argument types of their
    observed arity.  With ``punning`` a name may be both a predicate and an
    individual constant (needed to re-read defunctionalized output).
    """
    sigs = _collect_signatures(clauses, directives)
    typer = _Typer(sigs, {d.pred for d in directives}, punning)
    out = []
    for c in clauses:
        name, params, body = _desugar_surface(c, sigs)
        out.append(typer.clause(name, params, body, c.loc))
    return Program(tuple(out), sigs)


def load_program(text: str, filename: Optional[str] = None, punning=False) -> Program:
    clauses, directives = parse_program(text, filename)
    return typecheck_program(clauses, directives, punning=punning)


def parse_query(text: str, program: Program, punning=False) -> Goal:
    """Parse a comma-separated list of literals against ``program``'s signatures."""
    lits = parse_surface_query(text)
    sigs = dict(program.signatures)
    for lit in lits:
        t = lit.term
        if lit.rhs is None and isinstance(t, SApp) and isinstance(t.head, SName) and t.head.name not in sigs:
            sigs[t.head.name] = Pred((IND,) * len(t.args))
    directives = {n for n, t in sigs.items() if isinstance(t, Pred) and any(isinstance(p, Pred) for p in t.params)}
    typer = _Typer(sigs, directives, punning)
    env = typer.infer({}, lits)
    return Goal(tuple(typer.literal(l, env, None) for l in lits))
