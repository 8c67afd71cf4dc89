import re

from predspec.parser import load_program, parse_query

WINNOW = """\
:- hotype(winnow, pred(pred(i,i), pred(i), i)).
:- hotype(bypassed, pred(pred(i,i), pred(i), i)).
winnow(P,R,T) :- R(T), not bypassed(P,R,T).
bypassed(P,R,T) :- R(Z), P(Z,T).
movie(m1). movie(m2). movie(m3).
pref(m1,m2). pref(m2,m3). pref(m1,m3).
"""

CONJ3 = """\
:- hotype(conj2, pred(pred(i), pred(i), i)).
:- hotype(conj3, pred(pred(i), pred(i), pred(i), i)).
conj2(P,Q,X) :- P(X), Q(X).
conj3(P,Q,R,X) :- conj2(P,conj2(Q,R),X).
"""

TC = """\
:- hotype(tc, pred(pred(i,i), i, i)).
tc(R,X,Y) :- R(X,Y).
tc(R,X,Y) :- R(X,Z), tc(R,Z,Y).
"""


def load(text, query=None, **kw):
    p = load_program(text, **kw)
    return (p, parse_query(query, p)) if query else p


def rules(program):
    """Non-fact clauses rendered as text."""
    from predspec.ast import is_fact
    return [str(c) for c in program.clauses if not is_fact(c)]


_VAR = re.compile(r"\b[A-Z_][A-Za-z0-9_]*\b")
_NAME = re.compile(r"\b[a-z][A-Za-z0-9_]*\b")


def alpha(text, names=None):
    """Clause text with variables renamed A0, A1, ... by first occurrence and
    predicate names mapped through ``names``, for comparison modulo naming."""
    seen = {}
    text = _VAR.sub(lambda m: seen.setdefault(m.group(0), f"A{len(seen)}"), text)
    if names:
        text = _NAME.sub(lambda m: names.get(m.group(0), m.group(0)), text)
    return text.replace(" ", "")


def rule_set(program, names=None):
    return sorted(alpha(r, names) for r in rules(program))
