import pytest
from hypothesis import given, strategies as st

from helpers import WINNOW, load
from predspec.ast import BOOL, IND, Eq, Pred, Var
from predspec.corpus import FAMILIES, BenchSpec, generate_text
from predspec.emitter import emit_hl
from predspec.errors import HLSyntaxError, MissingSignature, PredicateEqualityUnsupported, TypeCheckError
from predspec.parser import desugar_clause, load_program, parse_program, parse_query

P2 = Pred((IND, IND))
P1 = Pred((IND,))


def test_fact_has_empty_body():
    clauses, directives = parse_program("p(a).")
    assert len(clauses) == 1 and clauses[0].body == () and directives == []


def test_directive_gives_signature():
    _, directives = parse_program(":- hotype(winnow, pred(pred(i,i), pred(i), i)).")
    assert directives[0].pred == "winnow"
    assert directives[0].type == Pred((P2, P1, IND))


def test_winnow_program_types():
    p = load(WINNOW)
    assert p.signatures["movie"] == P1
    assert p.signatures["pref"] == P2
    w = next(c for c in p.clauses if c.head == "winnow")
    assert [l.positive for l in w.body] == [True, False]
    assert [v.type for v in w.args] == [P2, P1, IND]


def test_not_and_backslash_plus_are_the_same():
    a = load("p(X) :- q(X), not r(X).\nq(a). r(b).")
    b = load("p(X) :- q(X), \\+ r(X).\nq(a). r(b).")
    assert str(a.clauses[0]) == str(b.clauses[0])


@pytest.mark.parametrize("text,line,col", [
    ("p(a) :- q(a)", 1, 13),
    ("p(a).\nq(X :- r.", 2, 5),
    ("p(a).\n\n  r(X) :- ,.", 3, 11),
])
def test_syntax_errors_report_position(text, line, col):
    with pytest.raises(HLSyntaxError) as ei:
        parse_program(text, "f.hl")
    assert ei.value.line == line
    assert ei.value.column == col
    assert str(ei.value).startswith(f"f.hl:{line}:{col}:")


def test_missing_signature():
    with pytest.raises(MissingSignature):
        load_program("p(Q) :- Q(a).\nq(a).\nr :- p(q).")


def test_type_errors():
    with pytest.raises(TypeCheckError):
        load_program("p(X) :- q(X).\nq(a,b).")
    with pytest.raises(TypeCheckError):
        load_program(":- hotype(h, pred(pred(i), i)).\nh(P,X) :- P(X).\nr(X) :- h(X,X).")


def test_predicate_equality_unsupported():
    with pytest.raises(PredicateEqualityUnsupported):
        load_program(":- hotype(p, pred(pred(i), pred(i))).\np(Q,Q) :- Q(a).")
    with pytest.raises(PredicateEqualityUnsupported):
        load_program(":- hotype(h, pred(pred(i), i)).\nm(a).\nh(m,X) :- m(X).")


def test_query_parsing():
    p = load(WINNOW)
    g = parse_query("winnow(pref,movie,T)", p)
    assert str(g) == "winnow(pref,movie,T)"
    assert g.vars == (Var("T"),)
    g2 = parse_query("?- movie(X), not pref(X,m1).", p)
    assert [l.positive for l in g2.literals] == [True, False]


# -- desugaring properties ------------------------------------------------------------

head_args = st.lists(st.one_of(st.sampled_from(["X", "Y", "Z"]), st.sampled_from(["a", "c", "f(X)", "g(a,Y)"])),
                     min_size=1, max_size=5)


@given(head_args)
def test_desugar_distinct_params_and_front_equalities(args):
    text = f"h({','.join(args)}) :- b(X), b(Y), b(Z).\nb(a)."
    clauses, directives = parse_program(text)
    p = load_program(text)
    c = next(c for c in p.clauses if c.head == "h")
    assert len(set(c.args)) == len(c.args)
    assert all(isinstance(v, Var) and v.type == IND for v in c.args)
    seen, expected = set(), []
    for i, a in enumerate(args):
        if a[0].isupper() and a not in seen:
            seen.add(a)
        else:
            expected.append(i)
    n = len(expected)
    assert all(isinstance(l.atom, Eq) for l in c.body[:n])
    assert not any(isinstance(l.atom, Eq) for l in c.body[n:])
    assert len(c.body) == n + 3
    # one equality per non-variable or repeated position, in position order
    for lit, i in zip(c.body[:n], expected):
        assert c.args[i] in (lit.atom.lhs, lit.atom.rhs)


def test_desugar_clause_directly():
    clauses, _ = parse_program("q(X,X).")
    c = desugar_clause(clauses[0], {"q": P2})
    assert str(c) == "q(X,V2) :- X = V2."
    assert c.body[0].atom.type == BOOL


def test_fresh_names_avoid_clashes():
    c = load_program("q(V2,V2).").clauses[0]
    assert len(set(c.args)) == 2
    assert str(c) == "q(V2,V2_) :- V2 = V2_."


# -- round trip -------------------------------------------------------------------------

@pytest.mark.parametrize("family", [f if f not in ("conj", "union", "genconj", "genunion", "w", "wt")
                                    else f + "3" for f in FAMILIES])
def test_round_trip_over_corpus(family):
    text, _ = generate_text(BenchSpec(family, 6))
    p1 = load_program(text)
    p2 = load_program(emit_hl(p1))
    assert [str(c) for c in p1.clauses] == [str(c) for c in p2.clauses]
    assert p1.signatures == p2.signatures
    p3 = load_program(emit_hl(p2))
    assert emit_hl(p3) == emit_hl(p2)
