import logging

import pytest
from hypothesis import given, settings, strategies as st

from helpers import CONJ3, TC, WINNOW, load, rules
from predspec.ast import is_variant
from predspec.corpus import random_program
from predspec.errors import FragmentViolation, IterationLimit, OpenGoal, ResidualPredicateVariable
from predspec.interp import EngineLimits, check_equivalence
from predspec.parser import parse_query
from predspec.specializer import (
    abstract, abstract_atom, eliminate_partial_apps, firstify, format_report, is_most_general,
    most_general_goal, rename, specialize, unfold, unfold_clause,
)


def winnow():
    return load(WINNOW, "winnow(pref,movie,T)")


def test_winnow_spec_set_and_iterations():
    out = specialize(*winnow())
    assert [str(a) for a in out.spec_set] == [
        "winnow(pref,movie,V1)", "movie(V1)", "bypassed(pref,movie,V1)", "pref(V1,V2)"]
    assert out.iterations == 3


def test_unfold_examples():
    p, _ = winnow()
    w = p.clauses_for("winnow")[0]
    c = unfold_clause(abstract_atom(winnow()[1].literals[0].atom), w)
    assert str(c) == "winnow(pref,movie,T) :- movie(T), \\+ bypassed(pref,movie,T)."
    b = p.clauses_for("bypassed")[0]
    c = unfold_clause(next(iter(abstract([c.body[1].atom]))), b)
    assert str(c) == "bypassed(pref,movie,T) :- movie(Z), pref(Z,T)."


def test_unfold_most_general_is_identity():
    p = load(TC)
    s = abstract([most_general_goal(p, "tc").literals[0].atom])
    assert all(is_most_general(a) for a in s)
    assert unfold(p, s) == list(p.clauses_for("tc"))


def test_abstract_is_idempotent_and_generalizes_individuals():
    p, g = load(TC, "tc(edge,a,Y)")
    s = abstract([g.literals[0].atom])
    assert [str(a) for a in s] == ["tc(edge,V1,V2)"]
    assert abstract([a.atom for a in s]) == s


def test_unfold_reports_undefined_predicates(caplog):
    p, g = load(TC, "tc(edge,a,Y)")
    with caplog.at_level(logging.WARNING):
        out = specialize(p, g)
    assert any("UndefinedPredicate: edge/2" in w for w in out.warnings)
    assert "UndefinedPredicate" in caplog.text


def test_rename_table():
    out = rename(specialize(*winnow()))
    table = {str(a): (e.name, [v.name for v in e.params]) for a, e in out.table.items()}
    assert table == {
        "winnow(pref,movie,V1)": ("winnow_s1", ["V1"]),
        "movie(V1)": ("movie", ["V1"]),
        "bypassed(pref,movie,V1)": ("bypassed_s1", ["V1"]),
        "pref(V1,V2)": ("pref", ["V1", "V2"]),
    }
    assert "winnow_s1: winnow(pref,movie,V1)" not in format_report(out)
    assert "winnow(pref,movie,V1) -> winnow_s1(V1)" in format_report(out)


def test_rename_avoids_existing_names():
    text = WINNOW + "winnow_s1(a).\n"
    p, g = load(text, "winnow(pref,movie,T), winnow_s1(T)")
    out = firstify(p, g)
    names = {c.head for c in out.program.clauses}
    assert "winnow_s1_" in names and "winnow_s1" in names


def test_open_goal_rejected():
    p = load(WINNOW)
    g = parse_query("winnow(P,movie,T)", p)
    with pytest.raises(OpenGoal):
        firstify(p, g)
    out = firstify(p, g, residual=True)
    assert any("P(" in r for r in rules(out.program))


def test_fragment_violation_is_raised():
    p, g = load(":- hotype(loop, pred(pred(i), i)).\nloop(P,X) :- loop(loop(P),X).\nm(a).\n", "loop(m,a)")
    with pytest.raises(FragmentViolation) as ei:
        firstify(p, g)
    assert ei.value.report.kinds() == ["CyclicPartialApplication"]
    # with the check off, the iteration guard is what stops it
    with pytest.raises(IterationLimit):
        firstify(p, g, check=False, max_iterations=50)


def test_residual_variable_error():
    p = load(WINNOW)
    out = specialize(p, parse_query("winnow(P,movie,T)", p))
    with pytest.raises(ResidualPredicateVariable):
        rename(out)


def test_eliminate_partial_apps_output():
    out = eliminate_partial_apps(load(CONJ3), "conj3")
    assert [str(c) for c in out.clauses] == [
        "conj3(P,Q,R,X) :- conj2_s1(P,Q,R,X).",
        "conj2_s1(P,V2,V3,X) :- P(X), conj2(V2,V3,X).",
        "conj2(P,Q,X) :- P(X), Q(X).",
    ]


def test_tc_specializes_to_first_order_recursion():
    p, g = load(TC + "edge(a,b). edge(b,c). edge(c,d).\n", "tc(edge,a,Y)")
    out = firstify(p, g)
    assert rules(out.program) == ["tc_s1(X,Y) :- edge(X,Y).", "tc_s1(X,Y) :- edge(X,Z), tc_s1(Z,Y)."]
    assert str(out.renamed_goal) == "tc_s1(a,Y)"
    v = check_equivalence(p, g, out.program, out.renamed_goal)
    assert v.result == "equal"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_random_programs_firstify_equivalently(seed):
    program, goal = random_program(seed)
    out = firstify(program, goal)
    assert out.iterations <= 1 + len(out.spec_set)
    assert all(not is_variant(a.atom, b.atom) for a in out.spec_set for b in out.spec_set if a != b)
    v = check_equivalence(program, goal, out.program, out.renamed_goal, EngineLimits(200, 50_000))
    assert v.result != "differs", v.describe()
