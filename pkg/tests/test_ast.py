import pytest
from hypothesis import given, strategies as st

from predspec.ast import (
    BOOL, IND, App, Clause, Const, Eq, FunApp, Func, Literal, Pred, Substitution, Var,
    apply_subst, app, canonicalize_atom, classify_type, eq, fold_head_equalities, is_fact,
    is_variant, match, rename, spine_normal, subexprs, unify_terms, resolve, vars_of,
)
from predspec.errors import NotAnAtom, TypeCheckError, TypeMismatch

P1 = Pred((IND,))
P2 = Pred((IND, IND))
WINNOW_T = Pred((P2, P1, IND))

winnow = Const("winnow", WINNOW_T)
pref = Const("pref", P2)
movie = Const("movie", P1)
conj2 = Const("conj2", Pred((P1, P1, IND)))
T, X, Y, Z = (Var(n) for n in "TXYZ")
P, Q, R = (Var(n, P1) for n in "PQR")


# -- strategies ------------------------------------------------------------------

ind_vars = st.sampled_from([Var(n) for n in ("X", "Y", "Z", "W")])
ind_consts = st.sampled_from([Const("a"), Const("b")])
ind_terms = st.recursive(
    st.one_of(ind_vars, ind_consts),
    lambda sub: st.one_of(st.builds(lambda a: FunApp("f", (a,)), sub),
                          st.builds(lambda a, b: FunApp("g", (a, b)), sub, sub)),
    max_leaves=4,
)
s_pred = Const("s", P2)
pred1_terms = st.one_of(
    st.sampled_from([P, Q, movie]),
    st.builds(lambda t: App(s_pred, (t,), P1), ind_terms),
)
atoms = st.one_of(
    st.builds(lambda a, b, c: App(Const("p", Pred((IND, IND, IND))), (a, b, c), BOOL), ind_terms, ind_terms, ind_terms),
    st.builds(lambda p, a: App(Const("q", Pred((P1, IND))), (p, a), BOOL), pred1_terms, ind_terms),
    st.builds(lambda p, q, a: App(conj2, (p, q, a), BOOL), pred1_terms, pred1_terms, ind_terms),
)


def fresh_renaming(e, prefix):
    return {v: Var(prefix + v.name, v.type) for v in vars_of(e)}


# -- types ---------------------------------------------------------------------------

def test_classify_type():
    assert classify_type(IND) == "argument"
    assert classify_type(WINNOW_T) == "predicate"
    assert classify_type(Func(2)) == "functional"
    assert classify_type(Pred((Func(1),))) == "ill-formed"
    assert classify_type(Pred((BOOL,))) == "ill-formed"


# -- expressions ---------------------------------------------------------------------

def test_vars_examples():
    assert vars_of(app(winnow, [pref, movie, T])) == (T,)
    assert vars_of(movie) == ()
    c = Const("conj2", Pred((P1, P1, IND)))
    e = app(c, [P, app(c, [Q, R]), X])
    assert vars_of(e) == (P, Q, R, X)


def test_app_flattens_and_types():
    partial = app(conj2, [P])
    assert partial.type == Pred((P1, IND))
    full = app(partial, [Q, X])
    assert full == App(conj2, (P, Q, X), BOOL)
    assert spine_normal(full)
    with pytest.raises(TypeCheckError):
        app(movie, [X, Y])
    with pytest.raises(TypeCheckError):
        app(movie, [P])
    with pytest.raises(TypeCheckError):
        eq(P, X)


def test_app_head_never_app():
    with pytest.raises(AssertionError):
        App(App(conj2, (P,), Pred((P1, IND))), (Q, X), BOOL)


def test_apply_subst_examples():
    bypassed = Const("bypassed", WINNOW_T)
    Pv, Rv = Var("P", P2), Var("R", P1)
    body = (Literal(True, app(Rv, [T])), Literal(False, app(bypassed, [Pv, Rv, T])))
    out = apply_subst(body, {Pv: pref, Rv: movie})
    assert [str(l) for l in out] == ["movie(T)", "\\+ bypassed(pref,movie,T)"]
    # a partial application substituted for an applied variable re-flattens
    Q2, R2 = Var("Q2", P1), Var("R2", P1)
    qv = Var("Q", P1)
    e = apply_subst(app(qv, [X]), {qv: app(conj2, [Q2, R2])})
    assert e == App(conj2, (Q2, R2, X), BOOL)


def test_substitution_is_type_preserving():
    with pytest.raises(TypeMismatch):
        Substitution({X: movie})
    with pytest.raises(TypeMismatch):
        apply_subst(app(movie, [X]), {P: Const("a")})


@given(atoms)
def test_empty_substitution_is_identity(e):
    assert apply_subst(e, {}) == e


@given(atoms, st.dictionaries(ind_vars, ind_terms, max_size=3))
def test_vars_after_substitution(e, theta):
    out = apply_subst(e, theta)
    allowed = set(vars_of(e)) - set(theta)
    for v in vars_of(e):
        if v in theta:
            allowed |= set(vars_of(theta[v]))
    assert set(vars_of(out)) <= allowed
    assert spine_normal(out)


@given(atoms, st.dictionaries(st.sampled_from([P, Q]),
                              st.one_of(st.just(movie), st.builds(lambda t: App(s_pred, (t,), P1), ind_terms)),
                              max_size=2))
def test_pred_substitution_keeps_spine_normal(e, theta):
    out = apply_subst(e, theta)
    assert spine_normal(out)
    assert out.type == BOOL


# -- canonical atoms ---------------------------------------------------------------

def test_canonicalize_examples():
    assert str(canonicalize_atom(app(winnow, [pref, movie, T]))) == "winnow(pref,movie,V1)"
    c = Const("conj2", Pred((P1, P1, IND)))
    assert str(canonicalize_atom(app(c, [P, app(c, [Q, R]), X]))) == "conj2(V1,conj2(V2,V3),V4)"
    p = Const("p", Pred((IND, IND, IND)))
    assert str(canonicalize_atom(app(p, [X, Y, X]))) == "p(V1,V2,V1)"


def test_canonicalize_rejects_non_atoms():
    with pytest.raises(NotAnAtom):
        canonicalize_atom(Eq(X, Y))
    with pytest.raises(NotAnAtom):
        canonicalize_atom(app(P, [X]))
    with pytest.raises(NotAnAtom):
        canonicalize_atom(app(conj2, [P]))


@given(atoms)
def test_canonicalize_idempotent(a):
    c = canonicalize_atom(a)
    assert canonicalize_atom(c.atom) == c


@given(atoms, st.sampled_from(["A", "B_", "Zz"]))
def test_variants_are_equal_after_renaming(a, prefix):
    b = rename(a, fresh_renaming(a, prefix))
    assert is_variant(a, b)
    assert is_variant(b, a)
    assert canonicalize_atom(a) == canonicalize_atom(b)


@given(atoms, atoms, atoms)
def test_variant_relation_is_transitive(a, b, c):
    if is_variant(a, b) and is_variant(b, c):
        assert is_variant(a, c)


@given(atoms)
def test_variant_iff_mutual_match(a):
    b = rename(a, fresh_renaming(a, "K"))
    assert match(a, b) is not None and match(b, a) is not None


# -- matching and unification ------------------------------------------------------

@given(ind_terms, ind_terms)
def test_unify_gives_common_instance(s, t):
    b = {}
    if unify_terms(s, t, b):
        assert resolve(s, b) == resolve(t, b)


def test_unify_occurs_check():
    assert not unify_terms(X, FunApp("f", (X,)), {})


def test_match_is_one_way():
    p = Const("p", Pred((IND, IND, IND)))
    pat = app(p, [X, Y, X])
    assert match(pat, app(p, [Const("a"), Z, Const("a")])) == {X: Const("a"), Y: Z}
    assert match(pat, app(p, [Const("a"), Z, Const("b")])) is None


# -- clauses ---------------------------------------------------------------------------

def test_fold_head_equalities_and_facts():
    v2 = Var("V2")
    c = Clause("q", (X, v2), (Literal(True, Eq(X, v2)),))
    assert is_fact(c)
    args, body = fold_head_equalities(c)
    assert args[0] == args[1] and body == ()
    dead = Clause("q", (X,), (Literal(True, Eq(X, Const("a"))), Literal(True, Eq(X, Const("b")))))
    assert fold_head_equalities(dead) is None
    assert not is_fact(dead)
    rule = Clause("r", (X,), (Literal(True, app(movie, [X])),))
    assert not is_fact(rule)


def test_subexprs_preorder():
    e = app(conj2, [P, app(Const("s", P2), [X]), Y])
    names = [str(x) for x in subexprs(e)]
    assert names[0] == str(e)
    assert names.index("P") < names.index("X") < names.index("Y")
