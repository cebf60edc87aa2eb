import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from catwork.baf import A, E, TruncationParams, build_tree
from catwork.coders.warmup import build_warmup, sort_tag
from catwork.effective import CeSetSpec
from catwork.errors import (
    CapsError,
    SearchCapExceeded,
    UnboundVariableError,
    VariableCaptureError,
    VocabularyError,
)
from catwork.logic import (
    FALSE,
    TRUE,
    And,
    Desc,
    Eq,
    Exists,
    Forall,
    Not,
    Or,
    Rel,
    ef_equivalent,
    eval_via_bounded_substructure,
    evaluate,
    expand_desc,
    formula_corpus,
    free_vars,
    from_json_obj,
    parse_sexpr,
    phi_n,
    quantifier_rank,
    relativize,
    relativize_box,
    satisfiers,
    to_json_obj,
    to_sexpr,
)
from catwork.logic.relativize import phi_rank_profile
from catwork.structures import FiniteStructure, extract_sort, random_structure, scramble

VARS = ("x", "y", "z")


def naive_eval(phi, s, env):
    """Textbook recursive truth definition, no guards, no memo."""
    if phi == TRUE:
        return True
    if phi == FALSE:
        return False
    if isinstance(phi, Eq):
        return env[phi.left] == env[phi.right]
    if isinstance(phi, Rel):
        vals = tuple(env[a] for a in phi.args)
        if len(vals) == 1:
            return vals[0] in s.unary[phi.name]
        return vals in s.binary[phi.name]
    if isinstance(phi, Desc):
        return naive_eval(expand_desc(phi), s, env)
    if isinstance(phi, Not):
        return not naive_eval(phi.body, s, env)
    if isinstance(phi, And):
        return all(naive_eval(p, s, env) for p in phi.parts)
    if isinstance(phi, Or):
        return any(naive_eval(p, s, env) for p in phi.parts)
    if isinstance(phi, Exists):
        return any(naive_eval(phi.body, s, {**env, phi.var: a}) for a in s.universe)
    if isinstance(phi, Forall):
        return all(naive_eval(phi.body, s, {**env, phi.var: a}) for a in s.universe)
    raise TypeError(phi)


def formulas(depth=3):
    v = st.sampled_from(VARS)
    atoms = st.one_of(
        st.builds(lambda a: Rel("P", (a,)), v),
        st.builds(lambda a: Rel("Q", (a,)), v),
        st.builds(lambda a, b: Rel("E", (a, b)), v, v),
        st.builds(Eq, v, v),
    )

    def extend(inner):
        return st.one_of(
            st.builds(Not, inner),
            st.builds(lambda p, q: And((p, q)), inner, inner),
            st.builds(lambda p, q: Or((p, q)), inner, inner),
            st.builds(Exists, v, inner),
            st.builds(Forall, v, inner),
        )

    return st.recursive(atoms, extend, max_leaves=8)


@st.composite
def small_structures(draw):
    n = draw(st.integers(1, 4))
    return random_structure(random.Random(draw(st.integers(0, 10**6))), n, ("P", "Q"), ("E",), 0.4)


@given(formulas(), small_structures(), st.data())
def test_evaluate_matches_naive(phi, s, data):
    env = {x: data.draw(st.integers(0, s.size - 1)) for x in sorted(free_vars(phi))}
    assert evaluate(phi, s, env) == naive_eval(phi, s, env)


@given(formulas(), small_structures())
def test_satisfiers_match_naive(phi, s):
    import itertools

    vs = sorted(free_vars(phi))
    want = {
        t for t in itertools.product(s.universe, repeat=len(vs)) if naive_eval(phi, s, dict(zip(vs, t)))
    }
    assert satisfiers(phi, s, vs) == want


@given(formulas())
def test_sexpr_and_json_roundtrip(phi):
    assert parse_sexpr(to_sexpr(phi)) == phi
    assert from_json_obj(to_json_obj(phi)) == phi


def test_parse_errors():
    with pytest.raises(ValueError):
        parse_sexpr("(and (= x y)")
    with pytest.raises(ValueError):
        parse_sexpr("(= x y) extra")


def test_quantifier_rank():
    phi = parse_sexpr("(exists x (and (forall y (rel E x y)) (exists z (= z x))))")
    assert quantifier_rank(phi) == 2
    assert quantifier_rank(Desc("x", "y", 3)) == 0


def test_unbound_and_vocabulary_errors():
    s = FiniteStructure(2, {"P": [0]})
    with pytest.raises(UnboundVariableError):
        evaluate(Rel("P", ("x",)), s)
    with pytest.raises(VocabularyError):
        evaluate(Exists("x", Rel("Q", ("x",))), s)


def test_desc_expansion_agrees():
    t = build_tree(E(2), TruncationParams(w=2)).to_structure()
    phi = Exists("r", And((Rel("Root", ("r",)), Desc("r", "v", 1))))
    got = satisfiers(phi, t, ["v"])
    assert got == satisfiers(expand_desc(phi), t, ["v"])
    assert got == {(0,)} | {(c,) for c in range(t.size) if (0, c) in t.binary["Edge"]}


def test_relativize_capture():
    with pytest.raises(VariableCaptureError):
        relativize(Exists("x", TRUE), "x", 2)
    with pytest.raises(VariableCaptureError):
        relativize_box(Exists("o", TRUE), "o", 1)


def test_phi_rank_profile():
    # phi_1 nests two quantifiers; each level adds the child quantifier, and
    # the root helper sits beside the relativized body, not under it
    assert phi_rank_profile(4) == [2, 3, 4, 5]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("w", [1, 2, 3])
def test_phi_n_separates(n, w):
    t = TruncationParams(w=w, n_max=n)
    assert evaluate(phi_n(n), build_tree(E(n), t).to_structure())
    assert not evaluate(phi_n(n), build_tree(A(n), t).to_structure())


def test_phi_n_invalid():
    with pytest.raises(ValueError):
        phi_n(0)


# -- EF games --------------------------------------------------------------------

def test_ef_small_cases():
    one, two = FiniteStructure(1), FiniteStructure(2)
    assert ef_equivalent(one, two, 1)
    assert not ef_equivalent(one, two, 2)
    three = FiniteStructure(3)
    assert ef_equivalent(two, three, 2)
    assert not ef_equivalent(two, three, 3)


def test_ef_cap():
    s = FiniteStructure(3)
    with pytest.raises(SearchCapExceeded):
        ef_equivalent(s, s, 5)


@given(small_structures(), st.integers(0, 10**6), st.integers(1, 3))
def test_ef_isomorphic_copies_equivalent(s, seed, k):
    copy, _ = scramble(s, seed)
    assert ef_equivalent(s, copy, k)


def test_corpus_is_closed_and_ranked():
    rng = random.Random(1)
    samples = [random_structure(rng, 3, ("P",), ("E",)) for _ in range(4)]
    corpus = formula_corpus(["P"], ["E"], 2, samples, combine_limit=10)
    assert corpus
    assert all(not free_vars(phi) and quantifier_rank(phi) <= 2 for phi in corpus)


# -- bounded substructures ---------------------------------------------------------

def test_bounded_substructure_agrees_on_warmup_sorts():
    d = CeSetSpec({1: 2, 2: 0}, horizon=3, index_cap=3)
    pair = build_warmup(d)
    for s in (pair.M, pair.N):
        for n in range(3):
            sub = extract_sort(s, sort_tag(n))
            used = [k for k, v in sub.unary.items() if v]
            for phi in formula_corpus(used, [], 2, [sub], combine_limit=8):
                assert eval_via_bounded_substructure(phi, sub) == evaluate(phi, sub)


def test_bounded_substructure_needs_plain_elements():
    s = FiniteStructure(3, {"U": [0]})
    phi = parse_sexpr("(exists x (exists y (exists z (and (not (= x y)) (not (= y z))))))")
    with pytest.raises(CapsError):
        eval_via_bounded_substructure(phi, s)


def test_bounded_substructure_rejects_binary():
    s = FiniteStructure(2, binary={"E": [(0, 1)]})
    with pytest.raises(ValueError):
        eval_via_bounded_substructure(TRUE, s)
