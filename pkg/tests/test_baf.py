import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from catwork.baf import (
    INF,
    OMEGA_PLUS_1,
    A,
    E,
    L,
    RankOracle,
    SigmaPredicateSpec,
    TruncationParams,
    build_tree,
    c_sequence,
    classify,
    classify_limit,
    isolating_formula,
    iso_baf,
    limit_token,
    shape_kind,
)
from catwork.errors import MalformedTreeError, NotIsomorphicError
from catwork.logic import satisfiers
from catwork.search import check_isomorphism
from catwork.structures import Tree, canonical_form

from conftest import naive_orbit


def expected_size(family, n, w):
    # |A_1| = 1, |E_1| = 1 + w, |A_n| = 1 + w|E_{n-1}|, |E_n| = 1 + w(|A_{n-1}| + |E_{n-1}|)
    a, e = 1, 1 + w
    for _ in range(n - 1):
        a, e = 1 + w * e, 1 + w * (a + e)
    return a if family == "A" else e


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("w", [1, 2, 3])
def test_tree_sizes(n, w):
    t = TruncationParams(w=w, n_max=4)
    assert len(build_tree(A(n), t)) == expected_size("A", n, w)
    assert len(build_tree(E(n), t)) == expected_size("E", n, w)


def test_known_sizes_w2():
    t = TruncationParams(w=2)
    assert [len(build_tree(E(n), t)) for n in (1, 2, 3)] == [3, 9, 33]
    assert [len(build_tree(A(n), t)) for n in (1, 2, 3)] == [1, 7, 19]


def test_provenance_recorded():
    tree = build_tree(E(2), TruncationParams(w=2, I=3))
    assert tree.provenance["kind"] == "E(2)"
    assert tree.provenance["w"] == 2
    assert tree.provenance["fundamental_sequence"] == "beta_i = i+1"


def test_rank_over_cap():
    with pytest.raises(ValueError):
        build_tree(A(5), TruncationParams(n_max=4))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_classify_matches_family(n):
    t = TruncationParams(w=2)
    assert classify(build_tree(A(n), t), n) == "A"
    assert classify(build_tree(E(n), t), n) == "E"
    assert shape_kind(build_tree(E(n), t), n) == "E"


def test_malformed_trees_rejected():
    path = Tree((None, 0, 1))
    with pytest.raises(MalformedTreeError):
        shape_kind(path, 1)
    with pytest.raises(MalformedTreeError):
        classify(build_tree(A(1)), 2)
    # all children A one rank down is not a family member
    only_a = Tree.from_nested(((), ()))
    with pytest.raises(MalformedTreeError):
        shape_kind(only_a, 2)


def test_rank_oracle_counts_calls():
    o = RankOracle()
    t = build_tree(E(3), TruncationParams(w=1))
    assert o.classify(t, 3) == "E"
    assert o.rank_of(t, 4) == 3
    assert o.calls >= 2


@pytest.mark.parametrize("I", [2, 3, 4])
def test_limit_trees(I):
    t = TruncationParams(w=1, I=I, n_max=I + 1)
    for k in range(I):
        assert classify_limit(build_tree(L(k), t), t) == k
    assert classify_limit(build_tree(L(I), t), t) == limit_token(I)
    assert classify_limit(build_tree(L(INF), t), t) == limit_token(I)


def test_limit_tree_child_count():
    t = TruncationParams(w=1, I=3)
    tree = build_tree(L(1), t)
    assert len(tree.children[tree.root]) == 4


def test_omega_plus_one_trees_differ_only_by_inf_copies():
    t = TruncationParams(w=1, I=2)
    a, e = build_tree(A(OMEGA_PLUS_1), t), build_tree(E(OMEGA_PLUS_1), t)
    assert len(e.children[e.root]) == len(a.children[a.root]) + 1
    assert canonical_form(a) != canonical_form(e)


# -- C_x sequences -------------------------------------------------------------------

def test_c_sequence_rank1():
    spec = SigmaPredicateSpec(1, lambda x, y: x == y + 1, domain_cap=6, witness_cap=3)
    for x in range(6):
        want = x in (1, 2, 3)
        assert classify(c_sequence(spec, x), 1) == ("E" if want else "A")


def test_c_sequence_rank2_from_table():
    # x in S iff exists y1 forall y2: (x, y1, y2) in table
    table = [(0, 1, 0), (0, 1, 1), (2, 0, 0)]
    spec = SigmaPredicateSpec.from_table(2, table, domain_cap=4, witness_cap=2)
    assert spec.holds(0) and not spec.holds(2)
    for x in range(4):
        assert classify(c_sequence(spec, x, w=2), 2) == ("E" if spec.holds(x) else "A")


def test_c_sequence_domain_cap():
    spec = SigmaPredicateSpec(1, lambda x, y: True, domain_cap=3)
    with pytest.raises(ValueError):
        c_sequence(spec, 3)


# -- isomorphisms and isolating formulas ---------------------------------------------

@pytest.mark.parametrize("kind", [A(2), E(2), A(3), E(3)])
@given(seed=st.integers(0, 10**6))
def test_iso_baf_to_scrambled_copy(kind, seed):
    tree = build_tree(kind, TruncationParams(w=2))
    perm = list(range(len(tree)))
    random.Random(seed).shuffle(perm)
    copy = tree.relabel(perm)
    w = iso_baf(tree, copy, kind.rank)
    assert check_isomorphism(tree.to_structure(), copy.to_structure(), w)


def test_iso_baf_refuses_different_kinds():
    t = TruncationParams(w=1)
    with pytest.raises(NotIsomorphicError):
        iso_baf(build_tree(A(2), t), build_tree(E(2), t), 2)


@pytest.mark.parametrize("kind", [A(1), E(1), A(2), E(2), E(3)])
def test_isolating_formula_equals_orbit_w1(kind):
    tree = build_tree(kind, TruncationParams(w=1))
    s = tree.to_structure()
    for tup in itertools.chain(
        itertools.product(range(len(tree)), repeat=1), itertools.product(range(len(tree)), repeat=2)
    ):
        phi = isolating_formula(tree, tup, kind.rank)
        assert satisfiers(phi, s, [f"t{i}" for i in range(len(tup))]) == naive_orbit(s, tup)


def test_isolating_formula_variable_count():
    tree = build_tree(E(2), TruncationParams(w=1))
    with pytest.raises(ValueError):
        isolating_formula(tree, (0, 1), 2, ["a"])
