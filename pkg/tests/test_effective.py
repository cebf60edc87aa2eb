import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from catwork.effective import (
    CeSetSpec,
    MonotoneApprox,
    default_level_policy,
    dominates,
    exceeds_at_level,
    modulus_decode,
    monotone_from_ce,
    phi_at_level,
    self_modulus,
)
from catwork.errors import DominationError, ScenarioError


@st.composite
def ce_sets(draw, max_n=8, max_h=12):
    n = draw(st.integers(0, max_n))
    h = draw(st.integers(0, max_h))
    entries = draw(st.dictionaries(st.integers(0, max(n - 1, 0)), st.integers(0, h), max_size=n))
    return CeSetSpec(entries if n else {}, h, n)


def test_stage_sets():
    d = CeSetSpec({5: 7}, horizon=8, index_cap=6)
    assert d.members == {5}
    assert not d.at_stage(5, 6) and d.at_stage(5, 7)
    assert d.stage_set(6) == frozenset() and d.stage_set(8) == {5}
    assert d.entered_at(5, 7) and not d.entered_at(5, 8)


def test_ce_set_validation_names_field():
    with pytest.raises(ScenarioError) as exc:
        CeSetSpec({1: 9}, horizon=8, index_cap=3)
    assert exc.value.field == "H"
    with pytest.raises(ScenarioError) as exc:
        CeSetSpec({4: 1}, horizon=8, index_cap=3)
    assert exc.value.field == "N"


@given(ce_sets())
def test_ce_set_dict_roundtrip(d):
    assert CeSetSpec.from_dict(d.to_dict()) == d


def test_self_modulus_values():
    d = CeSetSpec({0: 3, 2: 1}, horizon=4, index_cap=4)
    assert self_modulus(d).values == (3, 0, 1, 0)


@given(ce_sets(), st.data())
def test_any_dominator_decodes(d, data):
    f = self_modulus(d)
    g = [f(n) + data.draw(st.integers(0, 3)) for n in range(d.index_cap)]
    assert dominates(g, f) == (True, None)
    assert modulus_decode(g, d) == d.members


def test_non_dominator_rejected_with_witness():
    d = CeSetSpec({1: 4}, horizon=5, index_cap=3)
    with pytest.raises(DominationError) as exc:
        modulus_decode([0, 3, 0], d)
    assert exc.value.witness == 1
    assert dominates([0, 3, 0], self_modulus(d)) == (False, 1)


def test_approx_rejects_decrease():
    with pytest.raises(ScenarioError):
        MonotoneApprox([[0, 2, 1]], [[0, 0, 0]], 2)


def test_approx_rejects_level_over_cap():
    with pytest.raises(ScenarioError) as exc:
        MonotoneApprox([[0, 1]], [[0, 3]], 2)
    assert exc.value.field == "M"


def test_levels_gate_visibility():
    a = MonotoneApprox([[0, 1, 3]], [[0, 2, 1]], 2)
    assert phi_at_level(a, 0, 1, 1) is None
    assert phi_at_level(a, 0, 1, 2) == 1
    assert exceeds_at_level(a, 0, 2, 1)  # the 3 at s=2 is visible from level 1
    assert not exceeds_at_level(a, 0, 3, 2)
    assert exceeds_at_level(a, 0, 3, 2, strict=False)


@given(ce_sets(max_n=6, max_h=8), st.integers(1, 4), st.integers(0, 50))
def test_monotone_from_ce_limit_is_modulus(d, m, seed):
    a = monotone_from_ce(d, m, seed=seed)
    assert a.limits() == self_modulus(d).values
    if d.index_cap:  # an empty table carries no stage axis
        assert a.horizon == d.horizon


def test_default_level_policy():
    pol = default_level_policy(seed=2, level_cap=3)
    assert [pol(n, 0) for n in range(5)] == [2, 3, 0, 1, 2]


def test_level_table_assignment():
    d = CeSetSpec({0: 1}, horizon=2, index_cap=2)
    a = monotone_from_ce(d, 3, {0: 2, (1, 0): 3})
    assert a.levels == ((2, 2, 2), (3, 0, 0))


@given(st.integers(0, 10**6))
def test_random_approx_roundtrip(seed):
    a = MonotoneApprox.random(random.Random(seed), 3, 5, 3, 3)
    assert MonotoneApprox.from_dict(a.to_dict()) == a
    assert max(a.limits()) <= 3
