import random

import pytest

from catwork.baf import RankOracle
from catwork.coders import (
    R_PART,
    SPINE,
    achievable_a0_images,
    achievable_dominators,
    box_kind,
    boxes_canonical_iso,
    build_boxes,
    build_composite,
    build_s_omega,
    build_warmup,
    composite_iso,
    decode_from_warmup_iso,
    end_to_end,
    extract_dominator,
    iso_with_modulus,
    match_s_omega,
    primality_report,
    restrict_to_core,
    sort_tag,
    stage_tag,
    threshold_profile,
    warmup_canonical_iso,
    warmup_iso_with_D,
)
from catwork.effective import CeSetSpec, MonotoneApprox, monotone_from_ce, self_modulus
from catwork.errors import CapsError, ClaimViolation, CopyMismatchError
from catwork.search import check_isomorphism, find_isomorphisms
from catwork.structures import extract_sort, scramble

D57 = CeSetSpec({5: 7}, horizon=8, index_cap=6)


# -- warm-up ------------------------------------------------------------------------

def test_warmup_marks_for_5_at_7():
    pair = build_warmup(D57)
    a0, b7 = pair.element(5, 0), pair.element(5, 7)
    assert pair.M.unary[stage_tag(7)] == {a0}
    assert pair.N.unary[stage_tag(7)] == {b7}
    assert all(not v for k, v in pair.M.unary.items() if k.startswith("U_") and k != stage_tag(7))


def test_warmup_empty_set_has_no_marks():
    pair = build_warmup(CeSetSpec({}, 4, 3))
    assert all(not v for k, v in pair.N.unary.items() if k.startswith("U_"))


def test_warmup_caps_too_small():
    with pytest.raises(CapsError):
        build_warmup(D57, per_sort=5)


def test_warmup_sorts_isomorphic():
    pair = build_warmup(CeSetSpec({1: 2}, 3, 3))
    for n in range(3):
        m, nn = extract_sort(pair.M, sort_tag(n)), extract_sort(pair.N, sort_tag(n))
        assert find_isomorphisms(m, nn, limit=1, cap=40)


def test_warmup_canonical_iso_shift():
    pair = build_warmup(D57)
    g = warmup_canonical_iso(pair)
    assert check_isomorphism(pair.M, pair.N, g)
    assert g(pair.element(5, 0)) == pair.element(5, 7)
    assert g(pair.element(5, 3)) == pair.element(5, 2)
    assert g(pair.element(2, 4)) == pair.element(2, 4)
    assert decode_from_warmup_iso(g, pair) == {5}


def test_warmup_decode_rejects_non_iso():
    pair = build_warmup(D57)
    g = warmup_canonical_iso(pair)
    with pytest.raises(ClaimViolation):
        decode_from_warmup_iso(g, build_warmup(CeSetSpec({5: 6}, 8, 6)))


def test_every_warmup_iso_decodes_small():
    # full enumeration: every isomorphism of every sort, not just a0 images
    d = CeSetSpec({0: 2, 2: 0}, horizon=2, index_cap=3)
    pair = build_warmup(d)
    for n in range(3):
        m, nn = extract_sort(pair.M, sort_tag(n)), extract_sort(pair.N, sort_tag(n))
        isos = find_isomorphisms(m, nn, cap=40)
        assert isos
        for g in isos:
            s = g(0)
            assert d.at_stage(n, s) == (n in d.members)
        assert sorted(pair.locate(x)[1] for x in achievable_a0_images(pair, n)) == sorted({g(0) for g in isos})


@pytest.mark.parametrize("seed", range(5))
def test_warmup_iso_with_d_on_scrambled_copy(seed):
    pair = build_warmup(D57)
    copy, _ = scramble(pair.N, seed)
    assert check_isomorphism(pair.M, copy, warmup_iso_with_D(pair, copy, D57))


def test_warmup_iso_with_d_malformed_copy():
    pair = build_warmup(D57)
    with pytest.raises(CopyMismatchError, match="malformed"):
        warmup_iso_with_D(pair, pair.M.with_relations(unary={stage_tag(7): []}), D57)


# -- boxes --------------------------------------------------------------------------

ROW = MonotoneApprox([[0, 0, 2, 2, 3]], [[1, 1, 1, 2, 2]], 2)


def test_zero_approx_all_a():
    a = MonotoneApprox([[0, 0], [0, 0]], [[0, 1], [2, 0]], 2)
    for side in "MN":
        for n in range(2):
            for i in range(3):
                for m in (1, 2):
                    assert box_kind(a, side, n, i, m) == "A"
    p = threshold_profile(build_boxes(a, w=1))
    assert all(s.thresholds == () for s in p.sorts)


def test_box_kinds_limit_3():
    a = MonotoneApprox([[0, 1, 3]], [[0, 0, 0]], 2)
    assert [box_kind(a, "N", 0, i, 2) for i in range(5)] == ["E", "E", "E", "A", "A"]
    assert all(box_kind(a, "M", 0, 0, m) == "A" for m in (1, 2))


def test_threshold_profile_example():
    # level 1 sees values 0, 0, 2; level 2 also sees the 3s
    p = threshold_profile(build_boxes(ROW, w=1))
    assert p.sorts[0].f == 3
    assert p.sorts[0].thresholds == (1, 1, 2)
    assert p.sorts[0].tail == 3


def test_spine_too_short():
    with pytest.raises(CapsError, match="all-A tail"):
        build_boxes(ROW, spine_lengths=3)


def test_boxes_canonical_iso_and_dominator():
    pair = build_boxes(ROW, w=2)
    g = boxes_canonical_iso(pair)
    assert check_isomorphism(pair.M, pair.N, g)
    assert extract_dominator(g, pair) == (3,)
    assert g(pair.layout_M.spine[0][0]) == pair.layout_N.spine[0][3]


@pytest.mark.parametrize("w,tail", [(1, 1), (1, 2), (2, 1)])
@pytest.mark.parametrize(
    "values,levels",
    [([[0, 1, 2]], [[2, 1, 1]]), ([[0, 2, 2]], [[0, 2, 1]]), ([[1, 1, 1]], [[0, 0, 0]]), ([[0, 0, 0]], [[1, 1, 1]])],
)
def test_every_iso_dominates_exhaustive(values, levels, w, tail):
    a = MonotoneApprox(values, levels, 2)
    pair = build_boxes(a, w=w, tail=tail)
    isos = find_isomorphisms(pair.M, pair.N, cap=10**4)
    assert isos
    f = a.limits()
    seen = set()
    for g in isos:
        ghat = extract_dominator(g, pair)
        assert ghat[0] >= f[0]
        seen.add(ghat[0])
    assert sorted(seen) == achievable_dominators(pair, 0)


def test_iso_with_modulus_scrambled_201():
    a = MonotoneApprox([[0, 2], [0, 0], [1, 1]], [[0, 1], [0, 0], [2, 2]], 2)
    assert a.limits() == (2, 0, 1)
    pair = build_boxes(a, w=2)
    copy, _ = scramble(pair.N, 11)
    g = iso_with_modulus(pair, copy, a.limits())
    assert check_isomorphism(pair.N, copy, g)
    with pytest.raises(CopyMismatchError, match="modulus"):
        iso_with_modulus(pair, copy, (2, 1, 1))


def test_iso_with_modulus_identity_copy():
    pair = build_boxes(ROW, w=1)
    assert check_isomorphism(pair.N, pair.N, iso_with_modulus(pair, pair.N, [3]))


# -- S_omega and composites -----------------------------------------------------------

def test_s_omega_components():
    so = build_s_omega(2, 2)
    assert so.ranks == (1, 1, 2, 2)
    hard = build_s_omega(2, 2, seed=5)
    assert sorted(hard.structure.roots) == ["c0", "c1", "c2", "c3"]
    o = RankOracle()
    calls = []
    m = match_s_omega(so, hard.structure, 2, o, calls)
    assert len(m) == so.structure.size
    assert len(calls) == 4 and all(c >= 1 for c in calls)


def test_composite_r_partition_and_iso():
    d = CeSetSpec({1: 3}, horizon=4, index_cap=3)
    a = monotone_from_ce(d, 2)
    pair = build_boxes(a, w=1)
    easy = build_composite(a, "easy", 2, 1, 0, pair)
    hard = build_composite(a, "hard", 2, 1, 9, pair)
    assert easy.structure.unary[R_PART] == set(easy.r_part)
    assert set(easy.core).isdisjoint(easy.structure.unary[R_PART])
    g = composite_iso(easy, hard, self_modulus(d), 2, RankOracle())
    assert check_isomorphism(easy.structure, hard.structure, g)
    core = restrict_to_core(g, easy, hard)
    assert check_isomorphism(pair.M, pair.N, core)


def test_end_to_end_examples():
    assert end_to_end(CeSetSpec({}, 3, 3))["recovered"] == []
    rep = end_to_end(CeSetSpec({3: 5}, 6, 4), level_cap=2, w=1, n_max=2)
    assert rep["ok"] and rep["recovered"] == [3]


def test_end_to_end_reports_stage():
    # a level policy outside 0..M breaks the approximation step
    rep = end_to_end(CeSetSpec({0: 1}, 2, 1), level_cap=1, level_assignment=lambda n, s: 5)
    assert not rep["ok"] and rep["stage"] == "approximation"


@pytest.mark.parametrize("seed", range(10))
def test_end_to_end_random(seed):
    d = CeSetSpec.random(random.Random(seed), 5, 6)
    rep = end_to_end(d, level_cap=2, w=1, n_max=2, seed=seed)
    assert rep["ok"], rep
    assert rep["recovered"] == sorted(d.members)


# -- primality --------------------------------------------------------------------------

def test_primality_warmup():
    assert primality_report(build_warmup(CeSetSpec({0: 1, 2: 3}, 3, 3)), tuple_budget=10).ok


def test_primality_boxes_small():
    a = MonotoneApprox([[0, 1, 2], [0, 0, 1]], [[1, 2, 1], [0, 0, 2]], 2)
    r = primality_report(build_boxes(a, w=1, tail=2), tuple_budget=15)
    assert r.ok, r.mismatches
    assert r.checked > 15


def test_spine_formula_picks_all_a_tail():
    from catwork.coders.primality import _BoxSort
    from catwork.logic import satisfiers

    pair = build_boxes(ROW, w=1)
    sub = extract_sort(pair.N, sort_tag(0))
    bs = _BoxSort(sub, pair.levels, RankOracle())
    spine = bs.spine
    tail = [c for c in spine if bs.least_e[c] is None]
    assert len(tail) == 3
    got = satisfiers(bs.spine_formula(tail[0], "v"), sub, ["v"])
    assert got == {(c,) for c in tail}
    assert SPINE in sub.unary
