"""Acceptance criteria, one test each, at their stated tolerances and budgets.

Run under pytest (a summary line per criterion is printed at the end) or
directly with ``python tests/test_acceptance.py``.
"""

import itertools
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from conftest import naive_orbit  # noqa: E402

from catwork.baf import (  # noqa: E402
    INF,
    A,
    E,
    L,
    SigmaPredicateSpec,
    TruncationParams,
    build_tree,
    c_sequence,
    classify,
    classify_limit,
    isolating_formula,
)
from catwork.coders import (  # noqa: E402
    achievable_a0_images,
    build_boxes,
    build_warmup,
    decode_from_warmup_iso,
    end_to_end,
    extract_dominator,
    primality_report,
    sort_tag,
    threshold_profile,
    warmup_iso_with_D,
)
from catwork.effective import CeSetSpec, MonotoneApprox, exceeds_at_level  # noqa: E402
from catwork.logic import (  # noqa: E402
    ef_equivalent,
    eval_via_bounded_substructure,
    evaluate,
    formula_corpus,
    phi_n,
    quantifier_rank,
    satisfiers,
)
from catwork.scenario import default_scenario  # noqa: E402
from catwork.search import check_isomorphism, extends_to_isomorphism, find_isomorphisms  # noqa: E402
from catwork.structures import IsoWitness, extract_sort, scramble  # noqa: E402
from catwork.suites import random_pairs  # noqa: E402


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f}s, budget {self.seconds}s"


# 1 ----------------------------------------------------------------------------------

def test_criterion_1_separation():
    with Budget(10):
        for n in (1, 2, 3, 4):
            for w in (1, 2, 3):
                t = TruncationParams(w=w, n_max=n)
                assert evaluate(phi_n(n), build_tree(E(n), t).to_structure()) is True
                assert evaluate(phi_n(n), build_tree(A(n), t).to_structure()) is False


# 2 ----------------------------------------------------------------------------------

def _rank1(x, y):
    return (x + y) % 5 == 0


def _rank2(x, y1, y2):
    return (x * y1 + y2) % 4 != 1


def _rank3(x, y1, y2, y3):
    return (x + y1 * y2 + 2 * y3) % 7 in (0, 1)


def _direct(rank, matrix, x, cap=3):
    ys = range(cap)
    if rank == 1:
        return any(matrix(x, a) for a in ys)
    if rank == 2:
        return any(all(matrix(x, a, b) for b in ys) for a in ys)
    return any(all(any(matrix(x, a, b, c) for c in ys) for b in ys) for a in ys)


def test_criterion_2_c_x_fidelity():
    with Budget(30):
        for rank, matrix in ((1, _rank1), (2, _rank2), (3, _rank3)):
            spec = SigmaPredicateSpec(rank, matrix, domain_cap=20, witness_cap=3, name=f"r{rank}")
            truth = [_direct(rank, matrix, x) for x in range(20)]
            assert any(truth) and not all(truth), "predicate must split the domain"
            for x in range(20):
                got = classify(c_sequence(spec, x), rank)
                assert got == ("E" if truth[x] else "A"), (rank, x)


# 3 ----------------------------------------------------------------------------------

def test_criterion_3_isolation_equals_orbit():
    with Budget(120):
        checked = 0
        for n in (1, 2, 3):
            for w in (1, 2):
                for fam in (A, E):
                    tree = build_tree(fam(n), TruncationParams(w=w, n_max=n))
                    if len(tree) > 12:
                        continue
                    s = tree.to_structure()
                    for k in (1, 2):
                        for tup in itertools.product(range(len(tree)), repeat=k):
                            phi = isolating_formula(tree, tup, n)
                            assert satisfiers(phi, s, [f"t{i}" for i in range(k)]) == naive_orbit(s, tup)
                            checked += 1
        assert checked > 0
        sc = default_scenario()
        pair = build_boxes(sc.boxes, w=sc.caps.w, tail=sc.caps.tail)
        report = primality_report(pair, sc.tuple_budget, seed=sc.seed)
        assert report.ok, report.mismatches


# 4 ----------------------------------------------------------------------------------

def test_criterion_4_warmup_round_trip():
    rng = random.Random(4)
    with Budget(60):
        for trial in range(100):
            d = CeSetSpec.random(rng, rng.randint(1, 8), rng.randint(0, 12))
            pair = build_warmup(d)
            # every a_0 image any isomorphism can realise decodes correctly
            sort_isos = []
            for n in range(d.index_cap):
                images = achievable_a0_images(pair, n)
                assert images
                for b in images:
                    assert d.at_stage(n, pair.locate(b)[1]) == (n in d.members)
                # realise each image by a full sort isomorphism
                tag = sort_tag(n)
                left, right = extract_sort(pair.M, tag), extract_sort(pair.N, tag)
                sort_isos.append([
                    extends_to_isomorphism(left, right, [(0, b - pair.element(n, 0))], cap=10**4)
                    for b in images
                ])
            # glue sort isomorphisms into full ones and decode each
            for j in range(max(len(x) for x in sort_isos)):
                mapping = {}
                for n, isos in enumerate(sort_isos):
                    g = isos[j % len(isos)]
                    base = pair.element(n, 0)
                    mapping.update({base + a: base + b for a, b in g.pairs})
                g = IsoWitness.from_mapping(mapping, pair.M.size)
                assert decode_from_warmup_iso(g, pair) == d.members
            copy, _ = scramble(pair.N, trial)
            assert check_isomorphism(pair.M, copy, warmup_iso_with_D(pair, copy, d))
        # full enumeration on small sorts: every isomorphism, not only a_0 images
        for _ in range(20):
            d = CeSetSpec.random(rng, rng.randint(1, 4), rng.randint(0, 3))
            pair = build_warmup(d)
            for n in range(d.index_cap):
                tag = sort_tag(n)
                for g in find_isomorphisms(extract_sort(pair.M, tag), extract_sort(pair.N, tag), cap=40):
                    assert d.at_stage(n, g(0)) == (n in d.members)


# 5 ----------------------------------------------------------------------------------

def _expected_thresholds(a, n):
    levels = range(1, a.level_cap + 1)
    return tuple(
        next(m for m in levels if exceeds_at_level(a, n, j, m, strict=True))
        for j in range(a.limit(n))
    )


def test_criterion_5_threshold_structure():
    rng = random.Random(5)
    with Budget(60):
        for trial in range(100):
            M = rng.randint(1, 4)
            a = MonotoneApprox.random(rng, rng.randint(1, 4), rng.randint(1, 6), M, 3)
            pair = build_boxes(a, w=1 + trial % 2, tail=2)
            profile = threshold_profile(pair)
            for n, sp in enumerate(profile.sorts):
                assert sp.f == a.limit(n)
                assert sp.thresholds == _expected_thresholds(a, n)
                assert list(sp.thresholds) == sorted(sp.thresholds)
                assert sp.tail == 2


# 6 ----------------------------------------------------------------------------------

def test_criterion_6_domination():
    rng = random.Random(6)
    with Budget(60):
        witnesses = 0
        for trial in range(60):
            # w=2 with two levels and tail 2 reaches 2^18 isomorphisms; keep tail 1 there
            M, w = 1 + trial % 2, 1 + (trial // 2) % 2
            tail = 1 if (M, w) == (2, 2) else 1 + trial % 3 // 2
            a = MonotoneApprox.random(rng, 1, rng.randint(1, 4), M, 2)
            pair = build_boxes(a, w=w, tail=tail)
            isos = find_isomorphisms(pair.M, pair.N, cap=10**5)  # no limit: every isomorphism
            assert isos
            for g in isos:
                assert extract_dominator(g, pair)[0] >= a.limit(0)
            witnesses += len(isos)
        assert witnesses > 1000


# 7 ----------------------------------------------------------------------------------

def test_criterion_7_end_to_end():
    sc = default_scenario()
    c = sc.caps
    rng = random.Random(7)
    with Budget(300):
        for trial in range(100):
            d = CeSetSpec.random(rng, c.N, c.H)
            rep = end_to_end(d, level_cap=c.M, w=c.w, n_max=c.N_max, seed=trial)
            assert rep["ok"], rep
            assert rep["recovered"] == sorted(d.members)
            assert len(rep["component_calls"]) == c.w * c.N_max
            assert all(k >= 1 for k in rep["component_calls"])


# 8 ----------------------------------------------------------------------------------

def test_criterion_8_truncation_stability():
    with Budget(120):
        for n in (1, 2, 3, 4):
            for w in (1, 2):
                for fam in (A, E):
                    lo = build_tree(fam(n), TruncationParams(w=w, n_max=n))
                    hi = build_tree(fam(n), TruncationParams(w=w + 1, n_max=n))
                    assert classify(lo, n) == classify(hi, n)
                    assert evaluate(phi_n(n), lo.to_structure()) == evaluate(phi_n(n), hi.to_structure())
        for w in (1, 2):
            lo_t, hi_t = TruncationParams(w=w, I=3, n_max=4), TruncationParams(w=w + 1, I=3, n_max=4)
            for k in (0, 1, 2, 3, INF):
                assert classify_limit(build_tree(L(k), lo_t), lo_t) == classify_limit(build_tree(L(k), hi_t), hi_t)
        rng = random.Random(8)
        checked = 0
        for _ in range(4):
            d = CeSetSpec.random(rng, 4, rng.randint(8, 12))
            pair = build_warmup(d)
            for s in (pair.M, pair.N):
                for n in range(d.index_cap):
                    sub = extract_sort(s, sort_tag(n))
                    used = [k for k, v in sub.unary.items() if v]
                    for phi in formula_corpus(used, [], 3, [sub], combine_limit=10):
                        assert eval_via_bounded_substructure(phi, sub) == evaluate(phi, sub)
                        checked += 1
        assert checked > 0


# 9 ----------------------------------------------------------------------------------

def test_criterion_9_ef_consistency():
    rng = random.Random(9)
    with Budget(120):
        pairs = random_pairs(rng, 50)
        samples = [x for p in pairs for x in p]
        corpus = formula_corpus(["P"], ["E"], 3, samples, combine_limit=20)
        equivalent = 0
        for a, b in pairs:
            for k in (1, 2, 3):
                if not ef_equivalent(a, b, k):
                    continue
                equivalent += 1
                for phi in corpus:
                    if quantifier_rank(phi) <= k:
                        assert evaluate(phi, a) == evaluate(phi, b), (k, phi)
        assert equivalent > 0


CRITERIA = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]


if __name__ == "__main__":
    failed = 0
    for fn in sorted(CRITERIA, key=lambda f: int(f.__name__.split("_")[2])):
        label = fn.__name__.removeprefix("test_")
        t0 = time.perf_counter()
        try:
            fn()
            status = "PASS"
        except AssertionError as exc:
            status, failed = f"FAIL ({exc})", failed + 1
        print(f"{label}: {status}  [{time.perf_counter() - t0:.1f}s]", flush=True)
    sys.exit(1 if failed else 0)
