"""Invariant suites behind ``catwork verify``.

Each suite yields :class:`CheckResult` records.  A check passes, fails with
a counterexample, or is skipped when its search would exceed the caps.
Structures come either from a fresh build or from loaded build artifacts,
so a tampered artifact shows up as a failed invariant.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

from catwork.baf import A, E, RankOracle, TruncationParams, build_tree, classify
from catwork.coders.boxes import (
    BoxPair,
    achievable_dominators,
    boxes_canonical_iso,
    build_boxes,
    extract_dominator,
    iso_with_modulus,
    threshold_profile,
)
from catwork.coders.composite import (
    build_composite,
    composite_iso,
    restrict_to_core,
)
from catwork.coders.primality import primality_report
from catwork.coders.warmup import (
    WarmupPair,
    achievable_a0_images,
    build_warmup,
    decode_from_warmup_iso,
    sort_tag,
    warmup_canonical_iso,
    warmup_iso_with_D,
)
from catwork.effective import dominates, modulus_decode, monotone_from_ce, self_modulus
from catwork.errors import (
    CapsError,
    CatworkError,
    ClaimViolation,
    CopyMismatchError,
    SearchCapExceeded,
)
from catwork.logic.corpus import formula_corpus
from catwork.logic.ef import ef_equivalent
from catwork.logic.evaluate import eval_via_bounded_substructure, evaluate
from catwork.logic.formulas import quantifier_rank
from catwork.logic.relativize import phi_n
from catwork.scenario import Scenario
from catwork.search import check_isomorphism
from catwork.structures import FiniteStructure, extract_sort, random_structure, scramble

SUITES = ("warmup", "boxes", "composite", "primality", "logic")

# descriptive anchors: what each check establishes
ANCHORS = {
    "warmup.canonical_iso": "warm-up coding: the shift map is an isomorphism M -> N",
    "warmup.decode": "warm-up coding: any isomorphism M -> N decodes D from the image of a_0",
    "warmup.every_iso_decodes": "warm-up coding: every achievable image of a_0 decodes D",
    "warmup.iso_from_D": "warm-up coding: D computes an isomorphism onto a scrambled copy",
    "warmup.bounded_decidability": "warm-up coding: sentences are decided on a bounded substructure",
    "boxes.threshold_profile": "box coding: A below and E from the threshold, thresholds nondecreasing, all-A tail",
    "boxes.canonical_iso": "box coding: the canonical map is an isomorphism M -> N",
    "boxes.dominator": "box coding: the canonical isomorphism yields a dominator of f",
    "boxes.every_iso_dominates": "box coding: every isomorphism M -> N computes a dominator of f",
    "boxes.iso_with_modulus": "box coding: f plus the rank oracle computes an isomorphism onto a copy",
    "boxes.wrong_modulus_rejected": "box coding: a wrong modulus is detected, not silently used",
    "composite.isomorphism": "composite structure: f plus the rank oracle computes an isomorphism easy -> hard",
    "composite.decode": "composite structure: the isomorphism restricted to the core decodes D",
    "composite.oracle_per_component": "composite structure: the scrambled part needs the rank oracle per component",
    "primality.warmup": "warm-up coding: orbit formulas isolate every sampled tuple",
    "primality.boxes": "box coding: orbit formulas isolate every sampled tuple",
    "logic.separation": "back-and-forth trees: phi_n holds in E_n and fails in A_n",
    "logic.truncation_stability": "back-and-forth trees: verdicts are stable from width w to w+1",
    "logic.ef_consistency": "games: rank-k game equivalence implies agreement on rank-k sentences",
}


@dataclass
class CheckResult:
    id: str
    suite: str
    status: str  # "pass", "fail" or "skipped"
    detail: dict = field(default_factory=dict)
    witness: object = None

    @property
    def anchor(self) -> str:
        return ANCHORS[self.id]

    def to_dict(self) -> dict:
        out = {"id": self.id, "suite": self.suite, "anchor": self.anchor, "status": self.status, "detail": self.detail}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class Built:
    """Everything a scenario builds; loaded artifacts replace the structures."""

    scenario: Scenario
    warmup: WarmupPair | None = None
    boxes: BoxPair | None = None
    composite: tuple | None = None  # (easy, hard, approx)


def build_all(sc: Scenario) -> Built:
    c = sc.caps
    out = Built(sc)
    if sc.warmup is not None:
        out.warmup = build_warmup(sc.warmup)
    if sc.boxes is not None:
        out.boxes = build_boxes(sc.boxes, w=c.w, tail=c.tail)
    if sc.composite is not None:
        a = monotone_from_ce(sc.composite, c.M, seed=sc.seed)
        pair = build_boxes(a, w=c.w, tail=c.tail)
        easy = build_composite(a, "easy", c.N_max, c.w, sc.seed, pair)
        hard = build_composite(a, "hard", c.N_max, c.w, sc.seed, pair)
        out.composite = (easy, hard, a)
    return out


def artifacts_of(b: Built) -> dict[str, FiniteStructure]:
    """Artifact name -> structure, in a fixed order."""
    out = {}
    if b.warmup is not None:
        out["warmup.M"], out["warmup.N"] = b.warmup.M, b.warmup.N
    if b.boxes is not None:
        out["boxes.M"], out["boxes.N"] = b.boxes.M, b.boxes.N
    if b.composite is not None:
        out["composite.easy"], out["composite.hard"] = b.composite[0].structure, b.composite[1].structure
    return out


def with_artifacts(b: Built, loaded: dict[str, FiniteStructure]) -> Built:
    """Swap loaded structures in for the freshly built ones."""
    out = replace(b)
    if b.warmup is not None:
        out.warmup = replace(b.warmup, M=loaded.get("warmup.M", b.warmup.M), N=loaded.get("warmup.N", b.warmup.N))
    if b.boxes is not None:
        out.boxes = replace(b.boxes, M=loaded.get("boxes.M", b.boxes.M), N=loaded.get("boxes.N", b.boxes.N))
    if b.composite is not None:
        easy, hard, a = b.composite
        easy = replace(easy, structure=loaded.get("composite.easy", easy.structure))
        hard = replace(hard, structure=loaded.get("composite.hard", hard.structure))
        out.composite = (easy, hard, a)
    return out


def _run(check_id: str, fn: Callable[[], tuple[bool, dict]]) -> CheckResult:
    suite = check_id.split(".")[0]
    try:
        ok, detail = fn()
    except (SearchCapExceeded, CapsError) as exc:
        return CheckResult(check_id, suite, "skipped", {"reason": str(exc)})
    except (ClaimViolation, CopyMismatchError) as exc:
        return CheckResult(check_id, suite, "fail", {"error": f"{type(exc).__name__}: {exc}"}, _jsonable(exc.witness))
    except (CatworkError, ValueError) as exc:
        # a malformed structure breaks the invariant as surely as a wrong one
        return CheckResult(check_id, suite, "fail", {"error": f"{type(exc).__name__}: {exc}"})
    witness = detail.pop("witness", None)
    if ok:
        witness = None
    return CheckResult(check_id, suite, "pass" if ok else "fail", detail, _jsonable(witness))


def _jsonable(x):
    if x is None or isinstance(x, (int, str, bool, float)):
        return x
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in x]
    return repr(x)


def _first_mismatch(g, s_left, s_right):
    """First (relation, tuple) that ``g`` fails to preserve, for witnesses."""
    m = g.mapping
    if len(m) != s_left.size:
        return {"reason": "map is not total"}
    for k, v in s_left.unary.items():
        for x in s_left.universe:
            if (x in v) != (m[x] in s_right.unary.get(k, ())):
                return {"relation": k, "element": x, "image": m[x]}
    for k, v in s_left.binary.items():
        img = {(m[a], m[b_]) for a, b_ in v}
        diff = img ^ set(s_right.binary.get(k, ()))
        if diff:
            return {"relation": k, "pair": sorted(diff)[0]}
    return {"reason": "relation sets differ"}


def _iso_check(g, left, right) -> tuple[bool, dict]:
    if check_isomorphism(left, right, g):
        return True, {}
    return False, {"witness": _first_mismatch(g, left, right)}


# --- suites --------------------------------------------------------------------

def warmup_suite(b: Built) -> Iterator[CheckResult]:
    pair, sc = b.warmup, b.scenario
    d = sc.warmup
    if pair is None:
        return
    g = warmup_canonical_iso(pair)
    yield _run("warmup.canonical_iso", lambda: _iso_check(g, pair.M, pair.N))

    def decode():
        got = decode_from_warmup_iso(g, pair)
        return got == d.members, {"decoded": sorted(got), "expected": sorted(d.members),
                                  "witness": sorted(got ^ d.members)}

    yield _run("warmup.decode", decode)

    def every_iso():
        seen = {}
        for n in range(d.index_cap):
            images = achievable_a0_images(pair, n, sc.caps.effective_brute_cap())
            stages = [pair.locate(x)[1] for x in images]
            seen[str(n)] = stages
            if not images:
                return False, {"witness": {"sort": n, "reason": "no isomorphism of this sort"}}
            for s in stages:
                if d.at_stage(n, s) != (n in d.members):
                    return False, {"witness": {"sort": n, "stage": s, "in_D": n in d.members}}
        return True, {"a0_image_stages": seen}

    yield _run("warmup.every_iso_decodes", every_iso)

    def from_d():
        copy, _ = scramble(pair.N, sc.seed)
        return _iso_check(warmup_iso_with_D(pair, copy, d), pair.M, copy)

    yield _run("warmup.iso_from_D", from_d)

    def bounded():
        checked = 0
        for side, s in (("M", pair.M), ("N", pair.N)):
            for n in range(d.index_cap):
                sub = extract_sort(s, sort_tag(n))
                used = [k for k, v in sub.unary.items() if v]
                for phi in formula_corpus(used, [], 2, [sub], combine_limit=12):
                    checked += 1
                    if evaluate(phi, sub) != eval_via_bounded_substructure(phi, sub):
                        return False, {"witness": {"side": side, "sort": n, "formula": str(phi)}}
        return True, {"sentences": checked}

    yield _run("warmup.bounded_decidability", bounded)


def boxes_suite(b: Built) -> Iterator[CheckResult]:
    pair = b.boxes
    if pair is None:
        return
    sc = b.scenario
    oracle = RankOracle()
    f = pair.approx.limits()

    def profile():
        p = threshold_profile(pair, oracle)
        return True, p.to_dict()

    yield _run("boxes.threshold_profile", profile)
    holder = {}

    def canonical():
        holder["g"] = g = boxes_canonical_iso(pair, oracle)
        return _iso_check(g, pair.M, pair.N)

    yield _run("boxes.canonical_iso", canonical)

    def dominator():
        if "g" not in holder:
            raise ClaimViolation("no canonical isomorphism to read from")
        ghat = extract_dominator(holder["g"], pair)
        ok, bad = dominates(ghat, f)
        return ok, {"dominator": list(ghat), "f": list(f), "witness": bad}

    yield _run("boxes.dominator", dominator)

    def every_iso():
        out = {}
        for n in range(pair.approx.index_cap):
            vals = achievable_dominators(pair, n, sc.caps.effective_brute_cap())
            out[str(n)] = vals
            low = [v for v in vals if v < f[n]]
            if not vals or low:
                return False, {"witness": {"sort": n, "f": f[n], "values": vals}}
        return True, {"achievable": out, "f": list(f)}

    yield _run("boxes.every_iso_dominates", every_iso)

    def with_modulus():
        copy, _ = scramble(pair.N, sc.seed)
        return _iso_check(iso_with_modulus(pair, copy, f, oracle), pair.N, copy)

    yield _run("boxes.iso_with_modulus", with_modulus)

    def wrong_f():
        copy, _ = scramble(pair.N, sc.seed)
        bad = list(f)
        bad[0] += 1
        try:
            iso_with_modulus(pair, copy, bad, oracle)
        except CopyMismatchError as exc:
            return True, {"rejected_with": str(exc)}
        return False, {"witness": {"modulus": bad}}

    yield _run("boxes.wrong_modulus_rejected", wrong_f)


def composite_suite(b: Built) -> Iterator[CheckResult]:
    if b.composite is None:
        return
    sc = b.scenario
    easy, hard, _ = b.composite
    d = sc.composite
    f = self_modulus(d)
    oracle = RankOracle()
    calls: list[int] = []
    holder = {}

    def iso():
        holder["g"] = g = composite_iso(easy, hard, f, sc.caps.N_max, oracle, calls)
        return _iso_check(g, easy.structure, hard.structure)

    yield _run("composite.isomorphism", iso)

    def decode():
        if "g" not in holder:
            raise ClaimViolation("no composite isomorphism to decode from")
        ghat = extract_dominator(restrict_to_core(holder["g"], easy, hard), easy.pair)
        got = modulus_decode(ghat, d)
        return got == d.members, {"decoded": sorted(got), "expected": sorted(d.members),
                                  "witness": sorted(got ^ d.members)}

    yield _run("composite.decode", decode)

    def per_component():
        want = sc.caps.w * sc.caps.N_max
        ok = len(calls) == want and all(c >= 1 for c in calls)
        return ok, {"component_calls": calls, "components": want, "witness": calls}

    yield _run("composite.oracle_per_component", per_component)


def primality_suite(b: Built) -> Iterator[CheckResult]:
    sc = b.scenario
    cap = sc.caps.effective_brute_cap()
    for key, pair in (("primality.warmup", b.warmup), ("primality.boxes", b.boxes)):
        if pair is None:
            continue

        def run(pair=pair):
            r = primality_report(pair, sc.tuple_budget, "N", sc.seed, cap)
            return r.ok, {"checked": r.checked, "witness": r.mismatches[:3]}

        yield _run(key, run)


def logic_suite(b: Built) -> Iterator[CheckResult]:
    sc = b.scenario
    n_top = min(sc.caps.N_max + 1, 4)

    def separation():
        rows = []
        for n in range(1, n_top + 1):
            for w in range(1, sc.caps.w + 1):
                t = TruncationParams(w=w, n_max=n)
                e = evaluate(phi_n(n), build_tree(E(n), t).to_structure())
                a = evaluate(phi_n(n), build_tree(A(n), t).to_structure())
                rows.append([n, w, e, a])
                if not e or a:
                    return False, {"witness": {"n": n, "w": w, "E": e, "A": a}}
        return True, {"checked": len(rows)}

    yield _run("logic.separation", separation)

    def stability():
        checked = 0
        w = sc.caps.w
        for n in range(1, n_top + 1):
            for fam in (A, E):
                v0 = classify(build_tree(fam(n), TruncationParams(w=w, n_max=n)), n)
                v1 = classify(build_tree(fam(n), TruncationParams(w=w + 1, n_max=n)), n)
                checked += 1
                if v0 != v1:
                    return False, {"witness": {"tree": str(fam(n)), "w": w, "verdicts": [v0, v1]}}
        return True, {"checked": checked}

    yield _run("logic.truncation_stability", stability)

    def ef():
        rng = random.Random(sc.seed)
        pairs = random_pairs(rng, 12)
        corpus = formula_corpus(["P"], ["E"], 2, [x for p in pairs for x in p], combine_limit=10)
        agree = 0
        for a, bb in pairs:
            for k in (1, 2):
                if not ef_equivalent(a, bb, k):
                    continue
                agree += 1
                for phi in corpus:
                    if quantifier_rank(phi) <= k and evaluate(phi, a) != evaluate(phi, bb):
                        return False, {"witness": {"k": k, "formula": str(phi), "a": a.to_dict(), "b": bb.to_dict()}}
        return True, {"pairs": len(pairs), "equivalent_cases": agree, "corpus": len(corpus)}

    yield _run("logic.ef_consistency", ef)


def random_pairs(rng: random.Random, count: int, max_size: int = 4) -> list[tuple[FiniteStructure, FiniteStructure]]:
    """A mix of isomorphic, near-identical and unrelated small structure pairs."""
    out = []
    for i in range(count):
        a = random_structure(rng, rng.randint(1, max_size))
        mode = i % 3
        if mode == 0:
            b, _ = scramble(a, rng.randrange(1 << 30))
        elif mode == 1:
            x = rng.randrange(a.size)
            p = set(a.unary["P"]) ^ {x}
            b = a.with_relations(unary={"P": p})
        else:
            b = random_structure(rng, rng.randint(1, max_size))
        out.append((a, b))
    return out


SUITE_FUNCS = {
    "warmup": warmup_suite,
    "boxes": boxes_suite,
    "composite": composite_suite,
    "primality": primality_suite,
    "logic": logic_suite,
}


def run_suites(b: Built, names) -> list[CheckResult]:
    out = []
    for name in names:
        out.extend(SUITE_FUNCS[name](b))
    return out
