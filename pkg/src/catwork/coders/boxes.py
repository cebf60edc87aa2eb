"""Box structures coding a limitwise monotonic function.

Sort n has spine elements (unary ``S``) a_0, a_1, ... on the M side and
b_0, b_1, ... on the N side.  Each spine element owns, for every level
m = 1..M, a box: a back-and-forth tree whose nodes are exactly the ``y``
with ``T_m(spine, y)``.  Inside boxes ``Edge`` is the tree order and
``Root`` marks box roots.

* M_{0,m} is A_m; for i >= 1, M_{i,m} is E_m iff some stage has a value
  >= i visible at level m.
* N_{i,m} is E_m iff some stage has a value > i visible at level m.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from catwork.baf import A, E, RankOracle, TruncationParams, build_tree, iso_baf
from catwork.effective import MonotoneApprox, exceeds_at_level
from catwork.errors import (
    CapsError,
    CatworkError,
    ClaimViolation,
    CopyMismatchError,
)
from catwork.logic.relativize import box_relation
from catwork.search import brute_cap, check_isomorphism, extends_to_isomorphism
from catwork.structures import EDGE, ROOT, FiniteStructure, IsoWitness, Tree, extract_sort
from catwork.coders.warmup import sort_tag

SPINE = "S"


@dataclass(frozen=True)
class BoxLayout:
    """Where things live in one side: spine ids per sort and node ids per box.

    ``boxes[(n, i, m)]`` lists the box's node ids in tree order (root first).
    """

    spine: tuple[tuple[int, ...], ...]
    boxes: Mapping[tuple[int, int, int], tuple[int, ...]] = field(repr=False)

    def owner_of(self) -> dict[int, tuple[int, int, int]]:
        return {x: key for key, nodes in self.boxes.items() for x in nodes}


@dataclass(frozen=True)
class BoxPair:
    M: FiniteStructure
    N: FiniteStructure
    approx: MonotoneApprox
    w: int
    spine_lengths: tuple[int, ...]
    layout_M: BoxLayout = field(repr=False)
    layout_N: BoxLayout = field(repr=False)

    @property
    def levels(self) -> range:
        return range(1, self.approx.level_cap + 1)

    def box_tree(self, side: str, n: int, i: int, m: int) -> Tree:
        s, lay = (self.M, self.layout_M) if side == "M" else (self.N, self.layout_N)
        return Tree.from_structure(s, lay.boxes[(n, i, m)])

    def provenance(self) -> dict:
        return {
            "approximation": self.approx.to_dict(),
            "w": self.w,
            "spine_lengths": list(self.spine_lengths),
        }


def box_kind(a: MonotoneApprox, side: str, n: int, i: int, m: int) -> str:
    if side == "M":
        if i == 0:
            return "A"
        return "E" if exceeds_at_level(a, n, i, m, strict=False) else "A"
    return "E" if exceeds_at_level(a, n, i, m, strict=True) else "A"


def _vocabulary(a: MonotoneApprox):
    unary = {sort_tag(n): [] for n in range(a.index_cap)}
    unary.update({SPINE: [], ROOT: []})
    binary = {EDGE: [], **{box_relation(m): [] for m in range(1, a.level_cap + 1)}}
    return unary, binary


def _build_side(a: MonotoneApprox, side: str, w: int, lengths: Sequence[int]):
    unary, binary = _vocabulary(a)
    t = TruncationParams(w=w, n_max=max(a.level_cap, 1))
    trees = {}
    spine, boxes = [], {}
    nxt = 0
    for n in range(a.index_cap):
        ids = list(range(nxt, nxt + lengths[n]))
        nxt += lengths[n]
        spine.append(tuple(ids))
        unary[SPINE].extend(ids)
        unary[sort_tag(n)].extend(ids)
        for i, owner in enumerate(ids):
            for m in range(1, a.level_cap + 1):
                kind = box_kind(a, side, n, i, m)
                if (kind, m) not in trees:
                    trees[(kind, m)] = build_tree((A if kind == "A" else E)(m), t)
                tree = trees[(kind, m)]
                nodes = tuple(range(nxt, nxt + len(tree)))
                nxt += len(tree)
                boxes[(n, i, m)] = nodes
                unary[sort_tag(n)].extend(nodes)
                unary[ROOT].append(nodes[tree.root])
                binary[box_relation(m)].extend((owner, y) for y in nodes)
                binary[EDGE].extend(
                    (nodes[p], nodes[v]) for v, p in enumerate(tree.parent) if p is not None
                )
    return FiniteStructure(nxt, unary, binary), BoxLayout(tuple(spine), boxes)


def build_boxes(
    a: MonotoneApprox, w: int = 2, tail: int = 3, spine_lengths: int | Sequence[int] | None = None
) -> BoxPair:
    """Both box structures for ``a``.

    Sort n keeps ``f(n) + tail`` spine elements unless ``spine_lengths`` says
    otherwise; it must exceed f(n) so the all-A tail is present.
    """
    f = a.limits()
    if spine_lengths is None:
        lengths = tuple(v + tail for v in f)
    elif isinstance(spine_lengths, int):
        lengths = (spine_lengths,) * a.index_cap
    else:
        lengths = tuple(spine_lengths)
    if len(lengths) != a.index_cap:
        raise CapsError("one spine length per sort")
    for n, (length, v) in enumerate(zip(lengths, f)):
        if length <= v:
            raise CapsError(
                f"spine too short to expose the all-A tail: sort {n} has I_max={length} <= f(n)={v}"
            )
    M, lay_m = _build_side(a, "M", w, lengths)
    N, lay_n = _build_side(a, "N", w, lengths)
    return BoxPair(M, N, a, w, lengths, lay_m, lay_n)


@dataclass(frozen=True)
class SortProfile:
    f: int
    thresholds: tuple[int, ...]  # m_j for j < f(n)
    tail: int  # spine elements with only A-boxes, on the N side


@dataclass(frozen=True)
class ThresholdProfile:
    sorts: tuple[SortProfile, ...]

    def to_dict(self) -> dict:
        return {"sorts": [{"f": p.f, "thresholds": list(p.thresholds), "tail": p.tail} for p in self.sorts]}


def _kinds(pair: BoxPair, side: str, n: int, oracle: RankOracle) -> list[list[str]]:
    return [
        [oracle.classify(pair.box_tree(side, n, i, m), m) for m in pair.levels]
        for i in range(pair.spine_lengths[n])
    ]


def _split_level(row: Sequence[str], levels: range) -> int | None:
    """Least level where the row turns E, if the row is A...A E...E."""
    first = next((lv for lv, k in zip(levels, row) if k == "E"), None)
    if first is None:
        return None
    if any(k != ("E" if lv >= first else "A") for lv, k in zip(levels, row)):
        return -1
    return first


def threshold_profile(pair: BoxPair, oracle: RankOracle | None = None) -> ThresholdProfile:
    """Classify every box and verify the threshold split sort by sort.

    For j < f(n) the rows M_{j+1,.} and N_{j,.} must be A below one common
    level and E from it on; for j >= f(n) they must be all A, as must
    M_{0,.}; and the thresholds must be nondecreasing in j.
    """
    oracle = oracle or RankOracle()
    out = []
    levels = pair.levels
    for n in range(pair.approx.index_cap):
        f = pair.approx.limit(n)
        km, kn = _kinds(pair, "M", n, oracle), _kinds(pair, "N", n, oracle)
        if any(k != "A" for k in km[0]):
            raise ClaimViolation(f"sort {n}: M_0 has an E box", witness={"sort": n, "row": km[0]})
        thresholds = []
        for j in range(pair.spine_lengths[n]):
            row_n = kn[j]
            row_m = km[j + 1] if j + 1 < pair.spine_lengths[n] else None
            if row_m is not None and row_m != row_n:
                raise ClaimViolation(
                    f"sort {n}: M_{j + 1} and N_{j} differ", witness={"sort": n, "j": j, "M": row_m, "N": row_n}
                )
            beta = _split_level(row_n, levels)
            if j < f:
                if beta is None or beta < 0:
                    raise ClaimViolation(
                        f"sort {n}: row {j} is not A-below/E-at-and-above", witness={"sort": n, "j": j, "N": row_n}
                    )
                thresholds.append(beta)
            elif beta is not None:
                raise ClaimViolation(f"sort {n}: tail row {j} has an E box", witness={"sort": n, "j": j, "N": row_n})
        if any(x > y for x, y in zip(thresholds, thresholds[1:])):
            raise ClaimViolation(f"sort {n}: thresholds {thresholds} decrease", witness={"sort": n})
        out.append(SortProfile(f, tuple(thresholds), pair.spine_lengths[n] - f))
    return ThresholdProfile(tuple(out))


def _box_maps(pair, left_side, right_side, n, i, j, mapping, oracle):
    for m in pair.levels:
        lt, rt = pair.box_tree(left_side, n, i, m), pair.box_tree(right_side, n, j, m)
        w = iso_baf(lt, rt, m, oracle)
        lnodes = (pair.layout_M if left_side == "M" else pair.layout_N).boxes[(n, i, m)]
        rnodes = (pair.layout_M if right_side == "M" else pair.layout_N).boxes[(n, j, m)]
        for u, v in w.pairs:
            mapping[lnodes[u]] = rnodes[v]


def boxes_canonical_iso(pair: BoxPair, oracle: RankOracle | None = None) -> IsoWitness:
    """a_0 -> b_{f(n)}, a_i -> b_{i-1} for 0 < i <= f(n), a_i -> b_i beyond;
    boxes matched by the back-and-forth isomorphism."""
    oracle = oracle or RankOracle()
    mapping = {}
    for n in range(pair.approx.index_cap):
        f = pair.approx.limit(n)
        for i in range(pair.spine_lengths[n]):
            j = f if i == 0 else i - 1 if i <= f else i
            mapping[pair.layout_M.spine[n][i]] = pair.layout_N.spine[n][j]
            _box_maps(pair, "M", "N", n, i, j, mapping, oracle)
    return IsoWitness.from_mapping(mapping, pair.M.size)


def extract_dominator(g: IsoWitness, pair: BoxPair) -> tuple[int, ...]:
    """ĝ(n) with g(a_0) = b_{ĝ(n)}, read sort by sort."""
    if not check_isomorphism(pair.M, pair.N, g):
        raise ClaimViolation("witness invalid: not an isomorphism M -> N")
    out = []
    for n in range(pair.approx.index_cap):
        img = g(pair.layout_M.spine[n][0])
        spine = pair.layout_N.spine[n]
        if img not in spine:
            raise ClaimViolation(f"witness invalid: a_0 of sort {n} maps off the spine", witness=n)
        out.append(spine.index(img))
    return tuple(out)


def achievable_dominators(pair: BoxPair, n: int, cap: int | None = None) -> list[int]:
    """Every j such that some isomorphism M -> N sends a_0 of sort n to b_j.

    Isomorphisms preserve the sort tags, so they are products of sort
    isomorphisms and this lists every value ĝ(n) can take.
    """
    tag = sort_tag(n)
    left, right = extract_sort(pair.M, tag), extract_sort(pair.N, tag)
    cap = max(brute_cap(cap), left.size + right.size)
    a0 = sorted(left.unary[SPINE])[0]
    spine = sorted(right.unary[SPINE])
    return [j for j, b in enumerate(spine) if extends_to_isomorphism(left, right, [(a0, b)], cap=cap) is not None]


# --- the f-plus-oracle isomorphism procedure --------------------------------

@dataclass
class _CopySort:
    spine: list[int]
    boxes: dict  # (spine element, m) -> sorted node ids


def _read_copy(copy: FiniteStructure, n: int, levels: range) -> _CopySort:
    tag = sort_tag(n)
    if tag not in copy.unary or SPINE not in copy.unary:
        raise CopyMismatchError(f"copy malformed: missing {tag} or {SPINE}")
    spine = sorted(copy.unary[tag] & copy.unary[SPINE])
    succ = {m: copy.successors.get(box_relation(m), {}) for m in levels}
    boxes = {(c, m): sorted(succ[m].get(c, ())) for c in spine for m in levels}
    return _CopySort(spine, boxes)


def _least_e_level(tree_of, levels: range, oracle: RankOracle) -> int | None:
    for m in levels:
        if oracle.classify(tree_of(m), m) == "E":
            return m
    return None


def iso_with_modulus(
    pair: BoxPair, copy: FiniteStructure, f, oracle: RankOracle | None = None
) -> IsoWitness:
    """Isomorphism from the N side onto ``copy`` computed from f and the
    rank oracle.

    Per sort: (1) scan the copy's spine for elements owning an E box and
    insist on exactly f(n) of them; (2) compute least E levels on both sides
    and match equal multisets; (3) fill in boxes by the back-and-forth
    isomorphism.
    """
    oracle = oracle or RankOracle()
    fv = f if callable(f) else (lambda n: f[n])
    levels = pair.levels
    mapping = {}
    for n in range(pair.approx.index_cap):
        fn = fv(n)
        cs = _read_copy(copy, n, levels)
        std_spine = pair.layout_N.spine[n]
        if len(cs.spine) != len(std_spine):
            raise CopyMismatchError(
                f"copy inconsistent: sort {n} spine has {len(cs.spine)} elements, expected {len(std_spine)}",
                witness=n,
            )

        def copy_tree(c, m):
            return Tree.from_structure(copy, cs.boxes[(c, m)])

        # phase 1: owners of an E box in the copy
        gamma = {}
        for c in cs.spine:
            lv = _least_e_level(lambda m, c=c: copy_tree(c, m), levels, oracle)
            if lv is not None:
                gamma[c] = lv
        if len(gamma) != fn:
            raise CopyMismatchError(
                f"copy inconsistent with modulus: sort {n} has {len(gamma)} E-owning spine elements, f(n)={fn}",
                witness={"sort": n, "found": len(gamma), "f": fn},
            )
        # phase 2: least E levels on the standard side, matched as multisets
        beta = {}
        for k in range(fn):
            lv = _least_e_level(lambda m, k=k: pair.box_tree("N", n, k, m), levels, oracle)
            if lv is None:
                raise ClaimViolation(f"sort {n}: b_{k} owns no E box although k < f(n)", witness=n)
            beta[k] = lv
        if sorted(beta.values()) != sorted(gamma.values()):
            raise CopyMismatchError(
                f"copy inconsistent: least E levels {sorted(gamma.values())} vs {sorted(beta.values())}",
                witness=n,
            )
        std_order = sorted(range(fn), key=lambda k: (beta[k], k)) + list(range(fn, len(std_spine)))
        copy_order = sorted(gamma, key=lambda c: (gamma[c], c)) + [c for c in cs.spine if c not in gamma]
        # phase 3: boxes
        for k, c in zip(std_order, copy_order):
            mapping[std_spine[k]] = c
            for m in levels:
                try:
                    w = iso_baf(pair.box_tree("N", n, k, m), copy_tree(c, m), m, oracle)
                except CatworkError as exc:
                    raise CopyMismatchError(f"box ({n},{k},{m}) does not match: {exc}", witness=n) from None
                std_nodes, copy_nodes = pair.layout_N.boxes[(n, k, m)], cs.boxes[(c, m)]
                for u, v in w.pairs:
                    mapping[std_nodes[u]] = copy_nodes[v]
    if len(mapping) != pair.N.size or len(set(mapping.values())) != copy.size:
        raise CopyMismatchError("copy has elements outside the sorts, spines and boxes")
    return IsoWitness.from_mapping(mapping, pair.N.size)
