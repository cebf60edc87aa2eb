"""The warm-up coding of a c.e. set D into two copies M, N of one structure.

Sort n (tagged ``R_n``) has elements a_0, a_1, ... on the M side and
b_0, b_1, ... on the N side.  If n enters D at stage s then ``U_s(a_0)``
holds in M and ``U_s(b_s)`` holds in N; nothing else is in any ``U``.
Element ``a_i`` of sort n has id ``n * K + i`` where ``K`` is the number of
elements kept per sort.
"""

from __future__ import annotations

from dataclasses import dataclass

from catwork.effective import CeSetSpec
from catwork.errors import CapsError, ClaimViolation, CopyMismatchError
from catwork.search import brute_cap, check_isomorphism, extends_to_isomorphism
from catwork.structures import FiniteStructure, IsoWitness, extract_sort


def sort_tag(n: int) -> str:
    return f"R_{n}"


def stage_tag(s: int) -> str:
    return f"U_{s}"


@dataclass(frozen=True)
class WarmupPair:
    M: FiniteStructure
    N: FiniteStructure
    spec: CeSetSpec
    per_sort: int

    def element(self, n: int, i: int) -> int:
        return n * self.per_sort + i

    def locate(self, x: int) -> tuple[int, int]:
        """(sort, index) of element id ``x``."""
        return divmod(x, self.per_sort)

    def provenance(self) -> dict:
        return {"ce_set": self.spec.to_dict(), "per_sort": self.per_sort}


def build_warmup(d: CeSetSpec, per_sort: int | None = None) -> WarmupPair:
    """Both sides of the warm-up coding, ``per_sort`` elements per sort
    (default H + 2, so every b_s with s <= H exists plus one spare)."""
    K = d.horizon + 2 if per_sort is None else per_sort
    for n, s in d.entries.items():
        if s >= K:
            raise CapsError(f"per_sort={K} too small for entry {n}@{s}: b_{s} would not exist")
    unary_m = {sort_tag(n): [] for n in range(d.index_cap)}
    unary_m.update({stage_tag(s): [] for s in range(d.horizon + 1)})
    unary_n = {k: [] for k in unary_m}
    for n in range(d.index_cap):
        for i in range(K):
            unary_m[sort_tag(n)].append(n * K + i)
            unary_n[sort_tag(n)].append(n * K + i)
        if n in d.entries:
            s = d.entries[n]
            unary_m[stage_tag(s)].append(n * K)
            unary_n[stage_tag(s)].append(n * K + s)
    size = d.index_cap * K
    return WarmupPair(FiniteStructure(size, unary_m), FiniteStructure(size, unary_n), d, K)


def warmup_canonical_iso(pair: WarmupPair) -> IsoWitness:
    """Identity on sorts outside D; the shift a_0 -> b_s, a_i -> b_{i-1}
    (0 < i <= s) on a sort entering at stage s."""
    mapping = {}
    for n in range(pair.spec.index_cap):
        s = pair.spec.entries.get(n)
        for i in range(pair.per_sort):
            if s is None or i > s:
                j = i
            elif i == 0:
                j = s
            else:
                j = i - 1
            mapping[pair.element(n, i)] = pair.element(n, j)
    return IsoWitness.from_mapping(mapping, pair.M.size)


def decode_from_warmup_iso(g: IsoWitness, pair: WarmupPair) -> frozenset:
    """Read s off g(a_0) = b_s for each sort and keep n iff n is in D_s."""
    if not check_isomorphism(pair.M, pair.N, g):
        raise ClaimViolation("witness invalid: not an isomorphism M -> N")
    out = set()
    for n in range(pair.spec.index_cap):
        m, s = pair.locate(g(pair.element(n, 0)))
        if m != n:
            raise ClaimViolation(f"witness invalid: a_0 of sort {n} lands in sort {m}")
        if pair.spec.at_stage(n, s):
            out.add(n)
    return frozenset(out)


def warmup_iso_with_D(pair: WarmupPair, copy: FiniteStructure, d: CeSetSpec) -> IsoWitness:
    """Isomorphism from the M side to ``copy`` using only D and the copy.

    For n in D entering at s, a_0 goes to the copy's U_s element of sort n;
    every other a_i goes to the remaining sort elements in id order.
    """
    mapping = {}
    for n in range(d.index_cap):
        tag = sort_tag(n)
        if tag not in copy.unary:
            raise CopyMismatchError(f"copy malformed: no sort tag {tag}")
        cs = sorted(copy.unary[tag])
        if len(cs) != pair.per_sort:
            raise CopyMismatchError(f"copy malformed: sort {n} has {len(cs)} elements", witness=n)
        if n in d.entries:
            s = d.entries[n]
            hits = [c for c in cs if c in copy.unary.get(stage_tag(s), ())]
            if not hits:
                raise CopyMismatchError(f"copy malformed: no U_{s} element in sort {n}", witness=n)
            first = hits[0]
            rest = [c for c in cs if c != first]
            targets = [first] + rest
        else:
            targets = cs
        for i, c in enumerate(targets):
            mapping[pair.element(n, i)] = c
    return IsoWitness.from_mapping(mapping, pair.M.size)


def achievable_a0_images(pair: WarmupPair, n: int, cap: int | None = None) -> list[int]:
    """Every b in sort n such that some isomorphism M_n -> N_n sends a_0 to b.

    Isomorphisms of the full structures are products of sort isomorphisms, and
    decoding reads only g(a_0), so this is exhaustive for decoding purposes.
    """
    tag = sort_tag(n)
    left, right = extract_sort(pair.M, tag), extract_sort(pair.N, tag)
    cap = max(brute_cap(cap), left.size + right.size)
    return [
        pair.element(n, j)
        for j in range(right.size)
        if extends_to_isomorphism(left, right, [(0, j)], cap=cap) is not None
    ]
