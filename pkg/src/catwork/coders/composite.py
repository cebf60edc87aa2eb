"""S_omega, the composite structures and the end-to-end round trip.

S_omega is the disjoint union of ``w`` copies of E_n for every n <= N_max.
Its "hard" presentation is a seeded scramble: component order and node
numbering are permuted and component names are anonymised, so matching
components against the standard copy needs the rank oracle.  This is a
desk-scale stand-in, not a copy whose isomorphisms compute the omega-jump.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from catwork.baf import E, RankOracle, TruncationParams, build_tree, iso_baf
from catwork.coders.boxes import BoxPair, build_boxes, extract_dominator, iso_with_modulus
from catwork.effective import CeSetSpec, MonotoneApprox, modulus_decode, monotone_from_ce, self_modulus
from catwork.errors import CatworkError, ClaimViolation, CopyMismatchError, MalformedTreeError
from catwork.search import check_isomorphism
from catwork.structures import FiniteStructure, IsoWitness, Tree, disjoint_union

R_PART = "R"


@dataclass(frozen=True)
class SOmega:
    structure: FiniteStructure
    components: tuple[tuple[int, ...], ...]  # node ids per component, tree order
    ranks: tuple[int | None, ...]  # known ranks (None on a scrambled copy)
    seed: int | None = None


def build_s_omega(n_max: int, w: int, seed: int | None = None) -> SOmega:
    """w copies of E_n for each n <= n_max; scrambled when ``seed`` is given."""
    t = TruncationParams(w=w, n_max=n_max)
    trees = [(n, build_tree(E(n), t)) for n in range(1, n_max + 1) for _ in range(w)]
    if seed is not None:
        random.Random(seed).shuffle(trees)
    parts = [tree.to_structure(component=f"c{k}") for k, (_, tree) in enumerate(trees)]
    s, offsets = disjoint_union(parts)
    comps = tuple(tuple(range(off, off + len(tree))) for off, (_, tree) in zip(offsets, trees))
    if seed is None:
        named = {f"E{n}#{k % w}": comps[k][0] for k, (n, _) in enumerate(trees)}
        s = FiniteStructure(s.size, s.unary, s.binary, named)
        return SOmega(s, comps, tuple(n for n, _ in trees))
    s, perm = _scramble_nodes(s, seed)
    comps = tuple(tuple(perm[x] for x in c) for c in comps)
    return SOmega(s, comps, (None,) * len(comps), seed)


def _scramble_nodes(s: FiniteStructure, seed: int):
    perm = list(range(s.size))
    random.Random(seed + 1).shuffle(perm)
    return s.relabel(perm), perm


def components_of(s: FiniteStructure) -> list[list[int]]:
    """Node sets of the trees named in ``s.roots``, each sorted by id."""
    kids = s.children
    out = []
    for _, r in sorted(s.roots.items(), key=lambda kv: kv[1]):
        nodes, stack = [], [r]
        while stack:
            x = stack.pop()
            nodes.append(x)
            stack.extend(kids.get(x, ()))
        out.append(sorted(nodes))
    return out


def match_s_omega(
    std: SOmega, copy: FiniteStructure, n_max: int, oracle: RankOracle, calls: list | None = None
) -> dict[int, int]:
    """Map the standard S_omega onto a presentation of it.

    Each copy component's rank is found by asking the oracle for shape
    checks at ranks 1, 2, ... (malformed means try the next rank), and its
    kind confirmed by a classify call; components of equal rank are then
    paired in order and mapped by the back-and-forth isomorphism.
    """
    pools: dict[int, list[tuple[int, ...]]] = {}
    for comp in components_of(copy):
        before = oracle.calls
        tree = Tree.from_structure(copy, comp)
        try:
            n = oracle.rank_of(tree, n_max)
        except MalformedTreeError:
            raise CopyMismatchError("copy component is not a back-and-forth tree", witness=comp[0]) from None
        if oracle.classify(tree, n) != "E":
            raise CopyMismatchError(f"copy component of rank {n} is not E-kind", witness=comp[0])
        if calls is not None:
            calls.append(oracle.calls - before)
        pools.setdefault(n, []).append(tuple(comp))
    mapping = {}
    for comp, n in zip(std.components, std.ranks):
        if not pools.get(n):
            raise CopyMismatchError(f"copy lacks a component of rank {n}")
        target = pools[n].pop(0)
        w = iso_baf(Tree.from_structure(std.structure, comp), Tree.from_structure(copy, target), n, oracle)
        for u, v in w.pairs:
            mapping[comp[u]] = target[v]
    if any(pools.values()):
        raise CopyMismatchError("copy has surplus components")
    return mapping


@dataclass(frozen=True)
class CompositeStructure:
    structure: FiniteStructure
    hard: bool
    seed: int | None
    core_size: int  # elements 0..core_size-1 are the M or N part
    pair: BoxPair = field(repr=False)
    s_part: SOmega = field(repr=False)

    @property
    def core(self) -> list[int]:
        return list(range(self.core_size))

    @property
    def r_part(self) -> list[int]:
        return list(range(self.core_size, self.structure.size))


def build_composite(
    a: MonotoneApprox, side: str, n_max: int = 3, w: int = 2, seed: int = 0, pair: BoxPair | None = None
) -> CompositeStructure:
    """easy: M plus the standard S_omega; hard: N plus a scrambled S_omega.
    Unary ``R`` marks the S_omega part."""
    if side not in ("easy", "hard"):
        raise ValueError("side must be 'easy' or 'hard'")
    pair = pair or build_boxes(a, w=w)
    hard = side == "hard"
    core = pair.N if hard else pair.M
    so = build_s_omega(n_max, w, seed if hard else None)
    s, offsets = disjoint_union([core, so.structure])
    off = offsets[1]
    s = s.with_relations(unary={R_PART: range(off, s.size)})
    return CompositeStructure(s, hard, seed if hard else None, off, pair, so)


def _part(c: CompositeStructure, elements) -> FiniteStructure:
    sub = c.structure.induced(list(elements))
    # drop R so the parts share the vocabulary of their origin
    return FiniteStructure(sub.size, {k: v for k, v in sub.unary.items() if k != R_PART}, sub.binary, sub.roots)


def composite_iso(
    easy: CompositeStructure, hard: CompositeStructure, f, n_max: int, oracle: RankOracle, calls: list | None = None
) -> IsoWitness:
    """Glue an M -> N isomorphism (through the f-plus-oracle procedure) with
    a component matching of the two S_omega parts."""
    pair = easy.pair
    easy_core = _part(easy, easy.core)
    hard_core = _part(hard, hard.core)
    # N_std -> M part of easy, inverted, then N_std -> N part of hard
    to_easy = iso_with_modulus(pair, easy_core, f, oracle)
    to_hard = iso_with_modulus(pair, hard_core, f, oracle)
    core_map = to_easy.inverse().then(to_hard).mapping
    std = easy.s_part
    s_map = match_s_omega(std, _part(hard, hard.r_part), n_max, oracle, calls)
    mapping = dict(core_map)
    e_off, h_off = easy.core_size, hard.core_size
    for u, v in s_map.items():
        mapping[u + e_off] = v + h_off
    return IsoWitness.from_mapping(mapping, easy.structure.size)


def restrict_to_core(g: IsoWitness, easy: CompositeStructure, hard: CompositeStructure) -> IsoWitness:
    """The part of a composite isomorphism between the M and N parts."""
    m = g.mapping
    pairs = []
    for x in easy.core:
        y = m[x]
        if y >= hard.core_size:
            raise ClaimViolation("isomorphism does not respect R", witness=x)
        pairs.append((x, y))
    return IsoWitness(tuple(pairs), True)


def end_to_end(
    d: CeSetSpec,
    level_cap: int = 3,
    w: int = 1,
    n_max: int = 3,
    seed: int = 0,
    level_assignment=None,
) -> dict:
    """Encode D, build both composites, find an isomorphism with f and the
    oracle, extract the dominator and decode.  The report names the failing
    stage and its witness when something goes wrong."""
    report: dict = {"ce_set": d.to_dict(), "seed": seed, "expected": sorted(d.members)}
    stage = "modulus"
    oracle = RankOracle()
    calls: list[int] = []
    try:
        f = self_modulus(d)
        stage = "approximation"
        a = monotone_from_ce(d, level_cap, level_assignment, seed)
        if a.limits() != f.values:
            raise ClaimViolation("approximation limit differs from the self-modulus")
        stage = "build"
        pair = build_boxes(a, w=w)
        easy = build_composite(a, "easy", n_max, w, seed, pair)
        hard = build_composite(a, "hard", n_max, w, seed, pair)
        stage = "isomorphism"
        g = composite_iso(easy, hard, f, n_max, oracle, calls)
        if not check_isomorphism(easy.structure, hard.structure, g):
            raise ClaimViolation("glued map is not an isomorphism of the composites")
        stage = "dominator"
        ghat = extract_dominator(restrict_to_core(g, easy, hard), pair)
        stage = "decode"
        recovered = modulus_decode(ghat, d)
        report.update(
            ok=recovered == d.members,
            recovered=sorted(recovered),
            dominator=list(ghat),
            modulus=list(f.values),
            sizes={"easy": easy.structure.size, "hard": hard.structure.size},
        )
        if not report["ok"]:
            report["stage"] = "decode"
    except CatworkError as exc:
        report.update(ok=False, stage=stage, error=f"{type(exc).__name__}: {exc}",
                      witness=_jsonable(getattr(exc, "witness", None)))
    report["oracle_calls"] = oracle.calls
    report["component_calls"] = calls
    return report


def _jsonable(x):
    if x is None or isinstance(x, (int, str, bool, float)):
        return x
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in x]
    return repr(x)
