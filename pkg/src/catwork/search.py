"""Isomorphism checking, exhaustive isomorphism search and automorphism orbits.

Search is backtracking over a joint colour refinement of the two structures.
Initial colours combine each element's unary signature with the AHU code of
the Edge-subtree below it, so tree components are pruned by canonical form
before any branching happens.
"""

from __future__ import annotations

import itertools
import os
from typing import Sequence

import numpy as np

from catwork import kernels
from catwork.errors import PartialWitnessError, SearchCapExceeded, VocabularyError
from catwork.structures import FiniteStructure, IsoWitness, forest_codes

DEFAULT_BRUTE_CAP = 14


def brute_cap(cap: int | None = None) -> int:
    """Resolve the brute-force cap: explicit value, else $CATWORK_BRUTE_CAP, else 14."""
    if cap is not None:
        return cap
    env = os.environ.get("CATWORK_BRUTE_CAP")
    return int(env) if env else DEFAULT_BRUTE_CAP


def check_isomorphism(left: FiniteStructure, right: FiniteStructure, w: IsoWitness) -> bool:
    """True iff ``w`` is a bijection preserving and reflecting every relation
    and mapping roots onto roots."""
    if not w.total:
        raise PartialWitnessError("partial witness")
    if left.vocabulary != right.vocabulary:
        raise VocabularyError("structures are over different vocabularies")
    m = w.mapping
    if set(m) != set(left.universe) or left.size != right.size:
        return False
    if set(m.values()) != set(right.universe):
        return False
    for name, members in left.unary.items():
        if {m[x] for x in members} != right.unary[name]:
            return False
    for name, pairs in left.binary.items():
        if {(m[a], m[b]) for a, b in pairs} != right.binary[name]:
            return False
    return {m[r] for r in left.roots.values()} == set(right.roots.values())


def _encode(structures: Sequence[FiniteStructure]):
    """Joint encoding: refined colours and adjacency bitmasks for each structure."""
    names = sorted(set().union(*(s.binary.keys() for s in structures)))
    if len(names) > 62:
        raise ValueError("at most 62 binary relation symbols are supported")
    bit = {name: 1 << i for i, name in enumerate(names)}
    adjs, nbrs = [], []
    for s in structures:
        adj = np.zeros((s.size, s.size), dtype=np.int64)
        for name, pairs in s.binary.items():
            for a, b in pairs:
                adj[a, b] |= bit[name]
        adjs.append(adj)
        nb = [dict() for _ in s.universe]
        for a, b in zip(*np.nonzero(adj)):
            a, b = int(a), int(b)
            nb[a].setdefault(b, [0, 0])[0] = int(adj[a, b])
            nb[b].setdefault(a, [0, 0])[1] = int(adj[a, b])
        nbrs.append([sorted((y, o, i) for y, (o, i) in d.items()) for d in nb])

    colors = []
    for s in structures:
        codes = forest_codes(s)
        sig = [[] for _ in s.universe]
        for name, members in s.unary.items():
            for x in members:
                sig[x].append(name)
        root_set = set(s.roots.values())
        colors.append([(tuple(sig[x]), codes.get(x, ""), x in root_set) for x in s.universe])
    return _refine(colors, nbrs), adjs, nbrs


def _refine(colors, nbrs):
    """Joint 1-dimensional colour refinement; returns int colours per structure."""
    ids = _intern(colors)
    while True:
        nxt = []
        for cols, nb in zip(ids, nbrs):
            nxt.append([
                (cols[x], tuple(sorted((o, i, cols[y]) for y, o, i in nb[x])))
                for x in range(len(cols))
            ])
        new_ids = _intern(nxt)
        if _num_classes(new_ids) == _num_classes(ids):
            return new_ids
        ids = new_ids


def _intern(colors):
    table = {}
    for c in sorted({c for cols in colors for c in cols}, key=repr):
        table[c] = len(table)
    return [[table[c] for c in cols] for cols in colors]


def _num_classes(ids):
    return len({c for cols in ids for c in cols})


def _search_order(color, adj):
    """Assign rarest colours first, then walk neighbours so adjacency prunes early."""
    n = len(color)
    count = {}
    for c in color:
        count[c] = count.get(c, 0) + 1
    sym = (adj != 0) | (adj.T != 0)
    order, seen = [], set()
    for start in sorted(range(n), key=lambda x: (count[color[x]], x)):
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        while queue:
            x = queue.pop(0)
            order.append(x)
            for y in np.nonzero(sym[x])[0]:
                y = int(y)
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    return order


class _Search:
    """A prepared (left, right) pair: encode once, search many times."""

    def __init__(self, left: FiniteStructure, right: FiniteStructure, backend=None):
        self.left, self.right = left, right
        if left is right:
            (cl, _), (al, _), (nl, _) = _encode([left, left])
            cr, ar, nr = cl, al, nl
        else:
            (cl, cr), (al, ar), (nl, nr) = _encode([left, right])
        self.cl, self.cr, self.al, self.ar = cl, cr, al, ar
        self.nl, self.nr = nl, nr
        self.possible = (
            left.size == right.size
            and sorted(cl) == sorted(cr)
            and left.vocabulary == right.vocabulary
            and len(left.roots) == len(right.roots)
        )
        self.order = _search_order(cl, al) if self.possible else []
        self.impl = backend or kernels

    def individualize(self, fixed_pairs):
        """Refined colours after giving the k-th fixed pair its own colour on
        both sides; None when the pairs are already contradictory."""
        if len(dict(fixed_pairs)) != len({v: u for u, v in fixed_pairs}):
            return None
        if len(set(fixed_pairs)) != len(dict(fixed_pairs)):
            return None
        cl = [(c, -1) for c in self.cl]
        cr = [(c, -1) for c in self.cr]
        for k, (u, v) in enumerate(dict.fromkeys(fixed_pairs)):
            if self.cl[u] != self.cr[v]:
                return None
            cl[u], cr[v] = (self.cl[u], k), (self.cr[v], k)
        rl, rr = _refine([cl, cr], [self.nl, self.nr])
        if sorted(rl) != sorted(rr):
            return None
        return rl, rr

    def run(self, fixed_pairs=(), limit=None) -> list[IsoWitness]:
        if not self.possible:
            return []
        fixed_pairs = list(fixed_pairs)
        cl, cr = self.cl, self.cr
        if fixed_pairs:
            refined = self.individualize(fixed_pairs)
            if refined is None:
                return []
            cl, cr = refined
        fixed = [-1] * self.left.size
        for u, v in fixed_pairs:
            fixed[u] = v
        # fixed elements first: they cut the search most
        order = [u for u in self.order if fixed[u] >= 0] + [u for u in self.order if fixed[u] < 0]
        found = self.impl.iso_search(
            np.asarray(cl, dtype=np.int64), np.asarray(cr, dtype=np.int64),
            self.al, self.ar, order, fixed, -1 if limit is None else limit,
        )
        return [IsoWitness(tuple(enumerate(m)), True) for m in found]


def _run_search(left, right, fixed_pairs, limit, backend=None):
    return _Search(left, right, backend).run(fixed_pairs, limit)


def find_isomorphisms(
    left: FiniteStructure,
    right: FiniteStructure,
    limit: int | None = None,
    cap: int | None = None,
    backend=None,
) -> list[IsoWitness]:
    """All isomorphisms left -> right (at most ``limit``); empty iff none exist.

    ``cap`` bounds the combined universe size (default :func:`brute_cap`).
    """
    cap = brute_cap(cap)
    if left.size + right.size > cap:
        raise SearchCapExceeded(
            f"too large for exhaustive search: {left.size}+{right.size} > cap {cap}"
        )
    if left.vocabulary != right.vocabulary:
        return []
    return _run_search(left, right, (), limit, backend)


def extends_to_isomorphism(
    left: FiniteStructure,
    right: FiniteStructure,
    fixed_pairs: Sequence[tuple[int, int]],
    cap: int | None = None,
) -> IsoWitness | None:
    """One isomorphism extending the partial map ``fixed_pairs``, or None."""
    cap = brute_cap(cap)
    if left.size + right.size > cap:
        raise SearchCapExceeded(
            f"too large for exhaustive search: {left.size}+{right.size} > cap {cap}"
        )
    found = _run_search(left, right, list(fixed_pairs), 1)
    return found[0] if found else None


def automorphisms(s: FiniteStructure, limit: int | None = None, cap: int | None = None):
    cap = brute_cap(cap)
    if s.size > cap:
        raise SearchCapExceeded(f"too large for exhaustive search: {s.size} > cap {cap}")
    return _run_search(s, s, (), limit)


def orbit(s: FiniteStructure, tup: Sequence[int], cap: int | None = None) -> set[tuple]:
    """Automorphism orbit of the ordered tuple ``tup``.

    Candidate images are chosen position by position from the colour classes
    left after individualising the earlier positions, and each full candidate
    is kept only if some automorphism extends ``tup -> candidate``.
    """
    cap = brute_cap(cap)
    if s.size > cap:
        raise SearchCapExceeded(f"too large for exhaustive search: {s.size} > cap {cap}")
    tup = tuple(tup)
    prep = _Search(s, s)
    out = set()

    # fix one position at a time; after each choice the refined colours of
    # the rest shrink the candidate pools, and dead prefixes are cut early
    def extend(i, pairs, cols):
        if i == len(tup):
            if prep.run(pairs, 1):
                out.add(tuple(v for _, v in pairs[: len(tup)]))
            return
        x = tup[i]
        if x in tup[:i]:
            extend(i + 1, pairs + [(x, pairs[tup.index(x)][1])], cols)
            return
        cl, cr = cols
        used = {v for _, v in pairs}
        for y in s.universe:
            if cr[y] != cl[x] or y in used:
                continue
            nxt = pairs + [(x, y)]
            refined = prep.individualize(nxt)
            if refined is None:
                continue
            if i + 1 < len(tup) and not prep.run(nxt, 1):
                continue
            extend(i + 1, nxt, refined)

    if prep.possible:
        extend(0, [], (prep.cl, prep.cr))
    return out
