"""Ehrenfeucht-Fraisse games as an independent oracle for rank-k equivalence."""

from __future__ import annotations

import numpy as np

from catwork import kernels
from catwork.errors import SearchCapExceeded
from catwork.search import brute_cap
from catwork.structures import FiniteStructure

MAX_ROUNDS = 4


def _atomic_encoding(a: FiniteStructure, b: FiniteStructure):
    """Colours are bare unary signatures: the game may only see atomic facts."""
    unary = sorted(set(a.unary) | set(b.unary))
    binary = sorted(set(a.binary) | set(b.binary))
    bit = {name: 1 << i for i, name in enumerate(binary)}
    sigs = {}
    out = []
    for s in (a, b):
        col = np.zeros(s.size, dtype=np.int64)
        for x in s.universe:
            sig = tuple(name for name in unary if x in s.unary.get(name, ()))
            col[x] = sigs.setdefault(sig, len(sigs))
        adj = np.zeros((s.size, s.size), dtype=np.int64)
        for name, pairs in s.binary.items():
            for p, q in pairs:
                adj[p, q] |= bit[name]
        out.append((col, adj))
    return out


def ef_equivalent(
    a: FiniteStructure, b: FiniteStructure, k: int, cap: int | None = None, backend=None
) -> bool:
    """True iff Duplicator wins the k-round game, i.e. a and b agree on every
    sentence of quantifier rank at most k."""
    cap = brute_cap(cap)
    if a.size + b.size > cap or k > MAX_ROUNDS:
        raise SearchCapExceeded(
            f"resource cap exceeded: sizes {a.size}+{b.size} (cap {cap}), rounds {k} (max {MAX_ROUNDS})"
        )
    (ca, aa), (cb, ab) = _atomic_encoding(a, b)
    impl = backend or kernels
    return bool(impl.ef_game(ca, cb, aa, ab, k))
