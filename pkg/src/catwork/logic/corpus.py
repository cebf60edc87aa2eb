"""Syntactic enumeration of small closed formulas, de-duplicated by truth table.

Formulas are built bottom-up over variables ``v0, v1, ...``: literals over the
current variables, quantifications of the level below, and pairwise
conjunctions/disjunctions of those.  Each candidate carries its truth table
on every sample structure (as one flat boolean vector), and only the first
formula per distinct table is kept.  Tables are computed here with numpy;
consumers re-check formulas with the real evaluator, so the two routes stay
independent.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from catwork.logic.formulas import And, Eq, Exists, Forall, Formula, Not, Or, Rel
from catwork.structures import FiniteStructure


class _Tables:
    def __init__(self, samples: Sequence[FiniteStructure], j: int):
        self.samples = samples
        self.j = j
        self.sizes = [s.size ** j for s in samples]
        self.offsets = np.cumsum([0] + self.sizes)

    def atom(self, fn) -> np.ndarray:
        parts = []
        for s in self.samples:
            n = s.size
            grids = np.indices((n,) * self.j).reshape(self.j, -1) if self.j else np.zeros((0, 1), int)
            parts.append(np.fromiter((fn(s, *col) for col in grids.T), dtype=bool, count=grids.shape[1]))
        return np.concatenate(parts) if parts else np.zeros(0, bool)

    def project(self, vec: np.ndarray, universal: bool) -> np.ndarray:
        """Quantify away the last variable: tables over j+1 vars -> j vars."""
        upper = np.cumsum([0] + [s.size ** (self.j + 1) for s in self.samples])
        out = []
        for idx, s in enumerate(self.samples):
            seg = vec[upper[idx]: upper[idx + 1]].reshape(-1, s.size)
            out.append(seg.all(axis=1) if universal else seg.any(axis=1))
        return np.concatenate(out)


def _literals(unary, binary, variables, tables):
    atoms = []
    for a, b in itertools.combinations(range(len(variables)), 2):
        atoms.append((Eq(variables[a], variables[b]), tables.atom(lambda s, *t, a=a, b=b: t[a] == t[b])))
    for name in unary:
        for a in range(len(variables)):
            atoms.append((
                Rel(name, (variables[a],)),
                tables.atom(lambda s, *t, a=a, name=name: t[a] in s.unary.get(name, ())),
            ))
    for name in binary:
        for a, b in itertools.product(range(len(variables)), repeat=2):
            atoms.append((
                Rel(name, (variables[a], variables[b])),
                tables.atom(lambda s, *t, a=a, b=b, name=name: (t[a], t[b]) in s.binary.get(name, ())),
            ))
    out = []
    for phi, vec in atoms:
        out.append((phi, vec))
        out.append((Not(phi), ~vec))
    return out


def _dedup(items, seen=None):
    seen = set() if seen is None else seen
    out = []
    for phi, vec in items:
        key = np.packbits(vec).tobytes() + len(vec).to_bytes(8, "little")
        if key not in seen:
            seen.add(key)
            out.append((phi, vec))
    return out


def formula_corpus(
    unary: Sequence[str],
    binary: Sequence[str],
    max_rank: int,
    samples: Sequence[FiniteStructure],
    combine_limit: int = 40,
) -> list[Formula]:
    """Closed formulas of quantifier rank <= ``max_rank`` with distinct truth
    tables on ``samples``.

    ``combine_limit`` bounds how many basis formulas per level enter the
    pairwise and/or step.
    """
    variables = [f"v{i}" for i in range(max_rank)]
    unary, binary = sorted(unary), sorted(binary)

    def level(j):
        tables = _Tables(samples, j)
        items = _literals(unary, binary, variables[:j], tables)
        if j < max_rank:
            below = level(j + 1)
            for phi, vec in below:
                items.append((Exists(variables[j], phi), tables.project(vec, False)))
                items.append((Forall(variables[j], phi), tables.project(vec, True)))
        basis = _dedup(items)
        combined = list(basis)
        head = basis[:combine_limit]
        for (p, pv), (q, qv) in itertools.combinations(head, 2):
            combined.append((And((p, q)), pv & qv))
            combined.append((Or((p, q)), pv | qv))
        return _dedup(combined)

    return [phi for phi, _ in level(0)]
