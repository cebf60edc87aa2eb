"""Orbit formulas for the coded structures, checked against brute-force orbits.

A structure all of whose tuples have a definable automorphism orbit is
atomic; at desk scale we synthesise the defining formula for each sampled
tuple and compare its satisfiers with the orbit, sort by sort.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Sequence

from catwork.baf import RankOracle, isolating_formula, phi_n
from catwork.coders.boxes import SPINE, BoxPair
from catwork.coders.warmup import WarmupPair, sort_tag, stage_tag
from catwork.logic.evaluate import satisfiers
from catwork.logic.formulas import Eq, Formula, Not, conj, exists, neq, rel
from catwork.logic.relativize import box_relation, relativize_box
from catwork.search import orbit
from catwork.structures import FiniteStructure, Tree, extract_sort


@dataclass
class PrimalityReport:
    checked: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        return {"checked": self.checked, "mismatches": self.mismatches, "ok": self.ok}


def _eq_pattern(variables: Sequence[str], tup: Sequence[int]) -> list[Formula]:
    out = []
    for i, j in itertools.combinations(range(len(tup)), 2):
        out.append(Eq(variables[i], variables[j]) if tup[i] == tup[j] else neq(variables[i], variables[j]))
    return out


# --- warm-up structures -------------------------------------------------------

def warmup_element_formula(s: FiniteStructure, n: int, x: int, var: str) -> Formula:
    stages = sorted(k for k in s.unary if k.startswith("U_"))
    marks = [k for k in stages if x in s.unary[k]]
    if marks:
        return conj(rel(sort_tag(n), var), *(rel(k, var) for k in marks))
    return conj(rel(sort_tag(n), var), *(Not(rel(k, var)) for k in stages))


def warmup_tuple_formula(s: FiniteStructure, n: int, tup: Sequence[int]) -> tuple[Formula, list[str]]:
    variables = [f"t{i}" for i in range(len(tup))]
    parts = [warmup_element_formula(s, n, x, v) for x, v in zip(tup, variables)]
    return conj(*parts, *_eq_pattern(variables, tup)), variables


# --- box structures -----------------------------------------------------------

class _BoxSort:
    """One sort of a box structure, re-read from its relations."""

    def __init__(self, s: FiniteStructure, levels: range, oracle: RankOracle):
        self.s = s
        self.levels = levels
        self.spine = sorted(s.unary[SPINE])
        self.owner = {}
        self.boxes = {}
        for m in levels:
            succ = s.successors.get(box_relation(m), {})
            for c in self.spine:
                nodes = sorted(succ.get(c, ()))
                self.boxes[(c, m)] = nodes
                for y in nodes:
                    self.owner[y] = (c, m)
        self.least_e = {}
        for c in self.spine:
            self.least_e[c] = next(
                (m for m in levels if oracle.classify(self.tree(c, m), m) == "E"), None
            )
        thresholds = [t for t in self.least_e.values() if t is not None]
        self.top = max(thresholds) if thresholds else None

    def tree(self, c: int, m: int) -> Tree:
        return Tree.from_structure(self.s, self.boxes[(c, m)])

    def spine_formula(self, c: int, var: str) -> Formula:
        """S(var), plus: least E level t (phi_t in box t, not phi_{t-1} in
        box t-1), or for an all-A element, not phi at the sort's top level."""
        parts = [rel(SPINE, var)]
        t = self.least_e[c]
        if t is not None:
            parts.append(relativize_box(phi_n(t), var, t))
            if t > 1:
                parts.append(Not(relativize_box(phi_n(t - 1), var, t - 1)))
        elif self.top is not None:
            parts.append(Not(relativize_box(phi_n(self.top), var, self.top)))
        return conj(*parts)

    def tuple_formula(self, tup: Sequence[int]) -> tuple[Formula, list[str]]:
        variables = [f"t{i}" for i in range(len(tup))]
        first = {}
        for i, x in enumerate(tup):
            first.setdefault(x, variables[i])
        owners = []
        for x in tup:
            c = x if x in self.spine else self.owner[x][0]
            if c not in owners:
                owners.append(c)
        fresh = {}
        owner_var = {}
        for k, c in enumerate(owners):
            if c in first:
                owner_var[c] = first[c]
            else:
                owner_var[c] = fresh[c] = f"o{k}"
        parts = [self.spine_formula(c, owner_var[c]) for c in owners]
        parts += [neq(owner_var[a], owner_var[b]) for a, b in itertools.combinations(owners, 2)]
        # group box elements by box; isolate each group inside its box
        groups: dict = {}
        for x in first:
            if x not in self.spine:
                groups.setdefault(self.owner[x], []).append(x)
        for (c, m), members in groups.items():
            nodes = self.boxes[(c, m)]
            local = [nodes.index(x) for x in members]
            names = [first[x] for x in members]
            iso = isolating_formula(self.tree(c, m), local, m, names)
            parts.append(relativize_box(iso, owner_var[c], m))
            parts += [rel(box_relation(m), owner_var[c], v) for v in names]
        body = conj(*parts)
        if fresh:
            body = exists(list(fresh.values()), body)
        eqs = [Eq(first[x], v) for x, v in zip(tup, variables) if first[x] != v]
        return conj(body, *eqs), variables


# --- report -------------------------------------------------------------------

def _sample_tuples(universe: Sequence[int], spine: Sequence[int], budget: int, rng: random.Random):
    tuples = [(c,) for c in spine]
    for _ in range(budget):
        k = rng.choice((1, 2))
        tuples.append(tuple(rng.choice(universe) for _ in range(k)))
    return list(dict.fromkeys(tuples))


def primality_report(
    pair: BoxPair | WarmupPair,
    tuple_budget: int = 20,
    side: str = "N",
    seed: int = 0,
    cap: int | None = None,
) -> PrimalityReport:
    """For each sort: every spine element plus ``tuple_budget`` random tuples
    of length 1-2; the synthesised orbit formula's satisfiers must equal the
    brute-force orbit."""
    s = pair.N if side == "N" else pair.M
    rng = random.Random(seed)
    report = PrimalityReport()
    n_sorts = pair.spec.index_cap if isinstance(pair, WarmupPair) else pair.approx.index_cap
    oracle = RankOracle()
    for n in range(n_sorts):
        sub = extract_sort(s, sort_tag(n))
        sort_cap = max(cap or 0, sub.size)
        if isinstance(pair, WarmupPair):
            make = lambda tup, sub=sub, n=n: warmup_tuple_formula(sub, n, tup)  # noqa: E731
            spine = [0] + [x for x in sub.universe if any(x in sub.unary[k] for k in sub.unary if k.startswith("U_"))]
        else:
            bs = _BoxSort(sub, pair.levels, oracle)
            make = bs.tuple_formula
            spine = bs.spine
        for tup in _sample_tuples(list(sub.universe), spine, tuple_budget, rng):
            phi, variables = make(tup)
            got = satisfiers(phi, sub, variables)
            want = orbit(sub, tup, cap=sort_cap)
            report.checked += 1
            if got != want:
                report.mismatches.append({
                    "sort": n,
                    "tuple": list(tup),
                    "only_formula": sorted(got - want)[:5],
                    "only_orbit": sorted(want - got)[:5],
                })
    return report


__all__ = [
    "PrimalityReport",
    "primality_report",
    "warmup_tuple_formula",
    "stage_tag",
]
