"""Finitely specified c.e. sets, moduli and limitwise monotonic approximations.

Everything freezes at a stage horizon ``H``: an entry or a value change can
only happen at a stage ``<= H``, so every "there is a stage s" condition is
decided by searching up to ``H``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from catwork.errors import DominationError, ScenarioError


def _check_keys(data: Mapping, allowed: set, where: str):
    extra = set(data) - allowed
    if extra:
        raise ScenarioError(f"{where}: unknown keys {sorted(extra)}", field=sorted(extra)[0])
    missing = {k for k in allowed if k not in data}
    if missing:
        raise ScenarioError(f"{where}: missing keys {sorted(missing)}", field=sorted(missing)[0])


@dataclass(frozen=True)
class CeSetSpec:
    """``entries[n] = s`` means n enters at exactly stage s."""

    entries: Mapping[int, int]
    horizon: int
    index_cap: int

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(sorted((int(n), int(s)) for n, s in dict(self.entries).items())))
        if self.horizon < 0 or self.index_cap < 0:
            raise ScenarioError("horizon and index_cap must be >= 0", field="horizon")
        for n, s in self.entries.items():
            if not 0 <= n < self.index_cap:
                raise ScenarioError(f"entry {n} outside index cap N={self.index_cap}", field="N")
            if not 0 <= s <= self.horizon:
                raise ScenarioError(
                    f"entry {n}@{s} beyond horizon H={self.horizon}", field="H"
                )

    @property
    def members(self) -> frozenset:
        return frozenset(self.entries)

    def at_stage(self, n: int, s: int) -> bool:
        """D_s(n)."""
        return n in self.entries and self.entries[n] <= s

    def stage_set(self, s: int) -> frozenset:
        return frozenset(n for n, t in self.entries.items() if t <= s)

    def entered_at(self, n: int, s: int) -> bool:
        return self.entries.get(n) == s

    @classmethod
    def random(cls, rng: random.Random, index_cap: int, horizon: int, density: float = 0.4):
        entries = {n: rng.randint(0, horizon) for n in range(index_cap) if rng.random() < density}
        return cls(entries, horizon, index_cap)

    def to_dict(self) -> dict:
        return {
            "entries": {str(n): s for n, s in self.entries.items()},
            "H": self.horizon,
            "N": self.index_cap,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "CeSetSpec":
        _check_keys(data, {"entries", "H", "N"}, "ce-set")
        try:
            entries = {int(n): int(s) for n, s in dict(data["entries"]).items()}
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"ce-set entries: {exc}", field="entries") from None
        return cls(entries, int(data["H"]), int(data["N"]))


@dataclass(frozen=True)
class Modulus:
    values: tuple[int, ...]

    def __call__(self, n: int) -> int:
        return self.values[n]

    def __len__(self):
        return len(self.values)


def self_modulus(d: CeSetSpec) -> Modulus:
    """f(n) = least s with D_s(n) = D(n): the entry stage, or 0 for non-members."""
    return Modulus(tuple(d.entries.get(n, 0) for n in range(d.index_cap)))


def _as_function(g) -> Callable[[int], int]:
    if callable(g):
        return g
    return lambda n: g[n]


def dominates(g, f: Modulus | Sequence[int], upto: int | None = None) -> tuple[bool, int | None]:
    """(True, None) if g(n) >= f(n) for all n < upto, else (False, first violation)."""
    g, fv = _as_function(g), _as_function(f)
    upto = len(f) if upto is None else upto
    for n in range(upto):
        if g(n) < fv(n):
            return False, n
    return True, None


def modulus_decode(g, d: CeSetSpec) -> frozenset:
    """{n : D_{g(n)}(n) = 1}, which equals D whenever g dominates the self-modulus."""
    g = _as_function(g)
    ok, bad = dominates(g, self_modulus(d), d.index_cap)
    if not ok:
        raise DominationError(
            f"g({bad}) = {g(bad)} < f({bad}) = {self_modulus(d)(bad)}", witness=bad
        )
    return frozenset(n for n in range(d.index_cap) if d.at_stage(n, g(n)))


@dataclass(frozen=True)
class MonotoneApprox:
    """``values[n][s]`` and ``levels[n][s]`` for n < N and s <= H.

    The value at (n, s) is visible to oracle level m iff ``levels[n][s] <= m``.
    """

    values: tuple[tuple[int, ...], ...]
    levels: tuple[tuple[int, ...], ...]
    level_cap: int

    def __post_init__(self):
        vals = tuple(tuple(int(v) for v in row) for row in self.values)
        levs = tuple(tuple(int(m) for m in row) for row in self.levels)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "levels", levs)
        if len(vals) != len(levs) or any(len(a) != len(b) for a, b in zip(vals, levs)):
            raise ScenarioError("values and levels tables differ in shape", field="levels")
        if len({len(r) for r in vals}) > 1:
            raise ScenarioError("every row needs H+1 stages", field="values")
        if vals and not vals[0]:
            raise ScenarioError("rows must cover stage 0", field="values")
        for n, row in enumerate(vals):
            if row[0] < 0:
                raise ScenarioError(f"negative value at n={n}", field="values")
            for s in range(1, len(row)):
                if row[s] < row[s - 1]:
                    raise ScenarioError(f"value decreases at n={n}, s={s}", field="values")
        for n, row in enumerate(levs):
            for s, m in enumerate(row):
                if not 0 <= m <= self.level_cap:
                    raise ScenarioError(
                        f"use level {m} at (n={n}, s={s}) outside 0..M={self.level_cap}", field="M"
                    )

    @property
    def index_cap(self) -> int:
        return len(self.values)

    @property
    def horizon(self) -> int:
        return len(self.values[0]) - 1 if self.values else 0

    def limit(self, n: int) -> int:
        return self.values[n][-1]

    def limits(self) -> tuple[int, ...]:
        return tuple(row[-1] for row in self.values)

    def to_dict(self) -> dict:
        return {"values": [list(r) for r in self.values], "levels": [list(r) for r in self.levels], "M": self.level_cap}

    @classmethod
    def from_dict(cls, data: Mapping) -> "MonotoneApprox":
        _check_keys(data, {"values", "levels", "M"}, "approximation")
        return cls(data["values"], data["levels"], int(data["M"]))

    @classmethod
    def random(cls, rng: random.Random, index_cap: int, horizon: int, level_cap: int, max_limit: int):
        values, levels = [], []
        for _ in range(index_cap):
            v, row = 0, []
            for _ in range(horizon + 1):
                if rng.random() < 0.3:
                    v = min(max_limit, v + rng.randint(1, 2))
                row.append(v)
            values.append(row)
            levels.append([rng.randint(0, level_cap) for _ in range(horizon + 1)])
        return cls(values, levels, level_cap)


def default_level_policy(seed: int, level_cap: int) -> Callable[[int, int], int]:
    """Use level of n is ``(n + seed) mod (M + 1)``, fixed across stages."""
    return lambda n, s: (n + seed) % (level_cap + 1)


def monotone_from_ce(
    d: CeSetSpec,
    level_cap: int = 4,
    level_assignment: Callable[[int, int], int] | Mapping | None = None,
    seed: int = 0,
) -> MonotoneApprox:
    """Nondecreasing approximation to the self-modulus: 0 until n enters, then
    its entry stage."""
    if level_assignment is None:
        policy = default_level_policy(seed, level_cap)
    elif callable(level_assignment):
        policy = level_assignment
    else:
        table = dict(level_assignment)
        policy = lambda n, s: table.get((n, s), table.get(n, 0))  # noqa: E731
    values, levels = [], []
    for n in range(d.index_cap):
        values.append([d.entries[n] if d.at_stage(n, s) else 0 for s in range(d.horizon + 1)])
        levels.append([policy(n, s) for s in range(d.horizon + 1)])
    return MonotoneApprox(values, levels, level_cap)


def phi_at_level(a: MonotoneApprox, n: int, s: int, m: int) -> int | None:
    """The value at (n, s) if an oracle of level m sees it, else None."""
    if a.levels[n][s] <= m:
        return a.values[n][s]
    return None


def exceeds_at_level(a: MonotoneApprox, n: int, i: int, m: int, strict: bool = True) -> bool:
    """Is there s <= H with phi_at_level(n, s, m) > i (or >= i)?"""
    for s in range(a.horizon + 1):
        v = phi_at_level(a, n, s, m)
        if v is not None and (v > i if strict else v >= i):
            return True
    return False
