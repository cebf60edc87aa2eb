"""Scenario files: one strict JSON document that fixes every build.

Layout (``?`` marks optional sections, at least one of warmup/boxes/composite
must be present)::

    {
      "name": str,
      "seed": int,
      "caps": {"w", "I", "M", "N_max", "H", "N", "tail", "I_max"?, "brute_cap"},
      "warmup"?:    {"entries": {n: stage}},
      "boxes"?:     {"entries": {n: stage}}  or  {"values": [[..]], "levels": [[..]]},
      "composite"?: {"entries": {n: stage}},
      "primality"?: {"tuple_budget": int}
    }

Every ce-set section uses the shared caps ``H`` (stage horizon) and ``N``
(index cap).  Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from importlib import resources
from typing import Mapping

from catwork.effective import CeSetSpec, MonotoneApprox, monotone_from_ce
from catwork.errors import ScenarioError

CAP_KEYS = {"w", "I", "M", "N_max", "H", "N", "tail", "I_max", "brute_cap"}
TOP_KEYS = {"name", "seed", "caps", "warmup", "boxes", "composite", "primality"}


@dataclass(frozen=True)
class Caps:
    w: int = 2
    I: int = 4
    M: int = 3
    N_max: int = 3
    H: int = 8
    N: int = 6
    tail: int = 3
    I_max: int | None = None
    brute_cap: int = 14

    def effective_brute_cap(self) -> int:
        """$CATWORK_BRUTE_CAP wins over the scenario value."""
        env = os.environ.get("CATWORK_BRUTE_CAP")
        if env:
            try:
                return int(env)
            except ValueError:
                raise ScenarioError(f"CATWORK_BRUTE_CAP={env!r} is not an integer", field="brute_cap") from None
        return self.brute_cap

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in sorted(CAP_KEYS)}
        if self.I_max is None:
            del out["I_max"]
        return out


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    caps: Caps
    warmup: CeSetSpec | None = None
    boxes: MonotoneApprox | None = None
    composite: CeSetSpec | None = None
    tuple_budget: int = 20
    raw: Mapping | None = None

    def with_seed(self, seed: int) -> "Scenario":
        raw = dict(self.raw or {})
        raw["seed"] = seed
        return replace(self, seed=seed, raw=raw)

    def to_dict(self) -> dict:
        return dict(self.raw or {})


def _int(data: Mapping, key: str, where: str, minimum: int = 0) -> int:
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{where}.{key} must be an integer, got {v!r}", field=key)
    if v < minimum:
        raise ScenarioError(f"{where}.{key} must be >= {minimum}, got {v}", field=key)
    return v


def _strict(data, allowed: set, where: str, required: set = frozenset()):
    if not isinstance(data, Mapping):
        raise ScenarioError(f"{where} must be a JSON object", field=where)
    extra = set(data) - allowed
    if extra:
        raise ScenarioError(f"{where}: unknown key(s) {sorted(extra)}", field=sorted(extra)[0])
    missing = set(required) - set(data)
    if missing:
        raise ScenarioError(f"{where}: missing key(s) {sorted(missing)}", field=sorted(missing)[0])


def _entries(data: Mapping, where: str, caps: Caps) -> CeSetSpec:
    _strict(data, {"entries"}, where, {"entries"})
    raw = data["entries"]
    if not isinstance(raw, Mapping):
        raise ScenarioError(f"{where}.entries must be an object n -> stage", field="entries")
    entries = {}
    for k, s in raw.items():
        try:
            n = int(k)
        except ValueError:
            raise ScenarioError(f"{where}.entries key {k!r} is not an integer", field="entries") from None
        if isinstance(s, bool) or not isinstance(s, int) or s < 0:
            raise ScenarioError(f"{where}.entries[{k}] must be a stage >= 0", field="entries")
        if n >= caps.N or n < 0:
            raise ScenarioError(f"{where}: entry {n} outside index cap N={caps.N}", field="N")
        if s > caps.H:
            raise ScenarioError(
                f"{where}: entry {n}@{s} exceeds stage horizon H={caps.H}; raise H", field="H"
            )
        entries[n] = s
    return CeSetSpec(entries, caps.H, caps.N)


def parse_caps(data: Mapping) -> Caps:
    _strict(data, CAP_KEYS, "caps", CAP_KEYS - {"I_max"})
    vals = {k: _int(data, k, "caps", 0 if k in ("H", "N") else 1) for k in CAP_KEYS if k in data}
    return Caps(**vals)


def parse_scenario(data: Mapping) -> Scenario:
    _strict(data, TOP_KEYS, "scenario", {"name", "seed", "caps"})
    if not isinstance(data["name"], str) or not data["name"]:
        raise ScenarioError("scenario.name must be a non-empty string", field="name")
    seed = _int(data, "seed", "scenario")
    caps = parse_caps(data["caps"])
    if not any(k in data for k in ("warmup", "boxes", "composite")):
        raise ScenarioError("scenario needs at least one of warmup, boxes, composite", field="warmup")
    warmup = _entries(data["warmup"], "warmup", caps) if "warmup" in data else None
    composite = _entries(data["composite"], "composite", caps) if "composite" in data else None
    boxes = None
    if "boxes" in data:
        b = data["boxes"]
        if isinstance(b, Mapping) and "entries" in b:
            boxes = monotone_from_ce(_entries(b, "boxes", caps), caps.M, seed=seed)
        else:
            _strict(b, {"values", "levels"}, "boxes", {"values", "levels"})
            if len(b["values"]) > caps.N:
                raise ScenarioError(f"boxes: {len(b['values'])} sorts exceed N={caps.N}", field="N")
            if any(len(row) != caps.H + 1 for row in b["values"]):
                raise ScenarioError(f"boxes: every row needs H+1={caps.H + 1} stages", field="H")
            boxes = MonotoneApprox(b["values"], b["levels"], caps.M)
    budget = 20
    if "primality" in data:
        _strict(data["primality"], {"tuple_budget"}, "primality", {"tuple_budget"})
        budget = _int(data["primality"], "tuple_budget", "primality")
    for spec, where in ((boxes, "boxes"),):
        if spec is not None and caps.I_max is not None:
            worst = max(spec.limits(), default=0)
            if caps.I_max <= worst:
                raise ScenarioError(
                    f"{where}: I_max={caps.I_max} must exceed every limit value (max {worst})", field="I_max"
                )
    if composite is not None and caps.I_max is not None:
        worst = max(composite.entries.values(), default=0)
        if caps.I_max <= worst:
            raise ScenarioError(f"composite: I_max={caps.I_max} must exceed every modulus value (max {worst})", field="I_max")
    return Scenario(data["name"], seed, caps, warmup, boxes, composite, budget, dict(data))


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc.strerror}", field="path") from None
    return loads_scenario(text)


def loads_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}", field="json") from None
    return parse_scenario(data)


def default_scenario_text() -> str:
    return resources.files("catwork.data").joinpath("default_scenario.json").read_text(encoding="utf-8")


def default_scenario() -> Scenario:
    return loads_scenario(default_scenario_text())
