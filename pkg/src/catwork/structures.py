"""Finite relational structures, rooted trees and isomorphism witnesses.

Element ids are dense: a structure of size ``n`` has universe ``0..n-1``, and
the numbering is part of the data (two presentations of the same structure
differ only in numbering).  Everything here is immutable after construction.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from catwork.errors import VocabularyError

EDGE = "Edge"
ROOT = "Root"


def _freeze_unary(unary):
    return MappingProxyType({k: frozenset(v) for k, v in sorted(unary.items())})


def _freeze_binary(binary):
    return MappingProxyType(
        {k: frozenset((int(a), int(b)) for a, b in v) for k, v in sorted(binary.items())}
    )


@dataclass(frozen=True, eq=False)
class FiniteStructure:
    """A finite structure with unary and binary relations and named roots."""

    size: int
    unary: Mapping[str, frozenset] = field(default_factory=dict)
    binary: Mapping[str, frozenset] = field(default_factory=dict)
    roots: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "unary", _freeze_unary(self.unary))
        object.__setattr__(self, "binary", _freeze_binary(self.binary))
        object.__setattr__(self, "roots", MappingProxyType(dict(sorted(self.roots.items()))))
        n = self.size
        for name, members in self.unary.items():
            for x in members:
                if not 0 <= x < n:
                    raise ValueError(f"unary {name} mentions {x} outside universe of size {n}")
        for name, pairs in self.binary.items():
            for a, b in pairs:
                if not (0 <= a < n and 0 <= b < n):
                    raise ValueError(f"binary {name} mentions ({a}, {b}) outside universe")
        for comp, r in self.roots.items():
            if not 0 <= r < n:
                raise ValueError(f"root {comp}={r} outside universe")
        self._check_forest()

    def _check_forest(self):
        parent = {}
        for a, b in self.binary.get(EDGE, ()):
            if b in parent:
                raise ValueError(f"Edge gives {b} two parents")
            parent[b] = a
        # every chain must terminate; colour nodes as we walk
        done = set()
        for start in parent:
            seen = []
            x = start
            while x in parent and x not in done:
                if x in seen:
                    raise ValueError(f"Edge has a cycle through {x}")
                seen.append(x)
                x = parent[x]
            done.update(seen)

    def __eq__(self, other):
        if not isinstance(other, FiniteStructure):
            return NotImplemented
        return (
            self.size == other.size
            and dict(self.unary) == dict(other.unary)
            and dict(self.binary) == dict(other.binary)
            and dict(self.roots) == dict(other.roots)
        )

    __hash__ = None

    @property
    def universe(self) -> range:
        return range(self.size)

    @property
    def vocabulary(self) -> tuple[frozenset, frozenset]:
        return frozenset(self.unary), frozenset(self.binary)

    def holds(self, name: str, *args: int) -> bool:
        if len(args) == 1:
            rel = self.unary.get(name)
        else:
            rel = self.binary.get(name)
            args = tuple(args)
        if rel is None:
            raise VocabularyError(f"unknown relation symbol {name!r}")
        return (args[0] if len(args) == 1 else args) in rel

    @cached_property
    def parent(self) -> dict:
        return {b: a for a, b in self.binary.get(EDGE, ())}

    @cached_property
    def children(self) -> dict:
        out = {}
        for a, b in sorted(self.binary.get(EDGE, ())):
            out.setdefault(a, []).append(b)
        return out

    @cached_property
    def successors(self) -> dict:
        """name -> {a: sorted list of b with name(a, b)}."""
        out = {}
        for name, pairs in self.binary.items():
            table = {}
            for a, b in sorted(pairs):
                table.setdefault(a, []).append(b)
            out[name] = table
        return out

    @cached_property
    def predecessors(self) -> dict:
        """name -> {b: sorted list of a with name(a, b)}."""
        out = {}
        for name, pairs in self.binary.items():
            table = {}
            for a, b in sorted(pairs):
                table.setdefault(b, []).append(a)
            out[name] = table
        return out

    def descendants(self, x: int, depth: int) -> list[int]:
        """``x`` and every node reachable from it by at most ``depth`` Edge steps."""
        out = [x]
        frontier = [x]
        kids = self.children
        for _ in range(depth):
            nxt = []
            for v in frontier:
                nxt.extend(kids.get(v, ()))
            if not nxt:
                break
            out.extend(nxt)
            frontier = nxt
        return out

    def induced(self, elements: Sequence[int]) -> "FiniteStructure":
        """Induced substructure; element ``elements[i]`` becomes ``i``."""
        index = {x: i for i, x in enumerate(elements)}
        if len(index) != len(elements):
            raise ValueError("induced() needs distinct elements")
        unary = {k: [index[x] for x in v if x in index] for k, v in self.unary.items()}
        binary = {
            k: [(index[a], index[b]) for a, b in v if a in index and b in index]
            for k, v in self.binary.items()
        }
        roots = {c: index[r] for c, r in self.roots.items() if r in index}
        return FiniteStructure(len(index), unary, binary, roots)

    def relabel(self, perm: Sequence[int]) -> "FiniteStructure":
        """Copy in which old element ``x`` is renamed ``perm[x]``."""
        if sorted(perm) != list(range(self.size)):
            raise ValueError("relabel() needs a permutation of the universe")
        unary = {k: [perm[x] for x in v] for k, v in self.unary.items()}
        binary = {k: [(perm[a], perm[b]) for a, b in v] for k, v in self.binary.items()}
        roots = {c: perm[r] for c, r in self.roots.items()}
        return FiniteStructure(self.size, unary, binary, roots)

    def with_relations(self, unary=None, binary=None, roots=None) -> "FiniteStructure":
        u = dict(self.unary)
        u.update(unary or {})
        b = dict(self.binary)
        b.update(binary or {})
        r = dict(self.roots)
        r.update(roots or {})
        return FiniteStructure(self.size, u, b, r)

    def to_dict(self) -> dict:
        return {
            "universe": list(range(self.size)),
            "unary": {k: sorted(v) for k, v in self.unary.items()},
            "binary": {k: [list(p) for p in sorted(v)] for k, v in self.binary.items()},
            "roots": dict(self.roots),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FiniteStructure":
        extra = set(data) - {"universe", "unary", "binary", "roots"}
        if extra:
            raise ValueError(f"unknown structure keys: {sorted(extra)}")
        universe = list(data["universe"])
        if universe != list(range(len(universe))):
            raise ValueError("universe must be the dense range 0..n-1")
        binary = {k: [tuple(p) for p in v] for k, v in data.get("binary", {}).items()}
        for k, v in binary.items():
            if any(len(p) != 2 for p in v):
                raise ValueError(f"binary relation {k} has a non-pair entry")
        return cls(len(universe), data.get("unary", {}), binary, data.get("roots", {}))

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "FiniteStructure":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        rels = ", ".join(list(self.unary) + list(self.binary))
        return f"FiniteStructure(size={self.size}, relations=[{rels}])"


def dumps(obj) -> str:
    """Canonical JSON text used for every artifact (sorted keys, fixed spacing)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def disjoint_union(parts: Sequence[FiniteStructure]) -> tuple[FiniteStructure, list[int]]:
    """Disjoint union, numbering each part consecutively. Returns offsets too.

    Root components keep their names when they do not clash; clashes are
    prefixed with the part index.
    """
    offsets = []
    unary, binary, roots = {}, {}, {}
    base = 0
    for idx, part in enumerate(parts):
        offsets.append(base)
        for k, v in part.unary.items():
            unary.setdefault(k, set()).update(x + base for x in v)
        for k, v in part.binary.items():
            binary.setdefault(k, set()).update((a + base, b + base) for a, b in v)
        for c, r in part.roots.items():
            name = c if c not in roots else f"{idx}.{c}"
            roots[name] = r + base
        base += part.size
    return FiniteStructure(base, unary, binary, roots), offsets


def extract_sort(s: FiniteStructure, tag: str) -> FiniteStructure:
    """Induced substructure on the elements satisfying unary ``tag``.

    Elements keep their relative order and the vocabulary is unchanged, so
    the same sort extracted from two copies can be compared directly.
    """
    if tag not in s.unary:
        raise VocabularyError(f"unknown tag {tag!r}")
    sub = s.induced(sorted(s.unary[tag]))
    return sub


def scramble(s: FiniteStructure, seed: int) -> tuple[FiniteStructure, list[int]]:
    """Seeded random relabelling. Returns the copy and the permutation used."""
    perm = list(range(s.size))
    random.Random(seed).shuffle(perm)
    return s.relabel(perm), perm


def random_structure(
    rng: random.Random,
    size: int,
    unary: Sequence[str] = ("P",),
    binary: Sequence[str] = ("E",),
    density: float = 0.3,
) -> FiniteStructure:
    """Each unary fact and each binary pair holds independently with ``density``."""
    u = {k: [x for x in range(size) if rng.random() < density] for k in unary}
    b = {
        k: [(x, y) for x in range(size) for y in range(size) if rng.random() < density]
        for k in binary
    }
    return FiniteStructure(size, u, b)


@dataclass(frozen=True, eq=False)
class Tree:
    """A finite rooted tree on nodes ``0..n-1``, given by its parent array.

    ``labels`` is optional and only matters for :func:`canonical_form`.
    """

    parent: tuple
    labels: tuple | None = None
    provenance: Mapping | None = None

    def __post_init__(self):
        parent = tuple(None if p is None else int(p) for p in self.parent)
        object.__setattr__(self, "parent", parent)
        roots = [v for v, p in enumerate(parent) if p is None]
        if len(roots) != 1:
            raise ValueError(f"tree needs exactly one root, found {len(roots)}")
        if self.labels is not None and len(self.labels) != len(parent):
            raise ValueError("labels must cover every node")
        # reachability from the root rules out cycles
        if len(self._bfs_order()) != len(parent):
            raise ValueError("parent array has a cycle or dangling node")

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return self.parent == other.parent and self.labels == other.labels

    __hash__ = None

    def __len__(self):
        return len(self.parent)

    @cached_property
    def root(self) -> int:
        return self.parent.index(None)

    @cached_property
    def children(self) -> tuple:
        kids = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p is not None:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    def _bfs_order(self):
        kids = [[] for _ in self.parent]
        root = None
        for v, p in enumerate(self.parent):
            if p is None:
                root = v
            elif 0 <= p < len(self.parent):
                kids[p].append(v)
        order, queue = [], deque([root])
        seen = set()
        while queue:
            v = queue.popleft()
            if v in seen:
                break
            seen.add(v)
            order.append(v)
            queue.extend(kids[v])
        return order

    @cached_property
    def depth(self) -> int:
        d = {self.root: 0}
        for v in self._bfs_order()[1:]:
            d[v] = d[self.parent[v]] + 1
        return max(d.values())

    def subtree_nodes(self, v: int) -> list[int]:
        out, stack = [], [v]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(reversed(self.children[x]))
        return sorted(out)

    def subtree(self, v: int) -> "Tree":
        nodes = self.subtree_nodes(v)
        index = {x: i for i, x in enumerate(nodes)}
        parent = tuple(None if x == v else index[self.parent[x]] for x in nodes)
        labels = None if self.labels is None else tuple(self.labels[x] for x in nodes)
        return Tree(parent, labels)

    @classmethod
    def from_nested(cls, nested, provenance=None) -> "Tree":
        """Build from nested lists (``[]`` is a leaf, ``[a, b]`` a node with two
        children), numbering nodes in breadth-first order."""
        parent = [None]
        queue = deque([(nested, 0)])
        while queue:
            node, idx = queue.popleft()
            for child in node:
                parent.append(idx)
                queue.append((child, len(parent) - 1))
        return cls(tuple(parent), None, provenance)

    def to_structure(self, component: str = "tree") -> FiniteStructure:
        edges = [(p, v) for v, p in enumerate(self.parent) if p is not None]
        return FiniteStructure(len(self), {ROOT: [self.root]}, {EDGE: edges}, {component: self.root})

    @classmethod
    def from_structure(cls, s: FiniteStructure, elements: Sequence[int] | None = None) -> "Tree":
        """Read a tree off the Edge relation of ``s`` restricted to ``elements``."""
        if elements is None:
            elements = list(s.universe)
        index = {x: i for i, x in enumerate(elements)}
        parent = [None] * len(elements)
        for a, b in s.binary.get(EDGE, ()):
            if a in index and b in index:
                parent[index[b]] = index[a]
        return cls(tuple(parent))

    def relabel(self, perm: Sequence[int]) -> "Tree":
        parent = [None] * len(self)
        for v, p in enumerate(self.parent):
            parent[perm[v]] = None if p is None else perm[p]
        labels = None
        if self.labels is not None:
            labels = [None] * len(self)
            for v, lab in enumerate(self.labels):
                labels[perm[v]] = lab
            labels = tuple(labels)
        return Tree(tuple(parent), labels, self.provenance)

    def to_dict(self) -> dict:
        data = self.to_structure().to_dict()
        if self.provenance is not None:
            return {"provenance": dict(self.provenance), "structure": data}
        return {"structure": data}

    def __repr__(self):
        return f"Tree(size={len(self)}, depth={self.depth})"


def canonical_form(t: Tree, v: int | None = None) -> str:
    """AHU code of the (labelled) rooted tree below ``v`` (default: the root).

    Two trees get equal codes iff they are isomorphic as labelled rooted trees.
    """
    if v is None:
        v = t.root
    return subtree_codes(t)[v]


def subtree_codes(t: Tree) -> list[str]:
    """AHU code of every subtree, computed bottom-up in one pass."""
    codes = [""] * len(t)
    order = t._bfs_order()
    for x in reversed(order):
        inner = "".join(sorted(codes[c] for c in t.children[x]))
        lab = "" if t.labels is None else str(t.labels[x])
        codes[x] = f"{lab}({inner})"
    return codes


def forest_codes(s: FiniteStructure) -> dict[int, str]:
    """AHU code of the Edge-subtree below every element of ``s``."""
    kids = s.children
    parent = s.parent
    codes: dict[int, str] = {}
    # post-order over each Edge tree
    tops = [x for x in s.universe if x not in parent]
    for top in tops:
        stack = [(top, False)]
        while stack:
            x, expanded = stack.pop()
            if expanded:
                codes[x] = "(" + "".join(sorted(codes[c] for c in kids.get(x, ()))) + ")"
            else:
                stack.append((x, True))
                stack.extend((c, False) for c in kids.get(x, ()))
    return codes


@dataclass(frozen=True)
class IsoWitness:
    """A finite injective map from a left universe into a right universe."""

    pairs: tuple
    total: bool

    def __post_init__(self):
        pairs = tuple(sorted((int(a), int(b)) for a, b in self.pairs))
        object.__setattr__(self, "pairs", pairs)
        lefts = [a for a, _ in pairs]
        rights = [b for _, b in pairs]
        if len(set(lefts)) != len(lefts):
            raise ValueError("witness maps an element twice")
        if len(set(rights)) != len(rights):
            raise ValueError("witness is not injective")

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int] | Sequence[int], left_size: int | None = None):
        if not isinstance(mapping, Mapping):
            mapping = dict(enumerate(mapping))
        total = left_size is not None and set(mapping) == set(range(left_size))
        return cls(tuple(mapping.items()), total)

    @cached_property
    def mapping(self) -> dict:
        return dict(self.pairs)

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def __len__(self):
        return len(self.pairs)

    def inverse(self) -> "IsoWitness":
        return IsoWitness(tuple((b, a) for a, b in self.pairs), self.total)

    def then(self, other: "IsoWitness") -> "IsoWitness":
        """Composite map: first ``self``, then ``other``."""
        m = other.mapping
        return IsoWitness(tuple((a, m[b]) for a, b in self.pairs), self.total and other.total)

    def restrict(self, elements: Iterable[int]) -> dict:
        m = self.mapping
        return {x: m[x] for x in elements}


def identity_witness(s: FiniteStructure) -> IsoWitness:
    return IsoWitness(tuple((x, x) for x in s.universe), True)
