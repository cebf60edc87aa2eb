"""Back-and-forth trees: builders, rank classification, C_x sequences,
isomorphism construction and isolating formulas.

"Infinitely many" copies are instantiated exactly ``w`` times.  At the limit
level the fundamental sequence for omega is fixed as ``beta_i = i + 1`` and
the helper trees L(omega, k) keep the children for indices ``0..I``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

from catwork.errors import (
    IncompatibleTruncationError,
    MalformedTreeError,
    NotIsomorphicError,
)
from catwork.logic.evaluate import evaluate
from catwork.logic.formulas import Eq, Formula, Not, conj, exists, neq, rel
from catwork.logic.relativize import phi_n, relativize
from catwork.structures import EDGE, ROOT, IsoWitness, Tree, subtree_codes

OMEGA = "omega"
INF = "inf"
FUNDAMENTAL_SEQUENCE = "beta_i = i+1"


@dataclass(frozen=True)
class TruncationParams:
    w: int = 3
    I: int = 4
    n_max: int = 4

    def __post_init__(self):
        if self.w < 1 or self.I < 1 or self.n_max < 1:
            raise ValueError("w, I and n_max must all be >= 1")


@dataclass(frozen=True)
class TreeKind:
    """``family`` is "A", "E" or "L"; ``rank`` is an int or ``"omega+1"``
    (for A/E) or ``"omega"`` (for L, with ``k`` an int or ``"inf"``)."""

    family: str
    rank: int | str
    k: int | str | None = None

    def __str__(self):
        if self.family == "L":
            return f"L(omega,{self.k})"
        return f"{self.family}({self.rank})"


def A(n: int | str) -> TreeKind:
    return TreeKind("A", n)


def E(n: int | str) -> TreeKind:
    return TreeKind("E", n)


def L(k: int | str) -> TreeKind:
    return TreeKind("L", OMEGA, k)


OMEGA_PLUS_1 = "omega+1"


def _nested(kind: TreeKind, t: TruncationParams):
    @lru_cache(maxsize=None)
    def fin(family, n):
        if n == 1:
            return () if family == "A" else tuple(() for _ in range(t.w))
        if family == "A":
            return tuple(fin("E", n - 1) for _ in range(t.w))
        return tuple(fin("A", n - 1) for _ in range(t.w)) + tuple(fin("E", n - 1) for _ in range(t.w))

    def lim(k):
        # child i is a copy of A(i+1) while i <= k, then E(i+1)
        return tuple(
            fin("A" if (k == INF or i <= k) else "E", i + 1) for i in range(t.I + 1)
        )

    if kind.family == "L":
        if kind.k != INF and not (isinstance(kind.k, int) and 0 <= kind.k <= t.I):
            raise ValueError(f"L(omega, k) needs k in 0..{t.I} or 'inf'")
        return lim(kind.k)
    if kind.rank == OMEGA_PLUS_1:
        # finite k only up to I-1: L(omega, I) is indistinguishable from L(omega, inf)
        kids = [lim(k) for k in range(t.I) for _ in range(t.w)]
        if kind.family == "E":
            kids += [lim(INF) for _ in range(t.w)]
        return tuple(kids)
    n = kind.rank
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"bad rank {n!r}")
    if n > t.n_max:
        raise ValueError(f"rank {n} over cap {t.n_max}")
    return fin(kind.family, n)


def build_tree(kind: TreeKind, t: TruncationParams | None = None) -> Tree:
    """The truncated back-and-forth tree of the given kind, numbered breadth-first."""
    t = t or TruncationParams()
    prov = {
        "kind": str(kind),
        "n": kind.rank,
        "w": t.w,
        "I": t.I,
        "fundamental_sequence": FUNDAMENTAL_SEQUENCE,
    }
    return Tree.from_nested(_nested(kind, t), provenance=prov)


# --- classification ----------------------------------------------------------

def shape_kind(tree: Tree, n: int, v: int | None = None) -> str:
    """Structural A/E kind of the rank-n subtree below ``v``; raises if the
    subtree is not a truncation of A_n or E_n."""
    if v is None:
        v = tree.root
    kids = tree.children[v]
    if n == 1:
        if not kids:
            return "A"
        if all(not tree.children[c] for c in kids):
            return "E"
        raise MalformedTreeError(f"node {v}: rank-1 tree with grandchildren")
    if not kids:
        raise MalformedTreeError(f"node {v}: rank-{n} tree with no children")
    kinds = {shape_kind(tree, n - 1, c) for c in kids}
    if kinds == {"E"}:
        return "A"
    if kinds == {"A", "E"}:
        return "E"
    raise MalformedTreeError(f"node {v}: rank-{n} tree whose children are all A")


@lru_cache(maxsize=None)
def _phi(n: int) -> Formula:
    return phi_n(n)


def classify(tree: Tree, n: int) -> str:
    """"E" iff the tree satisfies phi_n.  The shape is validated first."""
    shape_kind(tree, n)
    return "E" if evaluate(_phi(n), tree.to_structure()) else "A"


class RankOracle:
    """Counts classification queries; the desk-scale stand-in for the n-th jump."""

    def __init__(self):
        self.calls = 0

    def classify(self, tree: Tree, n: int) -> str:
        self.calls += 1
        return classify(tree, n)

    def rank_of(self, tree: Tree, n_max: int) -> int:
        """Least rank at which ``tree`` is a well-formed family member."""
        for n in range(1, n_max + 1):
            self.calls += 1
            try:
                shape_kind(tree, n)
            except MalformedTreeError:
                continue
            return n
        raise MalformedTreeError(f"not a back-and-forth tree of rank <= {n_max}")


def limit_token(I: int) -> str:
    return f"≥{I}-or-∞"


def classify_limit(tree: Tree, t: TruncationParams | None = None, oracle: RankOracle | None = None):
    """k for a truncated L(omega, k), or the ambiguity token when every kept
    child is A-kind (k >= I and k = inf cannot be told apart)."""
    t = t or TruncationParams()
    oracle = oracle or RankOracle()
    kids = tree.children[tree.root]
    if len(kids) != t.I + 1:
        raise MalformedTreeError(f"expected {t.I + 1} children, found {len(kids)}")
    by_rank = {}
    for c in kids:
        sub = tree.subtree(c)
        r = oracle.rank_of(sub, t.I + 1)
        if r in by_rank:
            raise MalformedTreeError(f"two children of rank {r}")
        by_rank[r] = oracle.classify(sub, r)
    if sorted(by_rank) != list(range(1, t.I + 2)):
        raise MalformedTreeError("children do not cover each index exactly once")
    kinds = [by_rank[r] for r in range(1, t.I + 2)]
    leading = next((i for i, k in enumerate(kinds) if k == "E"), len(kinds))
    if leading == 0 or any(k == "A" for k in kinds[leading:]):
        raise MalformedTreeError(f"child kinds {kinds} are not A...A E...E")
    if leading == len(kinds):
        return limit_token(t.I)
    return leading - 1


# --- Sigma_n predicates and the C_x sequence ------------------------------

@dataclass(frozen=True)
class SigmaPredicateSpec:
    """``x in S  <=>  exists y1 forall y2 exists y3 ... matrix(x, y1, ..., yn)``
    with every ``y`` ranging over ``0..witness_cap-1`` and ``x`` over
    ``0..domain_cap-1``."""

    rank: int
    matrix: Callable[..., bool] = field(compare=False)
    domain_cap: int = 20
    witness_cap: int = 3
    name: str = ""

    @classmethod
    def from_table(cls, rank, true_tuples, domain_cap=20, witness_cap=3, name=""):
        table = frozenset(tuple(t) for t in true_tuples)
        return cls(rank, lambda *args: tuple(args) in table, domain_cap, witness_cap, name)

    def holds(self, x: int) -> bool:
        """Direct bounded-quantifier evaluation."""

        def go(prefix, depth):
            ys = range(self.witness_cap)
            if depth == self.rank:
                return bool(self.matrix(x, *prefix))
            if depth % 2 == 0:
                return any(go(prefix + (y,), depth + 1) for y in ys)
            return all(go(prefix + (y,), depth + 1) for y in ys)

        return go((), 0)


def c_sequence(spec: SigmaPredicateSpec, x: int, w: int = 1) -> Tree:
    """Tree that is an E_n truncation iff x is in the set, else an A_n truncation.

    Built uniformly from the matrix: a rank-1 tree gains ``w`` leaves at the
    first stage a witness appears; a rank-k tree has ``w`` filler copies of
    E_{k-1} plus ``w`` copies of the rank-(k-1) tree for the complementary
    question at each witness candidate.
    """
    if not 0 <= x < spec.domain_cap:
        raise ValueError(f"x={x} outside domain cap {spec.domain_cap}")
    t = TruncationParams(w=w, n_max=max(spec.rank, 1))
    filler = {k: _nested(E(k), t) for k in range(1, spec.rank)}

    def tree(k, prefix, negated):
        if k == 1:
            for y in range(spec.witness_cap):
                if bool(spec.matrix(x, *prefix, y)) != negated:
                    return tuple(() for _ in range(w))
            return ()
        kids = [filler[k - 1]] * w
        for y in range(spec.witness_cap):
            sub = tree(k - 1, prefix + (y,), not negated)
            kids.extend([sub] * w)
        return tuple(kids)

    nested = tree(spec.rank, (), False)
    return Tree.from_nested(nested, provenance={"kind": f"C[{spec.name}]({x})", "n": spec.rank, "w": w})


# --- isomorphisms between family members ----------------------------------

def iso_baf(left: Tree, right: Tree, n: int, oracle: RankOracle | None = None) -> IsoWitness:
    """Isomorphism between two truncations of the same rank-n tree.

    Children are classified one rank down and matched like to like, ties
    broken by canonical code and then by least index.
    """
    oracle = oracle or RankOracle()
    kl, kr = oracle.classify(left, n), oracle.classify(right, n)
    if kl != kr:
        raise NotIsomorphicError(f"not isomorphic at rank {n}: {kl} vs {kr}")
    codes_l, codes_r = subtree_codes(left), subtree_codes(right)
    mapping = {}

    def match(u, v, rank):
        mapping[u] = v
        ku, kv = left.children[u], right.children[v]
        if len(ku) != len(kv):
            raise IncompatibleTruncationError(f"incompatible truncations at {u}->{v}")
        if rank <= 1:
            for a, b in zip(ku, kv):
                mapping[a] = b
            return

        def key(tree, codes, c):
            return (oracle.classify(tree.subtree(c), rank - 1), codes[c], c)

        gl = sorted(key(left, codes_l, c) for c in ku)
        gr = sorted(key(right, codes_r, c) for c in kv)
        for (ka, ca, a), (kb, cb, b) in zip(gl, gr):
            if ka != kb or ca != cb:
                raise IncompatibleTruncationError(f"incompatible truncations at {a}->{b}")
            match(a, b, rank - 1)

    match(left.root, right.root, n)
    return IsoWitness(tuple(mapping.items()), len(mapping) == len(left) == len(right))


# --- isolating formulas -------------------------------------------------------

def tuple_vars(k: int) -> list[str]:
    return [f"t{i}" for i in range(k)]


def kind_formula(kind: str, var: str, rank: int) -> Formula:
    """The subtree below ``var`` is E_rank (or A_rank)."""
    phi = relativize(_phi(rank), var, rank)
    return phi if kind == "E" else Not(phi)


def isolating_formula(
    tree: Tree, tup: Sequence[int], n: int, variables: Sequence[str] | None = None
) -> Formula:
    """Formula in ``variables`` (default t0, t1, ...) whose satisfiers in the
    tree are exactly the automorphism orbit of ``tup``.

    Each child of a node on the way to a tuple element gets a variable, an
    Edge link to its parent, its A/E kind one rank down and a recursive
    description; siblings are pairwise distinct.
    """
    shape_kind(tree, n)
    variables = list(variables or tuple_vars(len(tup)))
    if len(variables) != len(tup):
        raise ValueError("one variable per tuple position")
    for x in tup:
        if not 0 <= x < len(tree):
            raise ValueError(f"node {x} not in tree")
    fresh = (f"w{i}" for i in itertools.count())

    def var_for(node):
        for i, x in enumerate(tup):
            if x == node:
                return variables[i], False
        return next(fresh), True

    def ancestors_in_tuple(node):
        return any(_is_ancestor(tree, node, x) for x in tup)

    def describe(node, var, rank):
        parts = [Eq(variables[i], var) for i, x in enumerate(tup) if x == node and variables[i] != var]
        kids = [c for c in tree.children[node] if ancestors_in_tuple(c)]
        kid_vars, quantified, body = [], [], []
        for c in kids:
            cv, is_fresh = var_for(c)
            kid_vars.append(cv)
            if is_fresh:
                quantified.append(cv)
            body.append(rel(EDGE, var, cv))
            if rank - 1 >= 1:
                body.append(kind_formula(classify(tree.subtree(c), rank - 1), cv, rank - 1))
            body.append(describe(c, cv, rank - 1))
        for a, b in itertools.combinations(kid_vars, 2):
            body.append(neq(a, b))
        if body:
            parts.append(exists(quantified, conj(*body)))
        return conj(*parts)

    root_var, root_fresh = var_for(tree.root)
    phi = conj(rel(ROOT, root_var), describe(tree.root, root_var, n))
    return exists([root_var], phi) if root_fresh else phi


def _is_ancestor(tree: Tree, a: int, x: int) -> bool:
    """True if ``a`` is ``x`` or an ancestor of ``x``."""
    while x is not None:
        if x == a:
            return True
        x = tree.parent[x]
    return False
