"""Tarskian evaluation on finite structures.

Quantifiers whose body is guarded (``exists z (G and ...)`` or
``forall z (not G or ...)`` with ``G`` an equality, a binary atom whose other
argument is bound, a unary atom or a Desc atom) range over the guard's
candidates only; this is what keeps relativized sentences cheap on large
trees.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Sequence

from catwork.errors import CapsError, UnboundVariableError, VocabularyError
from catwork.logic.formulas import (
    And,
    Desc,
    Eq,
    Exists,
    Forall,
    Formula,
    Not,
    Or,
    Rel,
    Truth,
    free_vars,
    quantifier_count,
    relation_symbols,
)
from catwork.structures import FiniteStructure


def check_vocabulary(phi: Formula, s: FiniteStructure) -> None:
    for name, arity in relation_symbols(phi):
        table = s.unary if arity == 1 else s.binary if arity == 2 else None
        if table is None or name not in table:
            raise VocabularyError(f"unknown relation symbol {name}/{arity}")


def evaluate(phi: Formula, s: FiniteStructure, assignment: Mapping[str, int] | None = None) -> bool:
    """Truth of ``phi`` in ``s`` under ``assignment``."""
    env = dict(assignment or {})
    missing = free_vars(phi) - set(env)
    if missing:
        raise UnboundVariableError(f"unbound variables: {sorted(missing)}")
    check_vocabulary(phi, s)
    return _Evaluator(s).ev(phi, env)


def satisfiers(
    phi: Formula, s: FiniteStructure, variables: Sequence[str] | None = None
) -> set[tuple]:
    """Every tuple (over ``variables``, default: sorted free variables) satisfying phi."""
    if variables is None:
        variables = sorted(free_vars(phi))
    missing = free_vars(phi) - set(variables)
    if missing:
        raise UnboundVariableError(f"unbound variables: {sorted(missing)}")
    check_vocabulary(phi, s)
    ev = _Evaluator(s)
    out = set()

    def extend(i, env):
        if i == len(variables):
            if ev.ev(phi, dict(env)):
                out.add(tuple(env[v] for v in variables))
            return
        v = variables[i]
        if v in env:  # repeated variable name
            extend(i + 1, env)
            return
        cand = _necessary(phi, v, s, env, ev)
        for x in (s.universe if cand is None else sorted(cand)):
            env[v] = x
            extend(i + 1, env)
        env.pop(v, None)

    extend(0, {})
    return out


def _necessary(phi, var, s, env, ev, depth=2):
    """A set containing every value of ``var`` in any assignment extending
    ``env`` that satisfies ``phi``, read off atoms that every satisfier must
    make true; None if nothing useful is known.  ``depth`` bounds how many
    existential witnesses are expanded; witnesses are first filtered by the
    body's conjuncts that are already fully determined.
    """
    fv = ev.free_set
    if var not in fv(phi):
        return None
    if isinstance(phi, Rel):
        a = phi.args
        if a == (var,):
            return set(s.unary[phi.name])
        if len(a) == 2 and a[0] != a[1]:
            if a[1] == var:
                if a[0] in env:
                    return set(s.successors.get(phi.name, {}).get(env[a[0]], ()))
                return {y for _, y in s.binary[phi.name]}
            if a[0] == var:
                if a[1] in env:
                    return set(s.predecessors.get(phi.name, {}).get(env[a[1]], ()))
                return {x for x, _ in s.binary[phi.name]}
        return None
    if isinstance(phi, Eq):
        other = phi.right if phi.left == var else phi.left
        if other != var and other in env:
            return {env[other]}
        return None
    if isinstance(phi, And):
        out = None
        for p in phi.parts:
            c = _necessary(p, var, s, env, ev, depth)
            if c is not None:
                out = c if out is None else out & c
        return out
    if isinstance(phi, Or):
        out = set()
        for p in phi.parts:
            c = _necessary(p, var, s, env, ev, depth)
            if c is None:
                return None
            out |= c
        return out
    if isinstance(phi, Exists):
        inner = {k: v for k, v in env.items() if k != phi.var}
        if depth > 0:
            witnesses = _necessary(phi.body, phi.var, s, inner, ev, 0)
            if witnesses is not None and len(witnesses) <= 64:
                known = set(inner) | {phi.var}
                parts = phi.body.parts if isinstance(phi.body, And) else (phi.body,)
                local = [p for p in parts if fv(p) <= known]
                witnesses = [
                    c for c in sorted(witnesses)
                    if all(ev.ev(p, {**inner, phi.var: c}) for p in local)
                ]
                out = set()
                for c in witnesses:
                    got = _necessary(phi.body, var, s, {**inner, phi.var: c}, ev, depth - 1)
                    if got is None:
                        break
                    out |= got
                else:
                    return out
        return _necessary(phi.body, var, s, inner, ev, depth)
    return None


class _Evaluator:
    """Evaluates formulas on one structure.

    Quantified subformulas are memoised on the values of their free
    variables, and connectives try their quantifier-free parts first.
    """

    def __init__(self, s: FiniteStructure):
        self.s = s
        self.parent = s.parent
        self._desc = {}
        self._memo = {}
        self._fv = {}
        self._fvs = {}
        self._guards = {}
        self._order = {}
        self._keep = []

    def free(self, phi):
        key = id(phi)
        fv = self._fv.get(key)
        if fv is None:
            fv = self._fv[key] = tuple(sorted(free_vars(phi)))
            self._keep.append(phi)
        return fv

    def free_set(self, phi):
        key = id(phi)
        fs = self._fvs.get(key)
        if fs is None:
            fs = self._fvs[key] = frozenset(self.free(phi))
        return fs

    def ordered(self, phi):
        key = id(phi)
        parts = self._order.get(key)
        if parts is None:
            parts = self._order[key] = tuple(sorted(phi.parts, key=lambda p: quantifier_count(p) > 0))
            self._keep.append(phi)
        return parts

    def descendants(self, x, d):
        key = (x, d)
        if key not in self._desc:
            self._desc[key] = self.s.descendants(x, d)
        return self._desc[key]

    def is_desc(self, top, z, d):
        parent = self.parent
        for _ in range(d + 1):
            if z == top:
                return True
            if z not in parent:
                return False
            z = parent[z]
        return False

    def ev(self, phi, env) -> bool:
        if isinstance(phi, Truth):
            return phi.value
        if isinstance(phi, Eq):
            return env[phi.left] == env[phi.right]
        if isinstance(phi, Rel):
            if len(phi.args) == 1:
                return env[phi.args[0]] in self.s.unary[phi.name]
            return (env[phi.args[0]], env[phi.args[1]]) in self.s.binary[phi.name]
        if isinstance(phi, Desc):
            return self.is_desc(env[phi.top], env[phi.var], phi.depth)
        if isinstance(phi, Not):
            return not self.ev(phi.body, env)
        if isinstance(phi, And):
            return all(self.ev(p, env) for p in self.ordered(phi))
        if isinstance(phi, Or):
            return any(self.ev(p, env) for p in self.ordered(phi))
        if isinstance(phi, (Exists, Forall)):
            key = (id(phi), tuple(env[v] for v in self.free(phi)))
            hit = self._memo.get(key)
            if hit is None:
                hit = self._memo[key] = self.quantify(phi, env)
            return hit
        raise TypeError(f"not a formula: {phi!r}")

    def quantify(self, phi, env) -> bool:
        if isinstance(phi, Exists):
            var, body = phi.var, phi.body
            saved = env.get(var, _MISSING)
            try:
                for x in self.domain(var, body, env, positive=True):
                    env[var] = x
                    if self.ev(body, env):
                        return True
                return False
            finally:
                _restore(env, var, saved)
        if isinstance(phi, Forall):
            var, body = phi.var, phi.body
            saved = env.get(var, _MISSING)
            try:
                for x in self.domain(var, body, env, positive=False):
                    env[var] = x
                    if not self.ev(body, env):
                        return False
                return True
            finally:
                _restore(env, var, saved)

    def domain(self, var, body, env, positive):
        key = (id(body), positive, var)
        guards = self._guards.get(key)
        if guards is None:
            if positive:
                raw = body.parts if isinstance(body, And) else (body,)
            else:
                parts = body.parts if isinstance(body, Or) else (body,)
                raw = tuple(p.body for p in parts if isinstance(p, Not))
            guards = self._guards[key] = tuple(g for g in raw if _may_guard(g, var))
            self._keep.append(body)
        best = None
        for g in guards:
            cand = self.guard_candidates(var, g, env)
            if cand is not None and (best is None or len(cand) < len(best)):
                best = cand
                if len(best) <= 1:
                    break
        return self.s.universe if best is None else best

    def guard_candidates(self, var, g, env):
        if isinstance(g, Eq):
            other = g.right if g.left == var else g.left if g.right == var else None
            if other is not None and other != var and other in env:
                return (env[other],)
        elif isinstance(g, Rel):
            if len(g.args) == 1 and g.args[0] == var:
                return sorted(self.s.unary[g.name])
            if len(g.args) == 2 and g.args[1] == var and g.args[0] != var and g.args[0] in env:
                return self.s.successors.get(g.name, {}).get(env[g.args[0]], ())
            if len(g.args) == 2 and g.args[0] == var and g.args[1] != var and g.args[1] in env:
                return self.s.predecessors.get(g.name, {}).get(env[g.args[1]], ())
        elif isinstance(g, Desc):
            if g.var == var and g.top != var and g.top in env:
                return self.descendants(env[g.top], g.depth)
        return None


def _may_guard(g, var) -> bool:
    if isinstance(g, Eq):
        return var in (g.left, g.right)
    if isinstance(g, Rel):
        return var in g.args
    if isinstance(g, Desc):
        return g.var == var
    return False


_MISSING = object()


def _restore(env, var, saved):
    if saved is _MISSING:
        env.pop(var, None)
    else:
        env[var] = saved


def plain_elements(s: FiniteStructure) -> list[int]:
    """Elements satisfying only the unary relations that hold of everything."""
    everywhere = {k for k, v in s.unary.items() if len(v) == s.size}
    marked = set()
    for k, v in s.unary.items():
        if k not in everywhere:
            marked |= v
    return [x for x in s.universe if x not in marked]


def bounded_substructure(phi: Formula, s: FiniteStructure, params: Sequence[int]) -> list[int]:
    """Domain used by :func:`eval_via_bounded_substructure`.

    The parameters, every marked (non-plain) element, and the first
    ``k + len(params) + 1`` plain elements outside the parameters, where ``k``
    counts the quantifiers of ``phi``.
    """
    if s.binary and any(s.binary.values()):
        raise ValueError("bounded-substructure evaluation needs a purely unary structure")
    k = quantifier_count(phi)
    plain = plain_elements(s)
    marked = [x for x in s.universe if x not in set(plain)]
    need = k + len(params) + 1
    fresh = [x for x in plain if x not in set(params)][:need]
    if len(fresh) < need:
        raise CapsError(
            f"too few plain elements in truncation: need {need}, have {len(fresh)}"
        )
    return sorted(set(params) | set(marked) | set(fresh))


def eval_via_bounded_substructure(
    phi: Formula, s: FiniteStructure, assignment: Mapping[str, int] | None = None
) -> bool:
    """Evaluate ``phi`` on a small substructure that provably decides it.

    ``s`` is one sort of a coded unary structure: one marked element per
    occupied relation and an unbounded supply of plain elements.
    """
    env = dict(assignment or {})
    missing = free_vars(phi) - set(env)
    if missing:
        raise UnboundVariableError(f"unbound variables: {sorted(missing)}")
    check_vocabulary(phi, s)
    params = sorted(set(env.values()))
    dom = bounded_substructure(phi, s, params)
    index = {x: i for i, x in enumerate(dom)}
    sub = s.induced(dom)
    return _Evaluator(sub).ev(phi, {v: index[x] for v, x in env.items()})
