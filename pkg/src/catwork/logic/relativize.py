"""Relativization to subtrees and boxes, and the distinguishing sentences phi_n."""

from __future__ import annotations

from catwork.errors import VariableCaptureError
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
    bound_vars,
    conj,
    disj,
    exists,
    neq,
    quantifier_rank,
    rel,
)
from catwork.structures import EDGE, ROOT


def relativize(phi: Formula, x: str, depth: int) -> Formula:
    """Bound every quantifier of ``phi`` to the subtree below ``x``.

    Quantifiers range over nodes at most ``depth`` Edge steps below ``x``
    (``x`` included), and ``x`` takes over as the root: ``Root(t)`` becomes
    ``t = x``.
    """
    if x in bound_vars(phi):
        raise VariableCaptureError(f"variable {x!r} is bound in the formula")
    return _bound(phi, lambda z: Desc(x, z, depth), lambda t: Eq(t, x))


def relativize_box(phi: Formula, owner: str, level: int) -> Formula:
    """Bound every quantifier to the box ``{y : T_level(owner, y)}``.

    Box trees carry their own Root marks, so Root atoms are left alone.
    """
    if owner in bound_vars(phi):
        raise VariableCaptureError(f"variable {owner!r} is bound in the formula")
    name = box_relation(level)
    return _bound(phi, lambda z: rel(name, owner, z), None)


def box_relation(level: int) -> str:
    return f"T_{level}"


def _bound(phi, guard, root_sub):
    if isinstance(phi, Exists):
        return Exists(phi.var, conj(guard(phi.var), _bound(phi.body, guard, root_sub)))
    if isinstance(phi, Forall):
        return Forall(phi.var, disj(Not(guard(phi.var)), _bound(phi.body, guard, root_sub)))
    if isinstance(phi, Not):
        return Not(_bound(phi.body, guard, root_sub))
    if isinstance(phi, And):
        return And(tuple(_bound(p, guard, root_sub) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(_bound(p, guard, root_sub) for p in phi.parts))
    if isinstance(phi, Rel) and phi.name == ROOT and root_sub is not None:
        return root_sub(phi.args[0])
    return phi


def child_of_root(x: str, helper: str) -> Formula:
    """``x`` is a child of the root node (``helper`` names the root)."""
    return Exists(helper, conj(rel(ROOT, helper), rel(EDGE, helper, x)))


def phi_n(n: int) -> Formula:
    """Sentence true in E_n and false in A_n.

    ``phi_1 = exists x exists y (x != y)``;
    ``phi_{n+1} = exists x (x is a child of the root and not phi_n[below x])``.
    """
    if n < 1:
        raise ValueError("phi_n is defined for n >= 1")
    if n == 1:
        return exists(["x", "y"], neq("x", "y"))
    x, r = f"x{n}", f"r{n}"
    inner = relativize(phi_n(n - 1), x, n)
    return Exists(x, conj(child_of_root(x, r), Not(inner)))


def phi_rank_profile(n_max: int) -> list[int]:
    return [quantifier_rank(phi_n(n)) for n in range(1, n_max + 1)]
