"""First-order formula AST over a relational vocabulary without function symbols.

Terms are variables only.  Besides the usual connectives there is one
shorthand atom, :class:`Desc`, read "``z`` is ``x`` or a descendant of ``x``
at most ``depth`` Edge steps down".  It counts as atomic for quantifier rank;
:func:`expand_desc` rewrites it into plain first-order form.

Text format (prefix S-expressions)::

    formula := "true" | "false"
             | "(" "=" VAR VAR ")"
             | "(" "rel" NAME VAR+ ")"
             | "(" "desc" VAR VAR INT ")"
             | "(" "not" formula ")"
             | "(" "and" formula* ")" | "(" "or" formula* ")"
             | "(" "exists" VAR formula ")" | "(" "forall" VAR formula ")"

Names and variables are runs of ``[A-Za-z0-9_.]``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Truth:
    value: bool


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple


@dataclass(frozen=True)
class Desc:
    top: str
    var: str
    depth: int


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Union[Truth, Eq, Rel, Desc, Not, And, Or, Exists, Forall]
TRUE = Truth(True)
FALSE = Truth(False)


# --- constructors -----------------------------------------------------------

def rel(name: str, *args: str) -> Rel:
    return Rel(name, tuple(args))


def conj(*parts: Formula) -> Formula:
    flat = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        elif p != TRUE:
            flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.parts)
        elif p != FALSE:
            flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neq(a: str, b: str) -> Formula:
    return Not(Eq(a, b))


def exists(vars_, body: Formula) -> Formula:
    if isinstance(vars_, str):
        vars_ = [vars_]
    for v in reversed(list(vars_)):
        body = Exists(v, body)
    return body


def forall(vars_, body: Formula) -> Formula:
    if isinstance(vars_, str):
        vars_ = [vars_]
    for v in reversed(list(vars_)):
        body = Forall(v, body)
    return body


# --- syntactic measures -----------------------------------------------------

def free_vars(phi: Formula) -> frozenset:
    if isinstance(phi, Truth):
        return frozenset()
    if isinstance(phi, Eq):
        return frozenset((phi.left, phi.right))
    if isinstance(phi, Rel):
        return frozenset(phi.args)
    if isinstance(phi, Desc):
        return frozenset((phi.top, phi.var))
    if isinstance(phi, Not):
        return free_vars(phi.body)
    if isinstance(phi, (And, Or)):
        return frozenset().union(*(free_vars(p) for p in phi.parts))
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def bound_vars(phi: Formula) -> frozenset:
    if isinstance(phi, (Exists, Forall)):
        return bound_vars(phi.body) | {phi.var}
    if isinstance(phi, Not):
        return bound_vars(phi.body)
    if isinstance(phi, (And, Or)):
        return frozenset().union(*(bound_vars(p) for p in phi.parts))
    return frozenset()


def all_vars(phi: Formula) -> frozenset:
    return free_vars(phi) | bound_vars(phi)


def quantifier_rank(phi: Formula) -> int:
    if isinstance(phi, (Truth, Eq, Rel, Desc)):
        return 0
    if isinstance(phi, Not):
        return quantifier_rank(phi.body)
    if isinstance(phi, (And, Or)):
        return max((quantifier_rank(p) for p in phi.parts), default=0)
    return 1 + quantifier_rank(phi.body)


def quantifier_count(phi: Formula) -> int:
    if isinstance(phi, (Truth, Eq, Rel, Desc)):
        return 0
    if isinstance(phi, Not):
        return quantifier_count(phi.body)
    if isinstance(phi, (And, Or)):
        return sum(quantifier_count(p) for p in phi.parts)
    return 1 + quantifier_count(phi.body)


def relation_symbols(phi: Formula) -> frozenset:
    if isinstance(phi, Rel):
        return frozenset([(phi.name, len(phi.args))])
    if isinstance(phi, Not):
        return relation_symbols(phi.body)
    if isinstance(phi, (And, Or)):
        return frozenset().union(*(relation_symbols(p) for p in phi.parts))
    if isinstance(phi, (Exists, Forall)):
        return relation_symbols(phi.body)
    if isinstance(phi, Desc):
        return frozenset([("Edge", 2)])
    return frozenset()


def expand_desc(phi: Formula) -> Formula:
    """Replace every Desc atom by its first-order unfolding through Edge."""
    if isinstance(phi, Desc):
        return _desc_formula(phi.top, phi.var, phi.depth, all_vars(phi))
    if isinstance(phi, Not):
        return Not(expand_desc(phi.body))
    if isinstance(phi, And):
        return And(tuple(expand_desc(p) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(expand_desc(p) for p in phi.parts))
    if isinstance(phi, Exists):
        return Exists(phi.var, expand_desc(phi.body))
    if isinstance(phi, Forall):
        return Forall(phi.var, expand_desc(phi.body))
    return phi


def _desc_formula(top, var, depth, taken):
    """``var = top`` or an Edge path of length 1..depth from top to var."""
    options = [Eq(var, top)]
    names = []
    i = 0
    while len(names) < max(depth - 1, 0):
        cand = f"_p{i}"
        i += 1
        if cand not in taken:
            names.append(cand)
    for length in range(1, depth + 1):
        hops = [top] + names[: length - 1] + [var]
        path = conj(*(rel("Edge", hops[j], hops[j + 1]) for j in range(length)))
        options.append(exists(names[: length - 1], path) if length > 1 else path)
    return disj(*options)


# --- S-expression text format ----------------------------------------------

def to_sexpr(phi: Formula) -> str:
    if isinstance(phi, Truth):
        return "true" if phi.value else "false"
    if isinstance(phi, Eq):
        return f"(= {phi.left} {phi.right})"
    if isinstance(phi, Rel):
        return f"(rel {phi.name} {' '.join(phi.args)})"
    if isinstance(phi, Desc):
        return f"(desc {phi.top} {phi.var} {phi.depth})"
    if isinstance(phi, Not):
        return f"(not {to_sexpr(phi.body)})"
    if isinstance(phi, And):
        return "(and" + "".join(" " + to_sexpr(p) for p in phi.parts) + ")"
    if isinstance(phi, Or):
        return "(or" + "".join(" " + to_sexpr(p) for p in phi.parts) + ")"
    if isinstance(phi, Exists):
        return f"(exists {phi.var} {to_sexpr(phi.body)})"
    if isinstance(phi, Forall):
        return f"(forall {phi.var} {to_sexpr(phi.body)})"
    raise TypeError(f"not a formula: {phi!r}")


_TOKEN = re.compile(r"\s*(\(|\)|[A-Za-z0-9_.=]+)")


def _tokens(text):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad character at {pos}: {text[pos:pos + 10]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_sexpr(text: str) -> Formula:
    toks = _tokens(text)
    try:
        phi, rest = _parse(toks, 0)
    except IndexError:
        raise ValueError("unexpected end of input") from None
    if rest != len(toks):
        raise ValueError("trailing tokens after formula")
    return phi


def _parse(toks, i):
    if i >= len(toks):
        raise ValueError("unexpected end of input")
    t = toks[i]
    if t == "true":
        return TRUE, i + 1
    if t == "false":
        return FALSE, i + 1
    if t != "(":
        raise ValueError(f"expected '(' got {t!r}")
    head = toks[i + 1]
    j = i + 2
    if head == "=":
        phi, j = Eq(toks[j], toks[j + 1]), j + 2
    elif head == "rel":
        name = toks[j]
        j += 1
        args = []
        while toks[j] != ")":
            args.append(toks[j])
            j += 1
        phi = Rel(name, tuple(args))
    elif head == "desc":
        phi, j = Desc(toks[j], toks[j + 1], int(toks[j + 2])), j + 3
    elif head == "not":
        body, j = _parse(toks, j)
        phi = Not(body)
    elif head in ("and", "or"):
        parts = []
        while toks[j] != ")":
            p, j = _parse(toks, j)
            parts.append(p)
        phi = (And if head == "and" else Or)(tuple(parts))
    elif head in ("exists", "forall"):
        var = toks[j]
        body, j = _parse(toks, j + 1)
        phi = (Exists if head == "exists" else Forall)(var, body)
    else:
        raise ValueError(f"unknown operator {head!r}")
    if j >= len(toks) or toks[j] != ")":
        raise ValueError(f"expected ')' after {head}")
    return phi, j + 1


# --- JSON mirror -------------------------------------------------------------

def to_json_obj(phi: Formula):
    if isinstance(phi, Truth):
        return {"op": "true" if phi.value else "false"}
    if isinstance(phi, Eq):
        return {"op": "=", "args": [phi.left, phi.right]}
    if isinstance(phi, Rel):
        return {"op": "rel", "name": phi.name, "args": list(phi.args)}
    if isinstance(phi, Desc):
        return {"op": "desc", "args": [phi.top, phi.var], "depth": phi.depth}
    if isinstance(phi, Not):
        return {"op": "not", "body": to_json_obj(phi.body)}
    if isinstance(phi, (And, Or)):
        return {"op": "and" if isinstance(phi, And) else "or",
                "parts": [to_json_obj(p) for p in phi.parts]}
    if isinstance(phi, (Exists, Forall)):
        return {"op": "exists" if isinstance(phi, Exists) else "forall",
                "var": phi.var, "body": to_json_obj(phi.body)}
    raise TypeError(f"not a formula: {phi!r}")


def from_json_obj(obj) -> Formula:
    op = obj["op"]
    if op == "true":
        return TRUE
    if op == "false":
        return FALSE
    if op == "=":
        return Eq(*obj["args"])
    if op == "rel":
        return Rel(obj["name"], tuple(obj["args"]))
    if op == "desc":
        return Desc(obj["args"][0], obj["args"][1], int(obj["depth"]))
    if op == "not":
        return Not(from_json_obj(obj["body"]))
    if op in ("and", "or"):
        parts = tuple(from_json_obj(p) for p in obj["parts"])
        return And(parts) if op == "and" else Or(parts)
    if op in ("exists", "forall"):
        body = from_json_obj(obj["body"])
        return Exists(obj["var"], body) if op == "exists" else Forall(obj["var"], body)
    raise ValueError(f"unknown operator {op!r}")
