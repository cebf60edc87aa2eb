"""First-order logic over finite structures: syntax, evaluation, games."""

from catwork.logic.corpus import formula_corpus
from catwork.logic.ef import ef_equivalent
from catwork.logic.evaluate import (
    bounded_substructure,
    eval_via_bounded_substructure,
    evaluate,
    satisfiers,
)
from catwork.logic.formulas import (
    FALSE,
    TRUE,
    And,
    Desc,
    Eq,
    Exists,
    Forall,
    Formula,
    Not,
    Or,
    Rel,
    conj,
    disj,
    exists,
    expand_desc,
    forall,
    free_vars,
    from_json_obj,
    neq,
    parse_sexpr,
    quantifier_count,
    quantifier_rank,
    rel,
    to_json_obj,
    to_sexpr,
)
from catwork.logic.relativize import child_of_root, phi_n, relativize, relativize_box

__all__ = [
    "FALSE", "TRUE", "And", "Desc", "Eq", "Exists", "Forall", "Formula", "Not", "Or", "Rel",
    "bounded_substructure", "child_of_root", "conj", "disj", "ef_equivalent",
    "eval_via_bounded_substructure", "evaluate", "exists", "expand_desc", "forall",
    "formula_corpus", "free_vars", "from_json_obj", "neq", "parse_sexpr", "phi_n",
    "quantifier_count", "quantifier_rank", "rel", "relativize", "relativize_box",
    "satisfiers", "to_json_obj", "to_sexpr",
]
