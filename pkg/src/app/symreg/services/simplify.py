import math

from src.app.shared.domain.constants import (
    PROTECTED_DIVISION_THRESHOLD,
    PROTECTED_DIVISION_VALUE,
)
from src.app.symreg.helpers.expression_helpers import (
    Tree,
    from_tree,
    to_tree,
    tree_to_prefix,
)
from src.app.symreg.models.expression import Expression

IDENTITIES = {"add": 0.0, "mul": 1.0}


def fold_constants(function: str, left: float, right: float) -> float:
    if function == "add":
        return left + right
    if function == "sub":
        return left - right
    if function == "mul":
        return left * right
    if abs(right) < PROTECTED_DIVISION_THRESHOLD:
        return PROTECTED_DIVISION_VALUE
    return left / right


def _chain_operands(tree: Tree, function: str) -> list[Tree]:
    if isinstance(tree, tuple) and tree[0] == function:
        return _chain_operands(tree[1], function) + _chain_operands(tree[2], function)
    return [tree]


def _flatten(function: str, left: Tree, right: Tree) -> Tree:
    operands = _chain_operands((function, left, right), function)
    constants = [node for node in operands if isinstance(node, float)]
    terms = sorted(
        (node for node in operands if not isinstance(node, float)),
        key=tree_to_prefix,
    )
    if constants:
        folded = math.fsum(constants) if function == "add" else math.prod(constants)
        if not math.isfinite(folded):
            terms = constants + terms
        elif folded != IDENTITIES[function] or not terms:
            terms.insert(0, float(folded))
    tree = terms[0]
    for term in terms[1:]:
        tree = (function, tree, term)
    return tree


def simplify_tree(tree: Tree) -> Tree:
    if not isinstance(tree, tuple):
        return tree
    function, left, right = tree
    left, right = simplify_tree(left), simplify_tree(right)
    if isinstance(left, float) and isinstance(right, float):
        folded = fold_constants(function, left, right)
        if math.isfinite(folded):
            return folded
        return (function, left, right)
    if function == "sub" and right == 0.0:
        return left
    if function == "div" and right == 1.0:
        return left
    if function in IDENTITIES:
        return _flatten(function, left, right)
    return (function, left, right)


def simplify(expr: Expression) -> Expression:
    """
    Canonical form of an expression: constants folded, x+0, x-0, x*1 and x/1
    dropped, add and mul chains flattened with their constants merged and
    their operands sorted, then rebuilt as a left fold.
    """
    return Expression(nodes=from_tree(simplify_tree(to_tree(expr.nodes))))
