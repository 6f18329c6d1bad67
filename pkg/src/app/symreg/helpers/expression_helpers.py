import math
import re
from pathlib import Path
from typing import Union

from src.app.montecarlo.services.persistence import write_rows
from src.app.shared.domain.constants import (
    BEST_EXPRESSIONS_HEADER,
    FUNCTION_ARITY,
    HISTORY_HEADER,
    VARIABLES,
)
from src.app.shared.domain.exceptions import ExpressionSyntaxError
from src.app.symreg.models.expression import Expression, GpResult, Node

Tree = Union[Node, tuple]

INFIX_SYMBOLS = {"add": "+", "sub": "-", "mul": "*", "div": "/"}
TOKEN_PATTERN = re.compile(r"\(|\)|[^\s()]+")


def to_tree(nodes: tuple[Node, ...]) -> Tree:
    """Nested (function, left, right) tuples from a prefix sequence."""

    def build(position: int) -> tuple[Tree, int]:
        node = nodes[position]
        if isinstance(node, str) and node in FUNCTION_ARITY:
            left, position = build(position + 1)
            right, position = build(position)
            return (node, left, right), position
        return node, position + 1

    tree, _ = build(0)
    return tree


def from_tree(tree: Tree) -> tuple[Node, ...]:
    if isinstance(tree, tuple):
        function, left, right = tree
        return (function,) + from_tree(left) + from_tree(right)
    return (tree,)


def _format_leaf(node: Node) -> str:
    return node if isinstance(node, str) else repr(float(node))


def tree_to_prefix(tree: Tree) -> str:
    if isinstance(tree, tuple):
        function, left, right = tree
        return f"({function} {tree_to_prefix(left)} {tree_to_prefix(right)})"
    return _format_leaf(tree)


def to_prefix(expr: Expression) -> str:
    """Parenthesized prefix form, e.g. `(mul 0.25 (mul q r))`."""
    return tree_to_prefix(to_tree(expr.nodes))


def parse_prefix(text: str) -> Expression:
    tokens = TOKEN_PATTERN.findall(text)
    if not tokens:
        raise ExpressionSyntaxError("empty expression")
    nodes: list[Node] = []

    def parse(position: int) -> int:
        if position >= len(tokens):
            raise ExpressionSyntaxError(f"unexpected end of {text!r}")
        token = tokens[position]
        if token == "(":
            function = tokens[position + 1] if position + 1 < len(tokens) else None
            if function not in FUNCTION_ARITY:
                raise ExpressionSyntaxError(f"expected a function after {position}")
            nodes.append(function)
            position = parse(parse(position + 2))
            if position >= len(tokens) or tokens[position] != ")":
                raise ExpressionSyntaxError(f"expected ')' at token {position}")
            return position + 1
        if token == ")":
            raise ExpressionSyntaxError(f"unexpected ')' at token {position}")
        if token in VARIABLES:
            nodes.append(token)
        else:
            try:
                constant = float(token)
            except ValueError:
                raise ExpressionSyntaxError(f"unknown token {token!r}")
            if not math.isfinite(constant):
                raise ExpressionSyntaxError(f"non-finite constant {token!r}")
            nodes.append(constant)
        return position + 1

    end = parse(0)
    if end != len(tokens):
        raise ExpressionSyntaxError(f"trailing tokens in {text!r}")
    return Expression(nodes=tuple(nodes))


def to_infix(expr: Expression) -> str:
    def render(tree: Tree, top: bool) -> str:
        if not isinstance(tree, tuple):
            return _format_leaf(tree)
        function, left, right = tree
        symbol = INFIX_SYMBOLS[function]
        body = f"{render(left, False)} {symbol} {render(right, False)}"
        return body if top else f"({body})"

    return render(to_tree(expr.nodes), True)


def save_history(result: GpResult, path: str | Path) -> Path:
    rows = [
        [
            report.generation,
            float(report.raw_mse),
            float(report.penalized_fitness),
            report.size,
        ]
        for report in result.history
    ]
    return write_rows(path, HISTORY_HEADER, rows)


def save_best_expressions(
    results: list[GpResult],
    held_out: list[float],
    simplified: list[Expression],
    path: str | Path,
) -> Path:
    rows = [
        [
            index,
            result.seed,
            float(result.best_report.raw_mse),
            float(result.best_report.penalized_fitness),
            result.best_report.size,
            float(mse),
            to_prefix(result.best),
            to_prefix(simple),
            to_infix(simple),
        ]
        for index, (result, mse, simple) in enumerate(
            zip(results, held_out, simplified)
        )
    ]
    return write_rows(path, BEST_EXPRESSIONS_HEADER, rows)


SECOND_ORDER_PREFIX = (
    "(sub (mul 0.25 (mul q r)) (mul (mul 0.25 (mul q r)) (mul 0.25 (mul q r))))"
)


def second_order_expression() -> Expression:
    """rq/4 - (rq/4)^2 written over the (q, r) terminals."""
    return parse_prefix(SECOND_ORDER_PREFIX)
