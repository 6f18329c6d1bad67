import math
from typing import Sequence

import numpy as np

from src.app.montecarlo.models.experiment import RegressionDataset
from src.app.shared.domain.constants import (
    CONSTANT_RANGE,
    FUNCTION_ARITY,
    PROTECTED_DIVISION_THRESHOLD,
    PROTECTED_DIVISION_VALUE,
    UNFIT_MSE,
    VARIABLES,
)
from src.app.shared.domain.exceptions import EmptyDatasetError
from src.app.symreg.models.expression import (
    Expression,
    FitnessReport,
    Node,
    ScoredExpression,
    node_depths,
    subtree_end,
)

FUNCTIONS = tuple(FUNCTION_ARITY)


def protected_div(numerator, denominator):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.where(
            np.abs(denominator) < PROTECTED_DIVISION_THRESHOLD,
            PROTECTED_DIVISION_VALUE,
            np.divide(numerator, np.where(denominator == 0.0, 1.0, denominator)),
        )


def apply_function(name: str, left, right):
    if name == "add":
        return np.add(left, right)
    if name == "sub":
        return np.subtract(left, right)
    if name == "mul":
        return np.multiply(left, right)
    return protected_div(left, right)


def execute(expr: Expression, q: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Vectorised evaluation of a prefix expression over aligned q and r arrays."""
    q = np.asarray(q, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    shape = np.broadcast(q, r).shape
    terminals = {"q": q, "r": r}
    stack: list[np.ndarray] = []
    with np.errstate(over="ignore", invalid="ignore"):
        for node in reversed(expr.nodes):
            if isinstance(node, float):
                stack.append(np.full(shape, node))
            elif node in terminals:
                stack.append(np.broadcast_to(terminals[node], shape))
            else:
                left = stack.pop()
                right = stack.pop()
                stack.append(apply_function(node, left, right))
    return np.asarray(stack[0], dtype=np.float64)


def evaluate(expr: Expression, q: float, r: float) -> float:
    return float(execute(expr, np.float64(q), np.float64(r)))


Inputs = tuple[np.ndarray, np.ndarray, np.ndarray]


def regression_inputs(dataset: RegressionDataset) -> Inputs:
    """(q, r_finite, target) columns of a dataset as arrays."""
    if not len(dataset):
        raise EmptyDatasetError()
    columns = dataset.columns()
    return (
        np.array(columns["q"]),
        np.array(columns["r_finite"]),
        np.array(columns["target_kl_norm"]),
    )


def mean_squared_error(
    expr: Expression, dataset: RegressionDataset, inputs: Inputs | None = None
) -> float:
    q, r, target = inputs if inputs is not None else regression_inputs(dataset)
    predicted = execute(expr, q, r)
    with np.errstate(over="ignore", invalid="ignore"):
        mse = float(np.mean((predicted - target) ** 2))
    return mse if math.isfinite(mse) else UNFIT_MSE


def fitness(
    expr: Expression,
    dataset: RegressionDataset,
    parsimony: float,
    generation: int = 0,
    inputs: Inputs | None = None,
) -> FitnessReport:
    """
    Mean squared error on the (q, r_finite) inputs plus a parsimony penalty
    proportional to the node count. Non-finite errors are clamped to UNFIT_MSE.
    """
    raw = mean_squared_error(expr, dataset, inputs)
    return FitnessReport(
        raw_mse=raw,
        penalized_fitness=raw + parsimony * expr.size,
        size=expr.size,
        generation=generation,
    )


def held_out_mse(expr: Expression, dataset: RegressionDataset) -> float:
    return mean_squared_error(expr, dataset)


def target_variance(dataset: RegressionDataset) -> float:
    """Variance of the regression target, 1.0 for a constant target."""
    _, _, target = regression_inputs(dataset)
    variance = float(np.var(target))
    return variance if variance > 0.0 and math.isfinite(variance) else 1.0


def random_terminal(rng: np.random.Generator) -> Node:
    choice = int(rng.integers(len(VARIABLES) + 1))
    if choice < len(VARIABLES):
        return VARIABLES[choice]
    return float(rng.uniform(*CONSTANT_RANGE))


def random_subtree(
    rng: np.random.Generator,
    max_depth: int,
    method: str = "grow",
    function_root: bool = True,
) -> tuple[Node, ...]:
    """
    Builds a random prefix subtree no deeper than `max_depth`. "full" puts
    functions everywhere above the depth limit, "grow" picks functions and
    terminals with probability proportional to their counts. Unless
    `function_root` is off, the root is a function whenever depth allows.
    """
    n_terminals = len(VARIABLES) + 1
    nodes: list[Node] = []
    pending = [0]
    while pending:
        depth = pending.pop()
        if depth >= max_depth:
            nodes.append(random_terminal(rng))
            continue
        if method == "full" or (depth == 0 and function_root):
            pick_function = True
        else:
            index = int(rng.integers(len(FUNCTIONS) + n_terminals))
            pick_function = index < len(FUNCTIONS)
        if pick_function:
            function = FUNCTIONS[int(rng.integers(len(FUNCTIONS)))]
            nodes.append(function)
            pending.extend([depth + 1] * FUNCTION_ARITY[function])
        else:
            nodes.append(random_terminal(rng))
    return tuple(nodes)


def ramped_half_and_half(
    rng: np.random.Generator, size: int, depth_min: int, depth_max: int
) -> list[Expression]:
    depths = range(depth_min, depth_max + 1)
    population = []
    for index in range(size):
        depth = depths[(index // 2) % len(depths)]
        method = "full" if index % 2 == 0 else "grow"
        population.append(Expression(nodes=random_subtree(rng, depth, method)))
    return population


def best_of(population: Sequence[ScoredExpression]) -> ScoredExpression:
    """Minimum penalized fitness, ties broken by size then by position."""
    index = min(
        range(len(population)),
        key=lambda i: (
            population[i].report.penalized_fitness,
            population[i].report.size,
            i,
        ),
    )
    return population[index]


def tournament_select(
    population: Sequence[ScoredExpression],
    tournament_size: int,
    rng: np.random.Generator,
) -> ScoredExpression:
    contenders = sorted(
        int(i) for i in rng.choice(len(population), tournament_size, replace=False)
    )
    return best_of([population[i] for i in contenders])


def crossover(
    a: Expression, b: Expression, rng: np.random.Generator, max_depth: int
) -> tuple[Expression, Expression]:
    """
    Swaps a uniformly chosen subtree of each parent. An offspring deeper than
    max_depth is replaced by the parent it came from.
    """
    start_a = int(rng.integers(a.size))
    start_b = int(rng.integers(b.size))
    end_a = subtree_end(a.nodes, start_a)
    end_b = subtree_end(b.nodes, start_b)
    first = Expression(
        nodes=a.nodes[:start_a] + b.nodes[start_b:end_b] + a.nodes[end_a:]
    )
    second = Expression(
        nodes=b.nodes[:start_b] + a.nodes[start_a:end_a] + b.nodes[end_b:]
    )
    return (
        first if first.depth <= max_depth else a,
        second if second.depth <= max_depth else b,
    )


def mutate(
    a: Expression,
    rng: np.random.Generator,
    mutation_prob: float,
    max_depth: int,
) -> Expression:
    """Subtree mutation: a random node is replaced by a freshly grown subtree."""
    if mutation_prob <= 0.0 or rng.random() >= mutation_prob:
        return a
    start = int(rng.integers(a.size))
    room = max(max_depth - node_depths(a.nodes)[start], 0)
    return a.replace(start, random_subtree(rng, room, "grow", function_root=False))
