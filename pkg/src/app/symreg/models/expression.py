import math
from typing import Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.app.shared.domain.constants import FUNCTION_ARITY, VARIABLES
from src.app.shared.domain.exceptions import ConfigRejectedError
from src.app.shared.utils.dependencies import get_settings

Node = Union[str, float]


def subtree_end(nodes: tuple[Node, ...], start: int) -> int:
    """Index one past the subtree rooted at `start` in a prefix sequence."""
    pending = 1
    end = start
    while pending:
        node = nodes[end]
        pending += FUNCTION_ARITY.get(node, 0) - 1 if isinstance(node, str) else -1
        end += 1
    return end


def node_depths(nodes: tuple[Node, ...]) -> list[int]:
    """Depth of every node, the root sitting at depth 0."""
    depths: list[int] = []
    stack = [0]
    for node in nodes:
        depth = stack.pop()
        depths.append(depth)
        if isinstance(node, str):
            stack.extend([depth + 1] * FUNCTION_ARITY.get(node, 0))
    return depths


class Expression(BaseModel):
    """
    Arithmetic expression tree over the terminals q, r and real constants,
    flattened in prefix order: every function node is followed by its operands.
    """

    model_config = ConfigDict(frozen=True)

    nodes: tuple[Node, ...] = Field(min_length=1)

    @field_validator("nodes")
    @classmethod
    def well_formed(cls, nodes: tuple[Node, ...]) -> tuple[Node, ...]:
        pending = 1
        for index, node in enumerate(nodes):
            if pending == 0:
                raise ValueError(f"trailing nodes after position {index}")
            if isinstance(node, str):
                if node not in FUNCTION_ARITY and node not in VARIABLES:
                    raise ValueError(f"unknown symbol {node!r}")
                pending += FUNCTION_ARITY.get(node, 0) - 1
            elif not math.isfinite(node):
                raise ValueError(f"non-finite constant {node}")
            else:
                pending -= 1
        if pending != 0:
            raise ValueError("incomplete expression")
        return nodes

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def depth(self) -> int:
        return max(node_depths(self.nodes))

    def subtree(self, start: int) -> tuple[Node, ...]:
        return self.nodes[start : subtree_end(self.nodes, start)]

    def replace(self, start: int, subtree: tuple[Node, ...]) -> "Expression":
        end = subtree_end(self.nodes, start)
        return Expression(nodes=self.nodes[:start] + subtree + self.nodes[end:])


class GpConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    population_size: int = Field(ge=2)
    generations: int = Field(ge=0)
    parsimony: float = Field(ge=0)
    tournament_size: int = Field(ge=1)
    crossover_prob: float = Field(ge=0, le=1)
    mutation_prob: float = Field(ge=0, le=1)
    max_depth: int = Field(ge=1)
    init_depth_min: int = Field(default=2, ge=1)
    init_depth_max: int = Field(default=6, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    independent_runs: int = Field(default=4, ge=1)
    # penalty per node in units of the training target variance
    relative_parsimony: bool = True

    @classmethod
    def from_settings(cls, **overrides) -> "GpConfig":
        settings = get_settings()
        values = {
            "population_size": settings.GP_POPULATION,
            "generations": settings.GP_GENERATIONS,
            "parsimony": settings.GP_PARSIMONY,
            "tournament_size": settings.GP_TOURNAMENT_SIZE,
            "crossover_prob": settings.GP_CROSSOVER_PROB,
            "mutation_prob": settings.GP_MUTATION_PROB,
            "max_depth": settings.GP_MAX_DEPTH,
            "init_depth_min": settings.GP_INIT_DEPTH_MIN,
            "init_depth_max": settings.GP_INIT_DEPTH_MAX,
            "seed": settings.SEED,
            "independent_runs": settings.GP_ROUNDS,
            "relative_parsimony": settings.GP_RELATIVE_PARSIMONY,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @model_validator(mode="after")
    def check_sizes(self) -> "GpConfig":
        if self.population_size < 2 * self.tournament_size:
            raise ConfigRejectedError(
                f"population {self.population_size} below twice the tournament "
                f"size {self.tournament_size}"
            )
        if not self.init_depth_min <= self.init_depth_max <= self.max_depth:
            raise ConfigRejectedError(
                f"initial depths {self.init_depth_min}-{self.init_depth_max} "
                f"incompatible with max_depth={self.max_depth}"
            )
        return self


class FitnessReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    raw_mse: float = Field(ge=0)
    penalized_fitness: float
    size: int = Field(ge=1)
    generation: int = Field(ge=0)

    @model_validator(mode="after")
    def check_penalty(self) -> "FitnessReport":
        if not (math.isfinite(self.raw_mse) and math.isfinite(self.penalized_fitness)):
            raise ValueError("fitness must be finite")
        if self.penalized_fitness < self.raw_mse:
            raise ValueError("penalized fitness below raw error")
        return self


class ScoredExpression(BaseModel):
    model_config = ConfigDict(frozen=True)

    expression: Expression
    report: FitnessReport


class GpResult(BaseModel):
    """Outcome of one independent GP round."""

    seed: int
    best: Expression
    best_report: FitnessReport
    history: list[FitnessReport]
    # per-node penalty the round was scored with
    parsimony: float = Field(default=0.0, ge=0)
