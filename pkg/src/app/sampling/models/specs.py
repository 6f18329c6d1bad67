import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.app.shared.domain.constants import FLOOR_GUARD
from src.app.shared.domain.exceptions import InvalidSpecError


def observation_count(n: int, q: float) -> int:
    """t = floor(n / q), guarded against ratios landing just below an integer."""
    return math.floor(n / q + FLOOR_GUARD)


class PopulationSpec(BaseModel):
    """White inverse Wishart population with parameters (n, p)."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    p: float = Field(gt=0)

    @property
    def qstar(self) -> float:
        return self.p / (1.0 + self.p)

    @property
    def t_star(self) -> int:
        return observation_count(self.n, self.qstar)

    @model_validator(mode="after")
    def check_invertible(self) -> "PopulationSpec":
        if self.t_star < self.n + 1:
            raise InvalidSpecError(
                f"t*={self.t_star} observations cannot give an invertible "
                f"Wishart of dimension {self.n} (p={self.p})"
            )
        return self


class SampleSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    q: float = Field(gt=0)

    @property
    def t(self) -> int:
        return observation_count(self.n, self.q)

    @property
    def effective_q(self) -> float:
        return self.n / self.t

    @model_validator(mode="after")
    def check_observations(self) -> "SampleSpec":
        if self.t < 2:
            raise InvalidSpecError(
                f"t={self.t} observations for n={self.n}, q={self.q}; at least 2 are needed"
            )
        return self


class RngStream(BaseModel):
    """
    Reproducible random stream keyed by (master_seed, stream_id, substream).

    Streams are PCG64 generators seeded from a SeedSequence whose spawn key is
    (stream_id, substream); distinct keys give independent streams and the same
    key gives the same draws whatever process or thread consumes it.
    """

    model_config = ConfigDict(frozen=True)

    master_seed: int = Field(ge=0, lt=2**64)
    stream_id: int = Field(ge=0)
    substream: int = Field(default=0, ge=0)

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_id, self.substream)
        )
        return np.random.Generator(np.random.PCG64(sequence))

    def child(self, substream: int) -> "RngStream":
        return self.model_copy(update={"substream": substream})

    def next_substream(self) -> "RngStream":
        return self.child(self.substream + 1)
