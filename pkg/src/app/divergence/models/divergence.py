from pydantic import BaseModel, ConfigDict, Field


class DivergenceResult(BaseModel):
    """KL(C || S) in nats, its per-dimension value and tau((S - C)^2)."""

    model_config = ConfigDict(frozen=True)

    dim: int = Field(ge=1)
    kl: float
    kl_normalized: float
    frobenius: float = Field(ge=0)
