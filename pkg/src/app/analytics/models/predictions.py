from pydantic import BaseModel, ConfigDict, Field


class OracleKlPrediction(BaseModel):
    """
    Closed-form expected normalized KL of the Oracle, pq / (4p + 4q + pq).

    The value is always reported; it equals the expected KL only when the
    underlying alternating series converges, i.e. when rq < 4.
    """

    model_config = ConfigDict(frozen=True)

    p: float = Field(gt=0)
    qstar: float = Field(gt=0, lt=1)
    q: float = Field(ge=0)
    rq: float = Field(ge=0)
    closed_form: float
    converges: bool


class KlFrobeniusLink(BaseModel):
    model_config = ConfigDict(frozen=True)

    first_order_kl: float
    quarter_frobenius: float


class SeriesPoint(BaseModel):
    """Partial sum of the KL series at one order next to its closed form."""

    model_config = ConfigDict(frozen=True)

    q: float
    qstar: float
    order: int = Field(ge=1)
    partial_sum: float
    closed_form: float


class RegionCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    q: float
    qstar: float
    rq: float
    converges: bool
    boundary: bool


class PopulationMoments(BaseModel):
    """Expected tau(C) and tau(C^2) of a white inverse Wishart at finite n."""

    model_config = ConfigDict(frozen=True)

    first: float = Field(gt=0)
    second: float = Field(gt=0)

    @property
    def spread(self) -> float:
        """Normalized spectral variance, the finite-n counterpart of p."""
        return self.second / self.first**2 - 1.0
