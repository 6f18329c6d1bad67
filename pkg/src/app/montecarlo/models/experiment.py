import math
from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.app.sampling.models.specs import PopulationSpec, observation_count
from src.app.shared.domain.exceptions import ConfigRejectedError


class Metric(StrEnum):
    KL_SAMPLE = "kl_sample"
    KL_IN_OUT = "kl_in_out"
    KL_ORACLE = "kl_oracle"
    FROBENIUS_ORACLE = "frobenius_oracle"
    KL_LINEAR = "kl_linear"
    FROBENIUS_LINEAR = "frobenius_linear"
    TAU_INV_WISHART = "tau_inv_wishart"
    LOG_DET_WISHART = "log_det_wishart"


# metrics whose estimator inverts the sample covariance or a plain Wishart
INVERTING_METRICS = frozenset(
    {
        Metric.KL_SAMPLE,
        Metric.KL_IN_OUT,
        Metric.TAU_INV_WISHART,
        Metric.LOG_DET_WISHART,
    }
)
SAMPLE_METRICS = frozenset(
    {
        Metric.KL_SAMPLE,
        Metric.KL_IN_OUT,
        Metric.KL_ORACLE,
        Metric.FROBENIUS_ORACLE,
        Metric.KL_LINEAR,
        Metric.FROBENIUS_LINEAR,
    }
)
LINEAR_METRICS = frozenset({Metric.KL_LINEAR, Metric.FROBENIUS_LINEAR})


class ExperimentConfig(BaseModel):
    """
    One Monte Carlo cell. p = 0 stands for the identity population, the
    p -> 0 limit of the white inverse Wishart.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    q: float = Field(gt=0)
    p: float = Field(ge=0)
    replicates: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2**64)
    metrics: tuple[Metric, ...] = Field(min_length=1)

    @classmethod
    def from_qstar(cls, qstar: float, **kwargs) -> "ExperimentConfig":
        if not 0.0 <= qstar < 1.0:
            raise ConfigRejectedError(f"q*={qstar} outside of [0, 1)")
        return cls(p=qstar / (1.0 - qstar), **kwargs)

    @field_validator("metrics")
    @classmethod
    def unique_metrics(cls, metrics: tuple[Metric, ...]) -> tuple[Metric, ...]:
        if len(set(metrics)) != len(metrics):
            raise ConfigRejectedError(f"duplicated metrics in {metrics}")
        return metrics

    @property
    def qstar(self) -> float:
        return self.p / (1.0 + self.p)

    @property
    def t(self) -> int:
        return observation_count(self.n, self.q)

    @property
    def effective_q(self) -> float:
        return self.n / self.t

    @property
    def identity_population(self) -> bool:
        return self.p == 0.0

    @model_validator(mode="after")
    def check_cell(self) -> "ExperimentConfig":
        if self.t < 2:
            raise ConfigRejectedError(
                f"q={self.q} leaves t={self.t} observations for n={self.n}"
            )
        inverting = INVERTING_METRICS.intersection(self.metrics)
        if inverting and (self.q >= 1.0 or self.t <= self.n):
            raise ConfigRejectedError(
                f"metrics {sorted(inverting)} need an invertible sample covariance, "
                f"got q={self.q} (t={self.t}, n={self.n})"
            )
        linear = LINEAR_METRICS.intersection(self.metrics)
        if linear and (self.identity_population or self.p >= self.n):
            raise ConfigRejectedError(
                f"metrics {sorted(linear)} need 0 < p < n, got p={self.p}"
            )
        if not self.identity_population:
            PopulationSpec(n=self.n, p=self.p)
        return self


class MetricSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float
    stderr: float = Field(ge=0)
    count: int = Field(ge=1)


class ExperimentRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: ExperimentConfig
    effective_q: float
    summaries: dict[Metric, MetricSummary]
    walltime_s: float = Field(default=0.0, ge=0)


class CellFailure(BaseModel):
    cell: int
    replicate: int
    message: str
    msg_code: str


class GridOutcome(BaseModel):
    records: list[ExperimentRecord]
    failures: list[CellFailure] = []


class RegressionRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    q: float
    qstar: float
    r_finite: float = Field(gt=0, le=1)
    r_asymptotic: float = Field(gt=0, le=1)
    target_kl_norm: float
    stderr: float = Field(ge=0)

    @model_validator(mode="after")
    def check_finite(self) -> "RegressionRow":
        values = (self.q, self.qstar, self.target_kl_norm, self.stderr)
        if not all(math.isfinite(v) for v in values):
            raise ConfigRejectedError(f"non-finite regression row {values}")
        return self


class RegressionDataset(BaseModel):
    """Rows of (q, q*, r, mean normalized KL) consumed by the symbolic regressor."""

    rows: list[RegressionRow] = []

    def __len__(self) -> int:
        return len(self.rows)

    def columns(self) -> dict[str, list[float]]:
        return {
            name: [getattr(row, name) for row in self.rows]
            for name in RegressionRow.model_fields
        }
