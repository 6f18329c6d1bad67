from enum import StrEnum

from pydantic import BaseModel, ConfigDict


class CheckKind(StrEnum):
    MONTE_CARLO = "monte_carlo"
    POPULATION_INDEPENDENCE = "population_independence"
    SERIES_CONVERGENCE = "series_convergence"
    REGION_BOUNDARY = "region_boundary"
    FIRST_ORDER_LINK = "first_order_link"
    SMALL_PARAMETER_LINK = "small_parameter_link"


class ValidationCheck(BaseModel):
    """One row of a validation report; numeric checks carry n = 0 and stderr = 0."""

    model_config = ConfigDict(frozen=True)

    check: CheckKind
    n: int = 0
    q: float
    p: float
    metric: str = ""
    analytic: float
    # finite-n expectation the check is centered on, when there is one
    expected: float | None = None
    empirical: float
    stderr: float = 0.0
    z: float = 0.0
    tolerance: float
    passed: bool


class ValidationReport(BaseModel):
    checks: list[ValidationCheck] = []

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[ValidationCheck]:
        return [check for check in self.checks if not check.passed]
