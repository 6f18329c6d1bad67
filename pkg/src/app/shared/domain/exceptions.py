from pydantic import ValidationError

from src.app.shared.domain.constants import (
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_VALIDATION_FAILURE,
)
from src.app.utils.logger import logger as logger_utils

logger = logger_utils(__name__)


class RmtKlError(Exception):
    """Root of every domain error raised by the laboratory"""

    def __init__(
        self,
        message="Unexpected laboratory error",
        msg_code="RMTKL_ERROR",
    ):
        self.message = message
        self.msg_code = msg_code
        logger.error(
            "%s: %s, Code: %s", type(self).__name__, self.message, self.msg_code
        )
        super().__init__(self.message, self.msg_code)

    def __str__(self) -> str:
        return f"{self.message} ({self.msg_code})"


class SingularMatrixError(RmtKlError):
    """Raised when a factorization meets a non positive-definite matrix"""

    def __init__(
        self,
        message="singular or indefinite matrix",
        msg_code="SINGULAR_MATRIX",
    ):
        super().__init__(message, msg_code)


class SpectralDecompositionError(RmtKlError):
    """Raised when the symmetric eigen-solver does not converge"""

    def __init__(self, dim: int, msg_code="EIGH_NO_CONVERGENCE"):
        self.dim = dim
        super().__init__(
            f"eigen-solver did not converge for a {dim}x{dim} matrix", msg_code
        )


class DimensionMismatchError(RmtKlError):
    """Raised when operands do not share the same dimension"""

    def __init__(
        self,
        message="dimension mismatch",
        msg_code="DIM_MISMATCH",
    ):
        super().__init__(message, msg_code)


class InvalidSpecError(RmtKlError):
    """Raised when a sampling specification cannot be realised"""

    def __init__(
        self,
        message="invalid sampling specification",
        msg_code="INVALID_SPEC",
    ):
        super().__init__(message, msg_code)


class DomainError(RmtKlError):
    """Raised when a closed form is evaluated outside of its domain"""

    def __init__(
        self,
        message="parameter outside of the domain",
        msg_code="DOMAIN_ERROR",
    ):
        super().__init__(message, msg_code)


class BrokenDecompositionError(RmtKlError):
    """Raised when Oracle eigenvalues come out non-positive"""

    def __init__(
        self,
        message="non-positive Oracle eigenvalue",
        msg_code="BROKEN_DECOMPOSITION",
    ):
        super().__init__(message, msg_code)


class ConfigRejectedError(RmtKlError):
    """Raised when an experiment configuration is inconsistent"""

    def __init__(
        self,
        message="configuration rejected",
        msg_code="CONFIG_REJECTED",
    ):
        super().__init__(message, msg_code)


class ReplicateFailedError(RmtKlError):
    """Raised when one replicate of a Monte Carlo cell fails"""

    def __init__(self, replicate: int, cause: str, msg_code="REPLICATE_FAILED"):
        self.replicate = replicate
        super().__init__(f"replicate {replicate} failed: {cause}", msg_code)


class EmptyGridError(RmtKlError):
    """Raised when a sweep is requested over no cell"""

    def __init__(
        self,
        message="empty grid",
        msg_code="EMPTY_GRID",
    ):
        super().__init__(message, msg_code)


class EmptyDatasetError(RmtKlError):
    """Raised when a regression dataset has no row"""

    def __init__(
        self,
        message="empty dataset",
        msg_code="EMPTY_DATASET",
    ):
        super().__init__(message, msg_code)


class SchemaError(RmtKlError):
    """Raised when a persisted file does not follow the expected schema"""

    def __init__(
        self,
        message="schema mismatch",
        msg_code="SCHEMA_MISMATCH",
    ):
        super().__init__(message, msg_code)


class ExpressionSyntaxError(RmtKlError):
    """Raised when a prefix expression string cannot be parsed"""

    def __init__(
        self,
        message="malformed expression",
        msg_code="EXPRESSION_SYNTAX",
    ):
        super().__init__(message, msg_code)


class ValidationFailedError(RmtKlError):
    """Raised when analytic predictions and simulations disagree"""

    def __init__(
        self,
        message="validation failed",
        msg_code="VALIDATION_FAILED",
    ):
        super().__init__(message, msg_code)


def handle_error(exc: BaseException | None) -> int:
    """Maps an exception onto the command-line exit code contract"""
    if exc is None:
        return EXIT_OK
    elif isinstance(exc, ValidationFailedError):
        return EXIT_VALIDATION_FAILURE
    elif isinstance(exc, (ValidationError, RmtKlError, OSError, ValueError)):
        logger.error("config_error=%s", exc)
        return EXIT_CONFIG_ERROR
    else:
        logger.error("Unhandled exception: %s", exc)
        raise exc
