import unittest

from pydantic import BaseModel, ValidationError

from src.app.shared.domain.exceptions import (
    BrokenDecompositionError,
    ConfigRejectedError,
    DimensionMismatchError,
    EmptyDatasetError,
    ReplicateFailedError,
    RmtKlError,
    SchemaError,
    SingularMatrixError,
    SpectralDecompositionError,
    ValidationFailedError,
    handle_error,
)


class Positive(BaseModel):
    value: int


class ExceptionsTests(unittest.TestCase):
    def test_singular_matrix_error(self):
        error = SingularMatrixError()
        self.assertEqual(error.message, "singular or indefinite matrix")
        self.assertEqual(error.msg_code, "SINGULAR_MATRIX")
        self.assertIsInstance(error, RmtKlError)

    def test_dimension_mismatch_error(self):
        error = DimensionMismatchError("2 != 3")
        self.assertEqual(error.message, "2 != 3")
        self.assertEqual(error.msg_code, "DIM_MISMATCH")

    def test_spectral_decomposition_error(self):
        error = SpectralDecompositionError(dim=4)
        self.assertEqual(error.dim, 4)
        self.assertEqual(error.msg_code, "EIGH_NO_CONVERGENCE")

    def test_replicate_failed_error(self):
        error = ReplicateFailedError(3, "singular")
        self.assertEqual(error.replicate, 3)
        self.assertEqual(error.message, "replicate 3 failed: singular")

    def test_broken_decomposition_error(self):
        error = BrokenDecompositionError()
        self.assertEqual(error.msg_code, "BROKEN_DECOMPOSITION")

    def test_str(self):
        self.assertEqual(str(SchemaError("bad")), "bad (SCHEMA_MISMATCH)")


class HandleErrorTests(unittest.TestCase):
    def test_success(self):
        self.assertEqual(handle_error(None), 0)

    def test_validation_failure(self):
        self.assertEqual(handle_error(ValidationFailedError()), 1)

    def test_configuration_errors(self):
        try:
            Positive(value="x")
        except ValidationError as e:
            pydantic_error = e
        for error in (
            ConfigRejectedError(),
            EmptyDatasetError(),
            FileNotFoundError("missing.csv"),
            pydantic_error,
        ):
            self.assertEqual(handle_error(error), 2)

    def test_unexpected_error_is_raised(self):
        with self.assertRaises(KeyError):
            handle_error(KeyError("boom"))
