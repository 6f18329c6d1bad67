import numpy

APP_NAME = "rmt-kl-lab"

# CSV schemas
RECORDS_SCHEMA = "rmtkl-1"
RECORDS_HEADER = (
    "schema",
    "n",
    "q",
    "effective_q",
    "p",
    "qstar",
    "replicates",
    "seed",
    "metric",
    "mean",
    "stderr",
    "walltime_s",
)
DATASET_SCHEMA = "rmtds-1"
DATASET_HEADER = (
    "schema",
    "q",
    "qstar",
    "r_finite",
    "r_asymptotic",
    "target_kl_norm",
    "stderr",
)
SWEEP_SCHEMA = "sweep-1"
SWEEP_HEADER = (
    "schema",
    "q",
    "qstar",
    "order",
    "partial_sum",
    "closed_form",
    "empirical_mean",
    "stderr",
)
REGION_SCHEMA = "region-1"
REGION_HEADER = ("schema", "q", "qstar", "rq", "converges", "boundary")
VALIDATION_SCHEMA = "validate-2"
VALIDATION_HEADER = (
    "schema",
    "check",
    "n",
    "q",
    "p",
    "metric",
    "analytic",
    "expected",
    "empirical",
    "stderr",
    "z",
    "tolerance",
    "passed",
)
HISTORY_HEADER = ("generation", "best_raw_mse", "best_penalized", "best_size")
BEST_EXPRESSIONS_HEADER = (
    "round",
    "seed",
    "raw_mse",
    "penalized",
    "size",
    "held_out_mse",
    "prefix",
    "simplified",
    "infix",
)
FLOAT_FORMAT = ".17g"

# numerics
EPS = float(numpy.finfo(numpy.float64).eps)
SERIES_THRESHOLD = 1e-6
ORACLE_EIGENVALUE_FLOOR = 1e-12
PROTECTED_DIVISION_THRESHOLD = 1e-12
PROTECTED_DIVISION_VALUE = 1.0
UNFIT_MSE = 1e30
CONVERGENCE_BOUND = 4.0
REGION_BOUNDARY_TOL = 0.05
FLOOR_GUARD = 1e-9

# random streams
SUBSTREAM_POPULATION = 0
SUBSTREAM_DATA = 2
SUBSTREAM_AUXILIARY = 3
SUBSTREAM_OUT_OF_SAMPLE = 4

# genetic programming
FUNCTION_ARITY = {"add": 2, "sub": 2, "mul": 2, "div": 2}
VARIABLES = ("q", "r")
CONSTANT_RANGE = (-1.0, 1.0)

# exit codes
EXIT_OK = 0
EXIT_VALIDATION_FAILURE = 1
EXIT_CONFIG_ERROR = 2
