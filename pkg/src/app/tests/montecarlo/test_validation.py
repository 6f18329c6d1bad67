import argparse
import math
import unittest

from src.app.analytics.services.finite_size import finite_frobenius, finite_kl_sample
from src.app.analytics.services.sweeps import open_grid
from src.app.api.commands.validate import acceptance_grid
from src.app.montecarlo.models.experiment import (
    ExperimentConfig,
    ExperimentRecord,
    Metric,
    MetricSummary,
)
from src.app.montecarlo.models.validation import CheckKind
from src.app.montecarlo.services.harness import derive_cell_seed, run_cell
from src.app.montecarlo.services.validation import (
    analytic_prediction,
    build_report,
    check_population_independence,
    check_record,
    finite_size_expectation,
    link_checks,
    region_checks,
    series_checks,
    tolerance,
)


def record(
    mean: float, stderr: float, p: float = 1.0, metric: Metric = Metric.KL_SAMPLE
) -> ExperimentRecord:
    config = ExperimentConfig(
        n=100, q=0.5, p=p, replicates=10, seed=0, metrics=(metric,)
    )
    return ExperimentRecord(
        config=config,
        effective_q=config.effective_q,
        summaries={metric: MetricSummary(mean=mean, stderr=stderr, count=10)},
    )


class PredictionTests(unittest.TestCase):
    def test_predictions(self):
        cell = record(0.0, 0.0).config
        self.assertAlmostEqual(
            analytic_prediction(cell, Metric.KL_SAMPLE), 0.346574, 6
        )
        oracle = ExperimentConfig(
            n=100, q=1.0, p=1.0, replicates=1, seed=0, metrics=(Metric.KL_ORACLE,)
        )
        self.assertAlmostEqual(analytic_prediction(oracle, Metric.KL_ORACLE), 1 / 9, 12)
        self.assertAlmostEqual(
            analytic_prediction(oracle, Metric.FROBENIUS_ORACLE), 0.5, 12
        )

    def test_no_prediction(self):
        identity = record(0.0, 0.0, p=0.0, metric=Metric.KL_ORACLE).config
        self.assertIsNone(analytic_prediction(identity, Metric.KL_ORACLE))
        divergent = ExperimentConfig(
            n=100, q=6.0, p=19.0, replicates=1, seed=0, metrics=(Metric.KL_ORACLE,)
        )
        self.assertIsNone(analytic_prediction(divergent, Metric.KL_ORACLE))

    def test_in_out_prediction(self):
        cell = record(0.0, 0.0, metric=Metric.KL_IN_OUT).config
        self.assertAlmostEqual(analytic_prediction(cell, Metric.KL_IN_OUT), 0.5, 12)

    def test_finite_size_expectation(self):
        cell = record(0.0, 0.0).config
        self.assertEqual(
            finite_size_expectation(cell, Metric.KL_SAMPLE), finite_kl_sample(100, 200)
        )
        frobenius = ExperimentConfig(
            n=200,
            q=4.0,
            p=3.0,
            replicates=1,
            seed=0,
            metrics=(Metric.FROBENIUS_ORACLE,),
        )
        self.assertEqual(
            finite_size_expectation(frobenius, Metric.FROBENIUS_ORACLE),
            finite_frobenius(200, 3.0, 4.0),
        )
        identity = record(0.0, 0.0, p=0.0, metric=Metric.KL_ORACLE).config
        self.assertIsNone(finite_size_expectation(identity, Metric.KL_ORACLE))
        linear = ExperimentConfig(
            n=100, q=0.5, p=1.0, replicates=1, seed=0, metrics=(Metric.KL_LINEAR,)
        )
        self.assertIsNone(finite_size_expectation(linear, Metric.KL_LINEAR))

    def test_finite_size_expectation_out_of_domain(self):
        # t* = 13 for n = 10 at p = 3 has no finite second moment
        cell = ExperimentConfig(
            n=10, q=0.5, p=3.0, replicates=1, seed=0, metrics=(Metric.KL_ORACLE,)
        )
        self.assertIsNone(finite_size_expectation(cell, Metric.KL_ORACLE))

    def test_refined_tolerance(self):
        # an exact expectation leaves only the sampling error and a 0.1% floor
        self.assertAlmostEqual(
            tolerance(Metric.KL_SAMPLE, 0.5, 0.0, 100, 0.5, refined=True), 5e-4, 12
        )
        self.assertAlmostEqual(
            tolerance(Metric.KL_SAMPLE, 0.5, 0.01, 100, 0.5, refined=True), 0.04, 12
        )
        # 0.03 * 2.0 + 2 / 100
        self.assertAlmostEqual(
            tolerance(Metric.FROBENIUS_ORACLE, 2.0, 0.0, 100, 0.5, refined=True),
            0.08,
            12,
        )

    def test_tolerance(self):
        self.assertAlmostEqual(
            tolerance(Metric.TAU_INV_WISHART, 2.0, 0.0, 100, 0.5), 0.08, 12
        )
        self.assertAlmostEqual(
            tolerance(Metric.TAU_INV_WISHART, 2.0, 0.1, 100, 0.5), 0.4, 12
        )
        # 0.03 * 0.5 + (2 + 0.5 / 0.25) / 100
        self.assertAlmostEqual(
            tolerance(Metric.KL_SAMPLE, 0.5, 0.0, 100, 0.5), 0.055, 12
        )


class RecordCheckTests(unittest.TestCase):
    def test_pass_and_fail(self):
        expected = finite_kl_sample(100, 200)
        passing = check_record(record(expected + 0.002, 0.001))[0]
        self.assertTrue(passing.passed)
        self.assertEqual(passing.check, CheckKind.MONTE_CARLO)
        self.assertEqual(passing.expected, expected)
        self.assertAlmostEqual(passing.z, 2.0, 6)
        self.assertAlmostEqual(passing.tolerance, 0.004, 12)
        failing = check_record(record(expected + 0.006, 0.001))[0]
        self.assertFalse(failing.passed)

    def test_large_n_value_is_not_the_center(self):
        # the asymptotic value lies more than 10 standard errors below the exact one
        check = check_record(record(0.346574, 0.001))[0]
        self.assertAlmostEqual(check.analytic, 0.346574, 6)
        self.assertFalse(check.passed)
        self.assertLess(check.z, -10.0)

    def test_zero_stderr_z(self):
        check = check_record(record(0.6, 0.0))[0]
        self.assertEqual(check.z, math.inf)

    def test_population_independence(self):
        close = check_population_independence(
            record(0.35, 0.01), record(0.36, 0.01, p=0.0), Metric.KL_SAMPLE
        )
        self.assertTrue(close.passed)
        self.assertAlmostEqual(close.stderr, math.hypot(0.01, 0.01), 14)
        far = check_population_independence(
            record(0.35, 0.001), record(0.40, 0.001, p=0.0), Metric.KL_SAMPLE
        )
        self.assertFalse(far.passed)

    def test_report(self):
        reference, identity = record(0.35, 0.01), record(0.36, 0.01, p=0.0)
        report = build_report(
            [reference, identity, record(0.9, 0.001)],
            independence_pairs=[(reference, identity)],
        )
        self.assertEqual(len(report.checks), 4)
        self.assertFalse(report.passed)
        self.assertEqual(len(report.failures), 1)


class NumericCheckTests(unittest.TestCase):
    def test_series(self):
        checks = series_checks(open_grid(0.0, 7.0, 50), open_grid(0.0, 1.0, 20))
        self.assertTrue(checks)
        self.assertTrue(all(check.passed for check in checks))
        self.assertEqual(
            {check.check for check in checks}, {CheckKind.SERIES_CONVERGENCE}
        )

    def test_region(self):
        checks = region_checks([3.0, 4.5, 5.0, 7.0])
        self.assertEqual(len(checks), 5)
        self.assertTrue(all(check.passed for check in checks))

    def test_links(self):
        checks = link_checks()
        self.assertEqual(len(checks), 110)
        self.assertTrue(all(check.passed for check in checks))


class AcceptanceGridTests(unittest.TestCase):
    def test_heavy_tailed_frobenius_cells(self):
        # the p = 3 Oracle cells of the default acceptance run, same seeds
        args = argparse.Namespace(n=200, replicates=100, seed=42)
        grid, _ = acceptance_grid(args)
        cells = [
            config.model_copy(update={"seed": derive_cell_seed(42, index)})
            for index, config in enumerate(grid)
            if config.p == 3.0
        ]
        self.assertEqual(len(cells), 4)
        for config in cells:
            checks = [
                check
                for check in check_record(run_cell(config, workers=1))
                if check.metric == Metric.FROBENIUS_ORACLE.value
            ]
            self.assertEqual(len(checks), 1)
            check = checks[0]
            self.assertIsNotNone(check.expected)
            self.assertTrue(
                check.passed,
                f"q={check.q}: {check.empirical} vs {check.expected} "
                f"(tolerance {check.tolerance})",
            )

    def test_in_out_cell(self):
        args = argparse.Namespace(n=200, replicates=100, seed=42)
        grid, _ = acceptance_grid(args)
        in_out = [config for config in grid if Metric.KL_IN_OUT in config.metrics]
        self.assertEqual(len(in_out), 1)
        self.assertEqual(in_out[0].q, 0.5)
        self.assertEqual(analytic_prediction(in_out[0], Metric.KL_IN_OUT), 0.5)
