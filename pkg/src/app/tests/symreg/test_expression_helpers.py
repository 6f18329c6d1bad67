import csv
import tempfile
import unittest
from pathlib import Path

import numpy as np

from src.app.shared.domain.constants import BEST_EXPRESSIONS_HEADER, HISTORY_HEADER
from src.app.shared.domain.exceptions import ExpressionSyntaxError
from src.app.symreg.helpers.expression_helpers import (
    SECOND_ORDER_PREFIX,
    parse_prefix,
    save_best_expressions,
    save_history,
    second_order_expression,
    to_infix,
    to_prefix,
)
from src.app.symreg.models.expression import Expression, FitnessReport, GpResult
from src.app.symreg.services.operators import random_subtree


class PrefixTests(unittest.TestCase):
    def test_second_order_reference(self):
        self.assertEqual(to_prefix(second_order_expression()), SECOND_ORDER_PREFIX)

    def test_parse_inverts_format(self):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(1)))
        for _ in range(20):
            expr = Expression(nodes=random_subtree(rng, 5, "grow"))
            self.assertEqual(parse_prefix(to_prefix(expr)), expr)

    def test_single_terminal(self):
        self.assertEqual(parse_prefix("q").nodes, ("q",))
        self.assertEqual(parse_prefix("-0.5").nodes, (-0.5,))

    def test_syntax_errors(self):
        for text in ("", "(add q)", "(pow q r)", "(add q r", "q r", ")", "x", "inf"):
            with self.assertRaises(ExpressionSyntaxError):
                parse_prefix(text)

    def test_infix(self):
        self.assertEqual(to_infix(parse_prefix("(mul q r)")), "q * r")
        self.assertEqual(
            to_infix(parse_prefix("(sub (div q 2.0) r)")), "(q / 2.0) - r"
        )


class OutputTests(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.root = Path(self.directory.name)
        report = FitnessReport(
            raw_mse=0.5, penalized_fitness=0.5003, size=3, generation=0
        )
        self.result = GpResult(
            seed=4,
            best=parse_prefix("(mul q r)"),
            best_report=report,
            history=[report, report.model_copy(update={"generation": 1})],
        )

    def tearDown(self):
        self.directory.cleanup()

    def test_history(self):
        path = save_history(self.result, self.root / "history.csv")
        with path.open(newline="") as f:
            rows = list(csv.reader(f))
        self.assertEqual(tuple(rows[0]), HISTORY_HEADER)
        self.assertEqual(rows[2][0], "1")
        self.assertEqual(float(rows[2][2]), 0.5003)
        self.assertEqual(rows[2][3], "3")

    def test_best_expressions(self):
        path = save_best_expressions(
            [self.result], [0.25], [self.result.best], self.root / "best.csv"
        )
        with path.open(newline="") as f:
            rows = list(csv.reader(f))
        self.assertEqual(tuple(rows[0]), BEST_EXPRESSIONS_HEADER)
        self.assertEqual(rows[1][0:2], ["0", "4"])
        self.assertEqual(rows[1][-3:], ["(mul q r)", "(mul q r)", "q * r"])
