import unittest

from src.app.analytics.services.sweeps import open_grid, region_map, series_sweep
from src.app.shared.domain.exceptions import ConfigRejectedError, EmptyGridError


class OpenGridTests(unittest.TestCase):
    def test_excludes_ends(self):
        grid = open_grid(0.0, 1.0, 3)
        self.assertEqual(len(grid), 3)
        self.assertAlmostEqual(grid[0], 0.25)
        self.assertAlmostEqual(grid[-1], 0.75)


class SeriesSweepTests(unittest.TestCase):
    def test_row_count_and_order(self):
        qs = open_grid(0.0, 7.0, 50)
        qstars = open_grid(0.0, 1.0, 20)
        points = series_sweep(qs, qstars, [1, 2, 4, 8, 16])
        self.assertEqual(len(points), 5 * 50 * 20)
        self.assertEqual([p.order for p in points[:5]], [1, 2, 4, 8, 16])
        self.assertEqual(points[0].qstar, points[5 * 50 - 1].qstar)
        self.assertEqual(points[0].q, points[4].q)

    def test_partial_sums_approach_closed_form(self):
        points = series_sweep([0.5], [0.5], [1, 60])
        first, last = points
        self.assertGreater(abs(first.partial_sum - first.closed_form), 1e-3)
        self.assertLess(abs(last.partial_sum - last.closed_form), 1e-12)

    def test_orders_checked(self):
        with self.assertRaises(ConfigRejectedError):
            series_sweep([0.5], [0.5], [])
        with self.assertRaises(ConfigRejectedError):
            series_sweep([0.5], [0.5], [0, 1])

    def test_empty_grid(self):
        with self.assertRaises(EmptyGridError):
            series_sweep([], [0.5], [1])


class RegionMapTests(unittest.TestCase):
    def test_flags(self):
        cells = region_map([0.5, 6.0], [0.5, 0.95])
        by_key = {(c.q, c.qstar): c for c in cells}
        self.assertTrue(by_key[(0.5, 0.5)].converges)
        self.assertFalse(by_key[(0.5, 0.5)].boundary)
        self.assertFalse(by_key[(6.0, 0.95)].converges)
        self.assertEqual(len(cells), 4)

    def test_boundary_flag(self):
        cell = region_map([5.0], [20.0 / 21.0])[0]
        self.assertTrue(cell.boundary)

    def test_empty_grid(self):
        with self.assertRaises(EmptyGridError):
            region_map([0.5], [])
