from structcode.figures import (
    GAIN_LENGTHS,
    PANEL_COLUMNS,
    UnknownFigure,
    constrained_table,
    default_grid,
    figure_table,
    gain_table,
    ratio,
)

import math
import unittest


class HelperTests(unittest.TestCase):
    def test_ratio(self):
        self.assertEqual(2.0, ratio(3.0, 1.5))
        self.assertEqual(math.inf, ratio(1.0, 0.0))

    def test_default_grid(self):
        grid = default_grid()

        self.assertEqual(19, len(grid))
        self.assertAlmostEqual(0.05, grid[0])
        self.assertAlmostEqual(0.95, grid[-1])

    def test_unknown_figure(self):
        self.assertRaises(UnknownFigure, lambda: figure_table("4"))


class GainFigureTests(unittest.TestCase):
    def test_gain_rows(self):
        table = figure_table("1", [0.5])

        self.assertEqual(len(GAIN_LENGTHS), len(table))
        self.assertSequenceEqual(list(GAIN_LENGTHS), table.column("m"))

        eta, exact = table.column("eta"), table.column("eta_exact")
        self.assertAlmostEqual(0.72727, eta[0], places=5)
        self.assertAlmostEqual(eta[0], exact[0], places=9)
        self.assertIsNone(exact[-1])

    def test_gain_near_p_one(self):
        table = gain_table([2, 4], [0.999999])
        self.assertSequenceEqual([1.0, 2.0], [round(eta, 3) for eta in table.column("eta")])

    def test_gain_grows_as_p_shrinks(self):
        eta = gain_table([4], [0.001, 0.01, 0.1]).column("eta")
        self.assertSequenceEqual(sorted(eta, reverse=True), eta)


class RatePanelTests(unittest.TestCase):
    def test_cross_paired_panel(self):
        table = figure_table("2l", [0.25])
        row = dict(zip(table.columns, table.rows[0]))

        self.assertEqual(PANEL_COLUMNS, table.columns)
        self.assertAlmostEqual(4.120112, row["r_km"], places=6)
        self.assertLessEqual(row["r_km_or_side_b"], row["r_sw"] + 1e-9)
        self.assertGreater(row["r_km_or"], 0)

    def test_single_dsbs_panel(self):
        table = figure_table("2m", [0.1, 0.2])

        self.assertSequenceEqual([None, None], table.column("r_km"))

        for r_s, r_sv in zip(table.column("r_s"), table.column("r_sv")):
            self.assertAlmostEqual(r_s, r_sv, delta=1e-9)

    def test_paired_panel(self):
        table = figure_table("2r", [0.3])

        self.assertEqual(1, len(table))
        self.assertIsNotNone(table.column("h_inner")[0])


class ClosedFormFigureTests(unittest.TestCase):
    def test_constrained_figure(self):
        table = figure_table("3l", [0.1, 0.2])

        self.assertEqual(6, len(table))

        for km, sw, gain in zip(table.column("r_km"), table.column("r_sw"), table.column("gain")):
            self.assertAlmostEqual(sw / km, gain)

    def test_constrained_zero_rate(self):
        self.assertEqual(math.inf, constrained_table([2], [0.0]).column("gain")[0])

    def test_ternary_figure(self):
        table = figure_table("3r", [0.01, 0.1])

        for sw, closed in zip(table.column("r_sw"), table.column("r_sw_closed")):
            self.assertAlmostEqual(closed, sw, delta=1e-9)

        for km, bound in zip(table.column("r_km"), table.column("r_km_bound")):
            self.assertLessEqual(km, bound + 1e-9)

        gains = dict(zip(zip(table.column("m"), table.column("p")), table.column("gain")))
        self.assertGreater(gains[(2, 0.01)], gains[(2, 0.1)])
