from harness.data import (
    MissingColumn,
    RateTable,
    RowLengthMismatch,
    format_cell,
    parse_cell,
)
from pathlib import Path
import contextlib
import io
import math
import tempfile
import unittest


class CellTests(unittest.TestCase):
    def test_format_cell(self):
        self.assertEqual("", format_cell(None))
        self.assertEqual("1", format_cell(True))
        self.assertEqual("17", format_cell(17))
        self.assertEqual("0.333333333", format_cell(1 / 3))
        self.assertEqual("inf", format_cell(math.inf))
        self.assertEqual("-inf", format_cell(-math.inf))
        self.assertEqual("km-or", format_cell("km-or"))

    def test_parse_cell(self):
        self.assertIsNone(parse_cell(""))
        self.assertEqual(17, parse_cell("17"))
        self.assertEqual(0.25, parse_cell("0.25"))
        self.assertEqual(math.inf, parse_cell("inf"))
        self.assertEqual("side-b", parse_cell("side-b"))


class RateTableTests(unittest.TestCase):
    def test_rows_by_position_or_name(self):
        table = RateTable(["p", "r_sw", "r_km"])
        table.add_row([0.1, 1.5, 2.0])
        table.add_row({"p": 0.2, "r_sw": 1.75})

        self.assertEqual(2, len(table))
        self.assertSequenceEqual([2.0, None], table.column("r_km"))

    def test_shape_errors(self):
        table = RateTable(["p", "r_sw"])

        self.assertRaises(RowLengthMismatch, lambda: table.add_row([0.1]))
        self.assertRaises(MissingColumn, lambda: table.add_row({"q": 2}))
        self.assertRaises(MissingColumn, lambda: table.column("gain"))

    def test_serialize(self):
        table = RateTable(["p", "variant", "rate"], [[0.5, "km-or", 2.0], [0.25, "side-b", None]])

        self.assertEqual("p,variant,rate\n0.5,km-or,2\n0.25,side-b,\n", table.serialize())

    def test_text_read_back(self):
        table = RateTable(["m", "p", "eta"], [[2, 0.5, 4 / 5.5], [4, 0.0, math.inf]])
        back = RateTable.deserialize(table.serialize())

        self.assertEqual(("m", "p", "eta"), back.columns)
        self.assertSequenceEqual([2, 4], back.column("m"))
        self.assertAlmostEqual(4 / 5.5, back.column("eta")[0], places=8)
        self.assertEqual(math.inf, back.column("eta")[1])

    def test_empty_text(self):
        self.assertRaises(ValueError, lambda: RateTable.deserialize(""))

    def test_write_file_and_stdout(self):
        table = RateTable(["p", "r_sw"], [[0.5, 2.0]])

        with tempfile.TemporaryDirectory() as tempdir:
            path = Path(tempdir) / "rates.csv"
            table.write(path)

            self.assertEqual(table, RateTable.read(path))

        out = io.StringIO()

        with contextlib.redirect_stdout(out):
            table.write(None)

        self.assertEqual("p,r_sw\n0.5,2\n", out.getvalue())
