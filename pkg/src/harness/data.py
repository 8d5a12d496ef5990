from collections.abc import Mapping, Sequence
from pathlib import Path

import csv
import io
import logging
import math

logger = logging.getLogger(__name__)

type Cell = float | int | str | None


class MissingColumn(ValueError):
    def __init__(self, name: str, columns: Sequence[str]):
        super().__init__(f"rate table has no column `{name}`, columns are {', '.join(columns)}")
        self.name = name


class RowLengthMismatch(ValueError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"rate table row has {actual} values, expected {expected}")
        self.expected = expected
        self.actual = actual


def format_cell(value: Cell) -> str:
    """
    Renders one CSV cell. Floats use 9 significant digits so that identical
    runs produce identical files; missing values are left empty.
    """
    if value is None:
        return ""
    elif isinstance(value, bool):
        return str(int(value))
    elif isinstance(value, int):
        return str(value)
    elif isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.9g}"
    else:
        return str(value)


def parse_cell(text: str) -> Cell:
    if text == "":
        return None

    try:
        return int(text)
    except ValueError:
        pass

    try:
        return float(text)
    except ValueError:
        return text


class RateTable:
    """
    A sweep result: the sweep variable(s) first, then one column per named
    quantity. Serializes to CSV with a header row.
    """

    columns: tuple[str, ...]
    rows: list[tuple[Cell, ...]]

    def __init__(self, columns: Sequence[str], rows: Sequence[Sequence[Cell]] | None = None):
        self.columns = tuple(columns)
        self.rows = []

        for row in rows or []:
            self.add_row(row)

    def add_row(self, values: Sequence[Cell] | Mapping[str, Cell]):
        """Appends a row given either in column order or as a column name mapping."""
        if isinstance(values, Mapping):
            for name in values:
                if name not in self.columns:
                    raise MissingColumn(name, self.columns)
            row = tuple(values.get(c) for c in self.columns)
        else:
            row = tuple(values)

        if len(row) != len(self.columns):
            raise RowLengthMismatch(len(self.columns), len(row))

        self.rows.append(row)

    def column(self, name: str) -> list[Cell]:
        if name not in self.columns:
            raise MissingColumn(name, self.columns)

        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def __len__(self) -> int:
        return len(self.rows)

    def __eq__(self, value: object) -> bool:
        if type(value) is RateTable:
            return self.columns == value.columns and self.rows == value.rows
        else:
            return False

    def __repr__(self) -> str:
        return f"RateTable(columns={self.columns}, rows={len(self.rows)})"

    def serialize(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)

        for row in self.rows:
            writer.writerow([format_cell(v) for v in row])

        return buffer.getvalue()

    @staticmethod
    def deserialize(text: str) -> "RateTable":
        reader = csv.reader(io.StringIO(text))
        lines = [line for line in reader if len(line) > 0]

        if len(lines) == 0:
            raise ValueError("rate table text is empty, expected a header row")

        table = RateTable(lines[0])

        for line in lines[1:]:
            table.add_row([parse_cell(cell) for cell in line])

        return table

    def write(self, path: Path | str | None):
        """Writes the table to `path`, or to standard output when no path is given."""
        text = self.serialize()

        if path is None:
            print(text, end="")
        else:
            with open(path, "w", newline="") as f:
                f.write(text)

            logger.info(f"wrote {len(self.rows)} rows to {path}")

    @staticmethod
    def read(path: Path | str) -> "RateTable":
        with open(path, "r", newline="") as f:
            return RateTable.deserialize(f.read())
