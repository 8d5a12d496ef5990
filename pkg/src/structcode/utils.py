from dataclasses import dataclass
from typing import Generator

import re


def split(
    text: str, sep: str, ignore_empty: bool = True, strip_whitespace=True
) -> list[str]:
    """
    Splits `text` into multiple parts using `sep` as the separator.

    ignore_empty:      When true, only parts with len > 0 are returned.
    strip_whitespace:  When true, parts have leading and trailing whitespace removed.
    """

    def is_empty(s: str):
        if strip_whitespace:
            return len(s.strip()) == 0
        else:
            return len(s) == 0

    parts = text.split(sep) if sep != " " else text.split()

    if strip_whitespace:
        parts = [x.strip() for x in parts]

    if ignore_empty:
        return [x for x in parts if not is_empty(x)]
    else:
        return parts


def find_ints(text: str) -> list[int]:
    """Returns all the integers found in the text string and ignores any non-number characters."""
    return list(map(int, re.findall(r"-?[0-9]+", text)))


def find_numbers(text: str) -> list[float]:
    """Returns all decimal numbers (with optional exponent) found in the text string."""
    return list(map(float, re.findall(r"-?[0-9]+(?:\.[0-9]*)?(?:[eE][-+]?[0-9]+)?", text)))


def parse_grid(text: str) -> list[float]:
    """
    Parses a `lo:hi:steps` grid description into `steps` evenly spaced values
    from `lo` to `hi` inclusive.

    Example:
    ```
        parse_grid("0.1:0.5:5") # returns [0.1, 0.2, 0.3, 0.4, 0.5]
    ```
    """
    parts = split(text, ":", ignore_empty=False)

    if len(parts) != 3:
        raise ValueError(f"grid `{text}` must have the form lo:hi:steps")

    lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])

    if steps < 1:
        raise ValueError(f"grid `{text}` needs at least one step")

    if steps == 1:
        return [lo]

    if hi <= lo:
        raise ValueError(f"grid `{text}` must be increasing")

    return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]


@dataclass(order=True)
class Range:
    start: int
    length: int

    def __init__(self, start: int, length: int) -> None:
        if length < 1:
            raise ValueError(f"Range length {length} must be larger than zero")

        self.start = start
        self.length = length

    def __str__(self):
        return f"[{self.start}, {self.start + self.length - 1}]"

    def __contains__(self, value: int) -> bool:
        return value >= self.start and value < (self.start + self.length)

    def __iter__(self) -> Generator[int, None, None]:
        for i in range(self.start, self.start + self.length):
            yield i

    def __len__(self) -> int:
        return self.length

    @property
    def stop(self) -> int:
        return self.start + self.length


def partition(total: int, chunk_size: int) -> list[Range]:
    """
    Splits the indices `[0, total)` into consecutive ranges of at most
    `chunk_size` elements.
    """
    if chunk_size < 1:
        raise ValueError(f"chunk size {chunk_size} must be larger than zero")

    return [
        Range(start, min(chunk_size, total - start)) for start in range(0, total, chunk_size)
    ]
