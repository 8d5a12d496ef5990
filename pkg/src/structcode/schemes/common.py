from dataclasses import dataclass
from enum import Enum

import numpy as np

from structcode.field import FieldMatrix, IntArray, transpose


class Side(Enum):
    """Which of the two distributed encoders a mapping belongs to."""

    A = "a"
    B = "b"

    def __str__(self) -> str:
        return self.value.upper()


class OddLength(ValueError):
    def __init__(self, m: int):
        super().__init__(f"the source length m={m} must be even to split it into halves")
        self.m = m


class ShapeMismatch(ValueError):
    def __init__(self, what: str, expected: object, actual: object):
        super().__init__(f"{what} has shape {actual} but {expected} was expected")
        self.expected = expected
        self.actual = actual


class MalformedMessage(ValueError):
    """The message cannot have been produced by encoding any source pair."""

    def __init__(self, reason: str):
        super().__init__(f"malformed message: {reason}")
        self.reason = reason


def check_even_rows(x: FieldMatrix):
    if x.rows % 2 != 0:
        raise OddLength(x.rows)


def split_halves(x: FieldMatrix) -> tuple[FieldMatrix, FieldMatrix]:
    """Returns `(X₁, X₂)` where `X₁` holds the first m/2 rows of `X` and `X₂` the rest."""
    check_even_rows(x)
    half = x.rows // 2
    return x.row_slice(0, half), x.row_slice(half, x.rows)


@dataclass(frozen=True)
class SourceMapping:
    """
    The stacked output `[top; middle; product]` of one encoder's mapping.

    The A encoder maps `A = [A₁; A₂]` to `[A₂; A₁; A₂ᵀA₁]` and the B encoder maps
    `B = [B₁; B₂]` to `[B₁; B₂; B₁ᵀB₂]`. Adding the two halves gives the
    blocks `(U, V, W)` the receiver decodes from. A combined mapping has no
    side.
    """

    top: FieldMatrix
    middle: FieldMatrix
    product: FieldMatrix
    side: Side | None = None

    def __post_init__(self):
        if self.top.shape != self.middle.shape:
            raise ShapeMismatch("middle block", self.top.shape, self.middle.shape)

        if self.product.shape != (self.top.cols, self.top.cols):
            raise ShapeMismatch(
                "product block", (self.top.cols, self.top.cols), self.product.shape
            )

    @property
    def q(self) -> int:
        return self.top.q

    def stacked(self) -> FieldMatrix:
        return FieldMatrix.vstack(self.top, self.middle, self.product)

    def __add__(self, other: "SourceMapping") -> "SourceMapping":
        if self.top.shape != other.top.shape:
            raise ShapeMismatch("mapping", self.top.shape, other.top.shape)

        return SourceMapping(
            top=self.top + other.top,
            middle=self.middle + other.middle,
            product=self.product + other.product,
        )


def encode_mapping(x: FieldMatrix, side: Side) -> SourceMapping:
    """Applies the side's half-swapping mapping to an m×l source matrix."""
    first, second = split_halves(x)

    if side == Side.A:
        return SourceMapping(top=second, middle=first, product=second.T @ first, side=side)
    else:
        return SourceMapping(top=first, middle=second, product=first.T @ second, side=side)


def mapping_blocks(x: IntArray, side: Side, q: int) -> tuple[IntArray, IntArray, IntArray]:
    """
    Batched `encode_mapping` over an array of shape `(N, m, l)`. Returns the
    top, middle and product blocks with shapes `(N, m/2, l)`, `(N, m/2, l)` and
    `(N, l, l)`.
    """
    m = x.shape[-2]

    if m % 2 != 0:
        raise OddLength(m)

    first, second = x[..., : m // 2, :], x[..., m // 2 :, :]

    if side == Side.A:
        top, middle = second, first
    else:
        top, middle = first, second

    return top, middle, (transpose(top) @ middle) % q


def combined_blocks(a: IntArray, b: IntArray, q: int) -> tuple[IntArray, IntArray, IntArray]:
    """Batched `(U, V, W)` for stacked source pairs."""
    a_top, a_middle, a_product = mapping_blocks(a, Side.A, q)
    b_top, b_middle, b_product = mapping_blocks(b, Side.B, q)

    return (a_top + b_top) % q, (a_middle + b_middle) % q, (a_product + b_product) % q


def flatten_rows(*blocks: IntArray) -> IntArray:
    """Joins batched blocks into one `(N, k)` array with a row per pair."""
    count = blocks[0].shape[0]
    return np.concatenate([block.reshape(count, -1) for block in blocks], axis=1)


def check_same_shape(a: FieldMatrix, b: FieldMatrix):
    if a.shape != b.shape:
        raise ShapeMismatch("B", a.shape, b.shape)
