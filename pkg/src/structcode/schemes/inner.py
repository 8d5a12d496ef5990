from dataclasses import dataclass

from harness.annotations import example, scheme
from harness.registry import AbstractScheme
from structcode.field import FieldMatrix, IntArray, as_modulus, transpose
from structcode.schemes.common import (
    OddLength,
    ShapeMismatch,
    Side,
    SourceMapping,
    check_same_shape,
    combined_blocks,
    encode_mapping,
    flatten_rows,
)


@dataclass(frozen=True)
class InnerProductMessage:
    """What the receiver sees for a pair of length-m vectors: `U`, `V` (m/2×1) and the scalar `W`."""

    u: FieldMatrix
    v: FieldMatrix
    w: int

    @property
    def q(self) -> int:
        return self.u.q

    def as_column(self) -> FieldMatrix:
        """The message as the single (m+1)×1 column `[U; V; W]`."""
        return FieldMatrix.vstack(self.u, self.v, FieldMatrix([[self.w]], self.q))

    def __add__(self, other: "InnerProductMessage") -> "InnerProductMessage":
        return InnerProductMessage(self.u + other.u, self.v + other.v, (self.w + other.w) % self.q)


def ip_encode(x: FieldMatrix, side: Side) -> SourceMapping:
    """Maps a length-m column to the stacked (m+1)×1 mapping of its side."""
    if x.cols != 1:
        raise ShapeMismatch("inner product source", (x.rows, 1), x.shape)

    return encode_mapping(x, side)


def ip_combine(x1: SourceMapping, x2: SourceMapping) -> InnerProductMessage:
    combined = x1 + x2

    if combined.top.cols != 1:
        raise ShapeMismatch("inner product mapping", (combined.top.rows, 1), combined.top.shape)

    return InnerProductMessage(u=combined.top, v=combined.middle, w=combined.product.item())


def ip_decode(msg: InnerProductMessage) -> int:
    """Returns `(UᵀV − W) mod q`, which is `⟨A, B⟩` for every encoded pair."""
    return ((msg.u.T @ msg.v).item() - msg.w) % msg.q


def ip_decode_batch(u: IntArray, v: IntArray, w: IntArray, q: int) -> IntArray:
    return (transpose(u) @ v - w) % q


@scheme("inner", "Inner product of two length-m vectors")
@example(a=[[1], [2]], b=[[2], [1]], q=3, expected=1)
@example(a=[[1], [1]], b=[[1], [0]], q=2, expected=1)
@example(a=[[0], [0], [0], [0]], b=[[1], [1], [0], [1]], q=2, expected=0)
@example(a=[[3], [1]], b=[[4], [2]], q=5, expected=4)
class InnerProductScheme(AbstractScheme):
    def check_parameters(self, q: int, m: int, l: int) -> None:
        as_modulus(q)

        if m % 2 != 0:
            raise OddLength(m)

        if l != 1:
            raise ShapeMismatch("inner product source", (m, 1), (m, l))

    def compute(self, a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
        check_same_shape(a, b)
        message = ip_combine(ip_encode(a, Side.A), ip_encode(b, Side.B))
        return FieldMatrix([[ip_decode(message)]], a.modulus)

    def compute_batch(self, a: IntArray, b: IntArray, q: int) -> IntArray:
        u, v, w = combined_blocks(a, b, q)
        return ip_decode_batch(u, v, w, q)


def inner_message_batch(a: IntArray, b: IntArray, q: int) -> IntArray:
    """The messages `[U; V; W]` of stacked length-m column pairs as rows of an `(N, m+1)` array."""
    return flatten_rows(*combined_blocks(a, b, q))
