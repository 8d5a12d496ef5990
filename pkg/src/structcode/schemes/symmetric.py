from dataclasses import dataclass

import numpy as np

from harness.annotations import example, scheme
from harness.registry import AbstractScheme
from structcode.field import (
    FieldMatrix,
    IntArray,
    UnsupportedModulus,
    as_modulus,
    scalar_inverse,
    symmetrize,
    transpose,
)
from structcode.schemes.common import (
    OddLength,
    Side,
    SourceMapping,
    check_same_shape,
    combined_blocks,
    encode_mapping,
    flatten_rows,
    split_halves,
)


@dataclass(frozen=True)
class SymmetricMessage:
    """The matrix-block form of the inner product message: `U`, `V` are m/2×l and `W` is l×l."""

    u: FieldMatrix
    v: FieldMatrix
    w: FieldMatrix

    @property
    def q(self) -> int:
        return self.u.q

    def __add__(self, other: "SymmetricMessage") -> "SymmetricMessage":
        return SymmetricMessage(self.u + other.u, self.v + other.v, self.w + other.w)


def sym_encode(x: FieldMatrix, side: Side) -> SourceMapping:
    """Stacked (m+l)×l mapping of an m×l source. Needs an odd field."""
    if not x.modulus.is_odd():
        raise UnsupportedModulus(x.q, "the symmetric product scheme needs an odd field")

    return encode_mapping(x, side)


def sym_combine(x1: SourceMapping, x2: SourceMapping) -> SymmetricMessage:
    combined = x1 + x2
    return SymmetricMessage(u=combined.top, v=combined.middle, w=combined.product)


def sym_decode(msg: SymmetricMessage) -> FieldMatrix:
    """
    Returns `symmetrize(UᵀV − W)`.

    `UᵀV − W = AᵀB + (B₁ᵀA₁ − A₁ᵀB₁)`, whose symmetric part is `AᵀB` whenever
    the product is symmetric. For other pairs the result is the
    symmetrization of `AᵀB` and no error is raised.
    """
    return symmetrize(msg.u.T @ msg.v - msg.w)


def sym_decode_batch(u: IntArray, v: IntArray, w: IntArray, q: int) -> IntArray:
    d = (transpose(u) @ v - w) % q
    return (scalar_inverse(2, q) * (d + transpose(d))) % q


def symmetric_product_batch(a: IntArray, b: IntArray, q: int) -> np.ndarray:
    """Mask of the pairs whose product `AᵀB` is symmetric."""
    d = (transpose(a) @ b) % q
    return np.all(d == transpose(d), axis=(1, 2))


def sym_binary_constrained_decode(u: FieldMatrix, v: FieldMatrix) -> FieldMatrix:
    """
    Binary variant: returns `UᵀV`. Under the constraints checked by
    `binary_constraints_hold` the cross terms cancel over F_2 and `W = 0`, so
    `UᵀV = A₁ᵀB₁ ⊕₂ A₂ᵀB₂ = AᵀB`.
    """
    return u.T @ v


def binary_constraints_hold(a: FieldMatrix, b: FieldMatrix) -> bool:
    """True when `A₁ᵀB₁ = B₁ᵀA₁` and `A₂ᵀA₁ = B₁ᵀB₂`."""
    check_same_shape(a, b)
    a1, a2 = split_halves(a)
    b1, b2 = split_halves(b)

    return (a1.T @ b1).is_symmetric() and a2.T @ a1 == b1.T @ b2


def binary_constraints_batch(a: IntArray, b: IntArray, q: int) -> np.ndarray:
    m = a.shape[1]

    if m % 2 != 0:
        raise OddLength(m)

    half = m // 2
    a1, a2 = a[:, :half], a[:, half:]
    b1, b2 = b[:, :half], b[:, half:]
    cross = (transpose(a1) @ b1) % q
    left = (transpose(a2) @ a1) % q
    right = (transpose(b1) @ b2) % q

    return np.all(cross == transpose(cross), axis=(1, 2)) & np.all(left == right, axis=(1, 2))


@scheme("sym", "Symmetric matrix product AᵀB over an odd field")
@example(a=[[1, 0], [2, 1]], b=[[1, 0], [2, 1]], q=3, expected=[[2, 2], [2, 1]])
@example(a=[[1], [2]], b=[[2], [1]], q=3, expected=[[1]])
@example(a=[[0, 0], [0, 0]], b=[[1, 2], [0, 1]], q=5, expected=[[0, 0], [0, 0]])
class SymmetricScheme(AbstractScheme):
    """Decodes `AᵀB` for the pairs whose product is symmetric."""

    def check_parameters(self, q: int, m: int, l: int) -> None:
        if not as_modulus(q).is_odd():
            raise UnsupportedModulus(q, "the symmetric product scheme needs an odd field")

        if m % 2 != 0:
            raise OddLength(m)

    def compute(self, a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
        check_same_shape(a, b)
        return sym_decode(sym_combine(sym_encode(a, Side.A), sym_encode(b, Side.B)))

    def compute_batch(self, a: IntArray, b: IntArray, q: int) -> IntArray:
        u, v, w = combined_blocks(a, b, q)
        return sym_decode_batch(u, v, w, q)

    def admissible_batch(self, a: IntArray, b: IntArray, q: int) -> np.ndarray:
        return symmetric_product_batch(a, b, q)


@scheme("sym-binary", "Symmetric matrix product over F_2 under the cancellation constraints")
@example(a=[[1], [0]], b=[[1], [0]], q=2, expected=[[1]])
@example(a=[[1, 1], [0, 0]], b=[[1, 1], [0, 0]], q=2, expected=[[1, 1], [1, 1]])
@example(a=[[0, 0], [0, 0]], b=[[1, 0], [0, 1]], q=2, expected=[[0, 0], [0, 0]])
class SymmetricBinaryScheme(AbstractScheme):
    """Decodes `AᵀB` over F_2 from `UᵀV` for the pairs satisfying the constraints."""

    def check_parameters(self, q: int, m: int, l: int) -> None:
        if q != 2:
            raise UnsupportedModulus(q, "the constrained variant works over F_2 only")

        if m % 2 != 0:
            raise OddLength(m)

    def compute(self, a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
        check_same_shape(a, b)
        message = sym_combine(encode_mapping(a, Side.A), encode_mapping(b, Side.B))
        return sym_binary_constrained_decode(message.u, message.v)

    def compute_batch(self, a: IntArray, b: IntArray, q: int) -> IntArray:
        u, v, _ = combined_blocks(a, b, q)
        return (transpose(u) @ v) % q

    def admissible_batch(self, a: IntArray, b: IntArray, q: int) -> np.ndarray:
        return binary_constraints_batch(a, b, q)


def symmetric_message_batch(a: IntArray, b: IntArray, q: int) -> IntArray:
    """`(U, V, W)` of stacked pairs flattened into rows."""
    return flatten_rows(*combined_blocks(a, b, q))
