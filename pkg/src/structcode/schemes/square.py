from dataclasses import dataclass

import logging

import numpy as np

from harness.annotations import example, scheme
from harness.registry import AbstractScheme
from structcode.field import (
    FieldMatrix,
    IntArray,
    ModulusMismatch,
    UnsupportedModulus,
    as_modulus,
    scalar_inverse,
    transpose,
)
from structcode.schemes.common import (
    MalformedMessage,
    ShapeMismatch,
    Side,
    check_same_shape,
    flatten_rows,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SquareMessage:
    """
    One `(S_j, G_j)` pair per column j of the product. Combined, `S_j = A ⊕ B̃_j`
    and `G_j = AᵀA ⊕ B̃_jᵀB̃_j`.
    """

    s: tuple[FieldMatrix, ...]
    g: tuple[FieldMatrix, ...]

    @property
    def q(self) -> int:
        return self.s[0].q

    @property
    def l(self) -> int:
        return len(self.s)

    def __add__(self, other: "SquareMessage") -> "SquareMessage":
        if self.l != other.l:
            raise ShapeMismatch("square message", self.l, other.l)

        return SquareMessage(
            s=tuple(x + y for x, y in zip(self.s, other.s)),
            g=tuple(x + y for x, y in zip(self.g, other.g)),
        )


def replicate_column(b: FieldMatrix, j: int) -> FieldMatrix:
    """`B̃_j`: column j (zero based) of B repeated across all l columns."""
    column = b.entries[:, j : j + 1]
    return FieldMatrix(np.repeat(column, b.cols, axis=1), b.modulus)


def _check_square_parameters(q: int, l: int):
    if not as_modulus(q).is_odd():
        raise UnsupportedModulus(q, "the general product scheme needs an odd field")

    if l < 2:
        raise ShapeMismatch("general product source", "l >= 2 columns", l)


def sq_encode(x: FieldMatrix, side: Side) -> SquareMessage:
    """
    The A side sends `(A, AᵀA)` for every column index. The B side sends
    `(B̃_j, B̃_jᵀB̃_j)` for each column j.
    """
    _check_square_parameters(x.q, x.cols)

    if side == Side.A:
        gram = x.T @ x
        return SquareMessage(s=(x,) * x.cols, g=(gram,) * x.cols)

    replicas = tuple(replicate_column(x, j) for j in range(x.cols))
    return SquareMessage(s=replicas, g=tuple(r.T @ r for r in replicas))


def sq_combine(x1: SquareMessage, x2: SquareMessage) -> SquareMessage:
    if x1.q != x2.q:
        raise ModulusMismatch(x1.q, x2.q)

    return x1 + x2


def sq_decode(msg: SquareMessage) -> FieldMatrix:
    """
    Recovers `D = AᵀB` column by column.

    `M_j = S_jᵀS_j − G_j = AᵀB̃_j ⊕ B̃_jᵀA` has `(i, k)` entry `d_ij ⊕ d_kj`. The
    diagonal gives `d_ij = inv(2)·(M_j)_ii` and the off-diagonal entries must
    agree with it, otherwise the message is rejected.
    """
    q = msg.q
    inv2 = scalar_inverse(2, q)
    columns: list[list[int]] = []

    for j, (s, g) in enumerate(zip(msg.s, msg.g)):
        m_j = s.T @ s - g
        column = [(inv2 * m_j[i, i]) % q for i in range(msg.l)]

        for i in range(msg.l):
            for k in range(i + 1, msg.l):
                if m_j[i, k] != (column[i] + column[k]) % q:
                    raise MalformedMessage(
                        f"entry ({i}, {k}) of block {j} is {m_j[i, k]}, "
                        f"expected {(column[i] + column[k]) % q}"
                    )

        columns.append(column)

    return FieldMatrix(columns, q).T


def square_message_batch(a: IntArray, b: IntArray, q: int) -> tuple[IntArray, IntArray]:
    """
    Batched `(S, G)` with shapes `(N, l, m, l)` and `(N, l, l, l)`; axis 1 is
    the column index j.
    """
    l = a.shape[-1]
    replicas = np.repeat(transpose(b)[..., None], l, axis=-1)
    s = (a[:, None] + replicas) % q
    g = ((transpose(a) @ a)[:, None] + transpose(replicas) @ replicas) % q

    return s, g


def sq_decode_batch(s: IntArray, g: IntArray, q: int) -> tuple[IntArray, np.ndarray]:
    """Returns the decoded products `(N, l, l)` and a mask of the messages that passed the consistency check."""
    m = (transpose(s) @ s - g) % q
    halves = (scalar_inverse(2, q) * np.diagonal(m, axis1=-2, axis2=-1)) % q
    consistent = np.all(m == (halves[..., :, None] + halves[..., None, :]) % q, axis=(1, 2, 3))

    return transpose(halves), consistent


def square_message_rows(a: IntArray, b: IntArray, q: int) -> IntArray:
    return flatten_rows(*square_message_batch(a, b, q))


@scheme("square", "General matrix product AᵀB over an odd field")
@example(a=[[1, 2], [0, 1]], b=[[1, 2], [0, 1]], q=3, expected=[[1, 2], [2, 2]])
@example(a=[[1, 0], [0, 0]], b=[[0, 1], [1, 0]], q=3, expected=[[0, 1], [0, 0]])
@example(a=[[2, 1], [3, 4]], b=[[1, 0], [1, 1]], q=5, expected=[[0, 3], [0, 4]])
class SquareScheme(AbstractScheme):
    def check_parameters(self, q: int, m: int, l: int) -> None:
        _check_square_parameters(q, l)

    def compute(self, a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
        check_same_shape(a, b)
        return sq_decode(sq_combine(sq_encode(a, Side.A), sq_encode(b, Side.B)))

    def compute_batch(self, a: IntArray, b: IntArray, q: int) -> IntArray:
        decoded, consistent = sq_decode_batch(*square_message_batch(a, b, q), q)

        if not consistent.all():
            logger.warning(f"{int((~consistent).sum())} encoded pairs failed the consistency check")

        return decoded
