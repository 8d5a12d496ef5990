from dataclasses import dataclass, field

import numpy as np

from harness.annotations import example, scheme
from harness.registry import AbstractScheme
from structcode.field import (
    FieldMatrix,
    IntArray,
    ModulusMismatch,
    ResidueScalar,
    as_modulus,
    scalar_inverse,
)
from structcode.schemes.common import ShapeMismatch, Side, check_same_shape


def embedding_modulus(q: int, m: int) -> int:
    """
    The residue modulus r used to carry integer sums of field entries.

    `r = 2(q−1)m` for even m and `2(q−1)m + 1` for odd m. Every entrywise sum
    `a_i + b_i` is at most `2(q−1)` and so never wraps modulo r.
    """
    r = 2 * (q - 1) * m
    return r if m % 2 == 0 else r + 1


@dataclass(frozen=True)
class EmbeddingMessage:
    """
    One encoder's half, or the receiver's combined view, of the embedding scheme.

    For odd q, `entry_sums` has one residue per source entry and `parities` is
    empty. For q = 2 the entries are folded into a single residue
    `Σ aᵢ mod r` and `parities` keeps `aᵢ mod 2` for every entry.
    """

    q: int
    m: int
    entry_sums: tuple[ResidueScalar, ...]
    square_sum: int
    parities: tuple[int, ...] = field(default=())

    @property
    def r(self) -> int:
        return embedding_modulus(self.q, self.m)

    def is_binary(self) -> bool:
        return self.q == 2

    def __add__(self, other: "EmbeddingMessage") -> "EmbeddingMessage":
        return emb_combine(self, other)


def emb_encode(x: FieldMatrix, side: Side) -> EmbeddingMessage:
    """
    Lifts a length-m column into the residue ring Z_r and adds the ⊕_q sum of
    its squared entries. Both sides use the same mapping, `side` only names
    the encoder.
    """
    if x.cols != 1:
        raise ShapeMismatch(f"embedding source {side}", (x.rows, 1), x.shape)

    q, m = x.q, x.rows
    r = embedding_modulus(q, m)
    values = [int(v) for v in x.entries[:, 0]]
    square_sum = sum(v * v for v in values) % q

    if q == 2:
        return EmbeddingMessage(
            q=q,
            m=m,
            entry_sums=(ResidueScalar(sum(values) % r, r),),
            square_sum=square_sum,
            parities=tuple(v % 2 for v in values),
        )

    return EmbeddingMessage(
        q=q,
        m=m,
        entry_sums=tuple(ResidueScalar(v % r, r) for v in values),
        square_sum=square_sum,
    )


def emb_combine(x1: EmbeddingMessage, x2: EmbeddingMessage) -> EmbeddingMessage:
    if x1.q != x2.q:
        raise ModulusMismatch(x1.q, x2.q)

    if x1.m != x2.m:
        raise ShapeMismatch("embedding message", x1.m, x2.m)

    return EmbeddingMessage(
        q=x1.q,
        m=x1.m,
        entry_sums=tuple(s1 + s2 for s1, s2 in zip(x1.entry_sums, x2.entry_sums)),
        square_sum=(x1.square_sum + x2.square_sum) % x1.q,
        parities=tuple((p1 + p2) % 2 for p1, p2 in zip(x1.parities, x2.parities)),
    )


def emb_decode(msg: EmbeddingMessage) -> int:
    """
    Recovers `⟨A, B⟩ mod q` from a combined message.

    Odd q: the residues are the integer sums `sᵢ = aᵢ + bᵢ` and
    `Σ sᵢ² − Σ (aᵢ² + bᵢ²) = 2⟨A, B⟩`, so halving with inv(2) recovers the
    inner product. q = 2: the scalar minus the parities is `2⟨A, B⟩` as an
    integer, and half of it taken mod 2 is the result.
    """
    if msg.is_binary():
        scalar = msg.entry_sums[0].value
        return ((scalar - sum(msg.parities)) // 2) % 2

    squares = sum(s.value * s.value for s in msg.entry_sums)
    return (scalar_inverse(2, msg.q) * (squares - msg.square_sum)) % msg.q


def embedding_message_batch(a: IntArray, b: IntArray, q: int) -> IntArray:
    """
    The combined messages of stacked `(N, m, 1)` pairs as rows of one array.

    Odd q rows are the m residues followed by the square sum. q = 2 rows are
    the scalar residue followed by the m parities and the square sum.
    """
    m = a.shape[1]
    r = embedding_modulus(q, m)
    a, b = a[..., 0], b[..., 0]
    square_sum = ((a * a + b * b).sum(axis=1) % q)[:, None]

    if q == 2:
        scalar = ((a + b).sum(axis=1) % r)[:, None]
        return np.concatenate([scalar, (a + b) % 2, square_sum], axis=1)

    return np.concatenate([(a + b) % r, square_sum], axis=1)


def emb_decode_batch(message: IntArray, q: int) -> IntArray:
    """Batched `emb_decode` over rows laid out as in `embedding_message_batch`."""
    if q == 2:
        scalar, parities = message[:, 0], message[:, 1:-1]
        return ((scalar - parities.sum(axis=1)) // 2) % 2

    residues, square_sum = message[:, :-1], message[:, -1]
    return (scalar_inverse(2, q) * ((residues * residues).sum(axis=1) - square_sum)) % q


@scheme("embedding", "Inner product through an integer embedding of the entries")
@example(a=[[1], [1]], b=[[1], [0]], q=2, expected=1)
@example(a=[[2], [2]], b=[[1], [1]], q=3, expected=1)
@example(a=[[1], [1], [1], [1]], b=[[1], [1], [1], [1]], q=2, expected=0)
@example(a=[[1], [0], [1]], b=[[1], [1], [1]], q=2, expected=0)
class EmbeddingScheme(AbstractScheme):
    def check_parameters(self, q: int, m: int, l: int) -> None:
        as_modulus(q)

        if m < 1:
            raise ShapeMismatch("embedding source", "m >= 1", m)

        if l != 1:
            raise ShapeMismatch("embedding source", (m, 1), (m, l))

    def compute(self, a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
        check_same_shape(a, b)
        message = emb_combine(emb_encode(a, Side.A), emb_encode(b, Side.B))
        return FieldMatrix([[emb_decode(message)]], a.modulus)

    def compute_batch(self, a: IntArray, b: IntArray, q: int) -> IntArray:
        decoded = emb_decode_batch(embedding_message_batch(a, b, q), q)
        return decoded.reshape(-1, 1, 1)
