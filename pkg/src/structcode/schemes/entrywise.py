import numpy as np

from harness.annotations import example, scheme
from harness.registry import AbstractScheme
from structcode.field import (
    EntryOutOfRange,
    FieldMatrix,
    IntArray,
    UnsupportedModulus,
)
from structcode.schemes.common import ShapeMismatch, Side, check_same_shape

EMBEDDING_FIELD = 3


def entrywise_embed(x: FieldMatrix, side: Side) -> FieldMatrix:
    """Reinterprets a binary source matrix as a matrix over F_3 with the same 0/1 entries."""
    if x.q != 2:
        raise UnsupportedModulus(x.q, f"the entrywise embedding of source {side} needs binary entries")

    return FieldMatrix(x.entries, EMBEDDING_FIELD)


def entrywise_combine(x1: FieldMatrix, x2: FieldMatrix) -> FieldMatrix:
    """`{aᵢ ⊕₃ bᵢ}`, the only thing the receiver observes."""
    return x1 + x2


def entrywise_embed_decode(t: int) -> int:
    """
    Maps `a ⊕₃ b` back to the binary product `a·b`. The product is 1 only when
    `a = b = 1`, which is the only binary pair summing to 2 in F_3.
    """
    if not 0 <= t < EMBEDDING_FIELD:
        raise EntryOutOfRange(t, EMBEDDING_FIELD)

    return 1 if t == 2 else 0


def entrywise_products(t: FieldMatrix) -> FieldMatrix:
    """Decodes every entry of a combined F_3 matrix into the binary entrywise products."""
    return FieldMatrix((t.entries == 2).astype(np.int64), 2)


@scheme("entrywise", "Binary entrywise products through an F_3 embedding")
@example(a=[[1], [1]], b=[[1], [0]], q=2, expected=1)
@example(a=[[1], [1], [0]], b=[[1], [1], [1]], q=2, expected=0)
@example(a=[[0]], b=[[1]], q=2, expected=0)
class EntrywiseScheme(AbstractScheme):
    """
    Both encoders send their binary vector lifted into F_3. The receiver
    recovers every product `aᵢbᵢ` and sums them mod 2 for `⟨A, B⟩`.
    """

    def check_parameters(self, q: int, m: int, l: int) -> None:
        if q != 2:
            raise UnsupportedModulus(q, "the entrywise embedding works on binary sources")

        if l != 1:
            raise ShapeMismatch("entrywise source", (m, 1), (m, l))

    def compute(self, a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
        check_same_shape(a, b)
        t = entrywise_combine(entrywise_embed(a, Side.A), entrywise_embed(b, Side.B))
        products = [entrywise_embed_decode(int(x)) for x in t.entries[:, 0]]

        return FieldMatrix([[sum(products) % 2]], 2)

    def compute_batch(self, a: IntArray, b: IntArray, q: int) -> IntArray:
        t = (a + b) % EMBEDDING_FIELD
        return ((t == 2).sum(axis=(1, 2)) % 2).reshape(-1, 1, 1)
