from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import logging

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

# Entries are int64; one multiply-accumulate of two values below 2^16 stays far
# below the overflow boundary before the mod-q reduction.
MAX_MODULUS = 1 << 16

type IntArray = npt.NDArray[np.int64]


class NotPrimeModulus(ValueError):
    q: int

    def __init__(self, q: int):
        super().__init__(f"modulus {q} is not a prime number")
        self.q = q


class ModulusTooLarge(ValueError):
    def __init__(self, q: int):
        super().__init__(f"modulus {q} is larger than the supported maximum {MAX_MODULUS}")
        self.q = q


class DimensionMismatch(ValueError):
    def __init__(self, operation: str, left: tuple[int, ...], right: tuple[int, ...]):
        super().__init__(f"cannot {operation} matrices with shapes {left} and {right}")
        self.left = left
        self.right = right


class ModulusMismatch(ValueError):
    def __init__(self, left: int, right: int):
        super().__init__(f"operands use different moduli ({left} and {right})")
        self.left = left
        self.right = right


class EntryOutOfRange(ValueError):
    def __init__(self, value: int, q: int):
        super().__init__(f"entry {value} is outside of the canonical range [0, {q})")
        self.value = value
        self.q = q


class NoInverse(ArithmeticError):
    def __init__(self, x: int, q: int):
        super().__init__(f"{x} has no multiplicative inverse modulo {q}")
        self.x = x
        self.q = q


class UnsupportedModulus(ValueError):
    def __init__(self, q: int, reason: str):
        super().__init__(f"modulus q={q} is not supported: {reason}")
        self.q = q
        self.reason = reason


def is_prime(n: int) -> bool:
    if n < 2:
        return False

    if n < 4:
        return True

    if n % 2 == 0:
        return False

    d = 3

    while d * d <= n:
        if n % d == 0:
            return False
        d += 2

    return True


@dataclass(frozen=True)
class PrimeModulus:
    """The characteristic q of the prime field F_q. Primality is checked on construction."""

    q: int

    def __post_init__(self):
        if not is_prime(self.q):
            raise NotPrimeModulus(self.q)

        if self.q > MAX_MODULUS:
            raise ModulusTooLarge(self.q)

    def __int__(self) -> int:
        return self.q

    def __str__(self) -> str:
        return f"F_{self.q}"

    def is_odd(self) -> bool:
        return self.q % 2 == 1


def as_modulus(value: "PrimeModulus | int") -> PrimeModulus:
    if isinstance(value, PrimeModulus):
        return value
    else:
        return PrimeModulus(int(value))


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Returns `(g, x, y)` such that `a*x + b*y == g == gcd(a, b)`."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1

    while r != 0:
        quotient = old_r // r
        old_r, r = r, old_r - quotient * r
        old_s, s = s, old_s - quotient * s
        old_t, t = t, old_t - quotient * t

    return old_r, old_s, old_t


def scalar_inverse(x: int, q: "PrimeModulus | int") -> int:
    """Multiplicative inverse of `x` in F_q using the extended Euclidean algorithm."""
    modulus = as_modulus(q)
    x = x % modulus.q

    if x == 0:
        raise NoInverse(x, modulus.q)

    g, s, _ = extended_gcd(x, modulus.q)
    assert g == 1

    return s % modulus.q


class FieldMatrix:
    """
    A dense, immutable matrix over the prime field F_q.

    Entries are stored as canonical representatives in `[0, q)`. Use
    `FieldMatrix.reduce` to build a matrix from arbitrary integers, the regular
    constructor rejects out of range values.
    """

    __slots__ = ("_entries", "_modulus")

    _entries: IntArray
    _modulus: PrimeModulus

    def __init__(self, entries: "Sequence | IntArray", modulus: "PrimeModulus | int"):
        self._modulus = as_modulus(modulus)
        array = np.array(entries, dtype=np.int64, copy=True)

        if array.ndim != 2:
            raise ValueError(f"a field matrix needs two dimensions but got {array.ndim}")

        if array.shape[0] < 1 or array.shape[1] < 1:
            raise ValueError(f"matrix dimensions must be positive, got {array.shape}")

        out_of_range = (array < 0) | (array >= self._modulus.q)

        if out_of_range.any():
            raise EntryOutOfRange(int(array[out_of_range][0]), self._modulus.q)

        array.setflags(write=False)
        self._entries = array

    @staticmethod
    def reduce(values: "Sequence | IntArray", modulus: "PrimeModulus | int") -> "FieldMatrix":
        """Creates a matrix from arbitrary integers by reducing every entry mod q."""
        modulus = as_modulus(modulus)
        return FieldMatrix(np.mod(np.array(values, dtype=np.int64), modulus.q), modulus)

    @staticmethod
    def column(values: Iterable[int], modulus: "PrimeModulus | int") -> "FieldMatrix":
        return FieldMatrix([[v] for v in values], modulus)

    @staticmethod
    def zeros(rows: int, cols: int, modulus: "PrimeModulus | int") -> "FieldMatrix":
        return FieldMatrix(np.zeros((rows, cols), dtype=np.int64), modulus)

    @staticmethod
    def identity(size: int, modulus: "PrimeModulus | int") -> "FieldMatrix":
        return FieldMatrix(np.eye(size, dtype=np.int64), modulus)

    @staticmethod
    def vstack(*parts: "FieldMatrix") -> "FieldMatrix":
        if len(parts) == 0:
            raise ValueError("vstack needs at least one matrix")

        for part in parts[1:]:
            _check_same_modulus(parts[0], part)

            if part.cols != parts[0].cols:
                raise DimensionMismatch("stack", parts[0].shape, part.shape)

        return FieldMatrix(np.vstack([p.entries for p in parts]), parts[0].modulus)

    @property
    def entries(self) -> IntArray:
        """Read-only view of the canonical entries."""
        return self._entries

    @property
    def modulus(self) -> PrimeModulus:
        return self._modulus

    @property
    def q(self) -> int:
        return self._modulus.q

    @property
    def rows(self) -> int:
        return self._entries.shape[0]

    @property
    def cols(self) -> int:
        return self._entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def T(self) -> "FieldMatrix":
        return FieldMatrix(self._entries.T, self._modulus)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_symmetric(self) -> bool:
        return self.is_square() and bool(np.array_equal(self._entries, self._entries.T))

    def is_zero(self) -> bool:
        return not self._entries.any()

    def item(self) -> int:
        """Returns the only entry of a 1×1 matrix."""
        if self.shape != (1, 1):
            raise ValueError(f"item() requires a 1x1 matrix, got {self.shape}")

        return int(self._entries[0, 0])

    def row_slice(self, start: int, stop: int) -> "FieldMatrix":
        return FieldMatrix(self._entries[start:stop, :], self._modulus)

    def scale(self, c: int) -> "FieldMatrix":
        return FieldMatrix.reduce(self._entries * (c % self.q), self._modulus)

    def to_list(self) -> list[list[int]]:
        return self._entries.tolist()

    def __getitem__(self, index: tuple[int, int]) -> int:
        return int(self._entries[index])

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        return mat_add(self, other)

    def __sub__(self, other: "FieldMatrix") -> "FieldMatrix":
        return mat_sub(self, other)

    def __neg__(self) -> "FieldMatrix":
        return FieldMatrix.reduce(-self._entries, self._modulus)

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        return mat_mul(self, other)

    def __eq__(self, value: object) -> bool:
        if type(value) is FieldMatrix:
            return self._modulus == value._modulus and bool(
                np.array_equal(self._entries, value._entries)
            )
        else:
            return False

    def __hash__(self) -> int:
        return hash((self._modulus.q, self.shape, self._entries.tobytes()))

    def __repr__(self) -> str:
        return f"FieldMatrix({self.to_list()}, q={self.q})"


def _check_same_modulus(x: FieldMatrix, y: FieldMatrix):
    if x.modulus != y.modulus:
        raise ModulusMismatch(x.q, y.q)


def mat_add(x: FieldMatrix, y: FieldMatrix) -> FieldMatrix:
    """Entrywise `(x + y) mod q`."""
    _check_same_modulus(x, y)

    if x.shape != y.shape:
        raise DimensionMismatch("add", x.shape, y.shape)

    return FieldMatrix((x.entries + y.entries) % x.q, x.modulus)


def mat_sub(x: FieldMatrix, y: FieldMatrix) -> FieldMatrix:
    # Subtraction is addition of the additive inverse.
    return mat_add(x, -y)


def mat_mul(x: FieldMatrix, y: FieldMatrix) -> FieldMatrix:
    """Matrix product with all sums and products reduced mod q."""
    _check_same_modulus(x, y)

    if x.cols != y.rows:
        raise DimensionMismatch("multiply", x.shape, y.shape)

    return FieldMatrix((x.entries @ y.entries) % x.q, x.modulus)


def symmetrize(d: FieldMatrix) -> FieldMatrix:
    """
    Returns `inv(2) * (D + Dᵀ)` over F_q.

    The result is always symmetric and equals `D` when `D` already is. Only odd
    moduli are supported because 2 has no inverse in F_2.
    """
    if not d.modulus.is_odd():
        raise UnsupportedModulus(d.q, "symmetrize needs an odd modulus")

    if not d.is_square():
        raise DimensionMismatch("symmetrize", d.shape, d.T.shape)

    return (d + d.T).scale(scalar_inverse(2, d.modulus))


@dataclass(frozen=True)
class ResidueScalar:
    """An element of the residue ring Z_r."""

    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError(f"residue modulus must be at least 2, got {self.modulus}")

        if not 0 <= self.value < self.modulus:
            raise EntryOutOfRange(self.value, self.modulus)

    def __add__(self, other: "ResidueScalar") -> "ResidueScalar":
        return residue_add(self, other)

    def __int__(self) -> int:
        return self.value


def residue_add(a: ResidueScalar, b: ResidueScalar) -> ResidueScalar:
    if a.modulus != b.modulus:
        raise ModulusMismatch(a.modulus, b.modulus)

    return ResidueScalar((a.value + b.value) % a.modulus, a.modulus)


def rank(x: FieldMatrix) -> int:
    """Rank of `x` over F_q by Gaussian elimination."""
    q = x.q
    work = np.array(x.entries, dtype=np.int64)
    rows, cols = work.shape
    pivot_row = 0

    for col in range(cols):
        if pivot_row == rows:
            break

        candidates = np.nonzero(work[pivot_row:, col])[0]

        if len(candidates) == 0:
            continue

        swap = pivot_row + int(candidates[0])
        work[[pivot_row, swap]] = work[[swap, pivot_row]]
        work[pivot_row] = (work[pivot_row] * scalar_inverse(int(work[pivot_row, col]), q)) % q

        for r in range(rows):
            if r != pivot_row and work[r, col] != 0:
                work[r] = (work[r] - work[r, col] * work[pivot_row]) % q

        pivot_row += 1

    return pivot_row


def transpose(x: IntArray) -> IntArray:
    """Transposes the last two axes of a (possibly batched) matrix array."""
    return np.swapaxes(x, -1, -2)


def all_matrices(rows: int, cols: int, q: int) -> IntArray:
    """
    Every matrix in F_q^{rows×cols} as one array of shape `(q^(rows*cols), rows, cols)`.

    Matrices are ordered lexicographically by their row-major entries.
    """
    cells = rows * cols
    count = q**cells
    index = np.arange(count, dtype=np.int64)
    digits = np.empty((count, cells), dtype=np.int64)

    for position in range(cells):
        digits[:, position] = (index // q ** (cells - 1 - position)) % q

    return digits.reshape(count, rows, cols)


def all_pairs(rows: int, cols: int, q: int) -> tuple[IntArray, IntArray]:
    """
    Every pair `(A, B)` of matrices in F_q^{rows×cols} as two aligned arrays.

    The pair index is `a_index * q^(rows*cols) + b_index`.
    """
    singles = all_matrices(rows, cols, q)
    count = singles.shape[0]
    logger.debug(f"enumerating {count * count} matrix pairs over F_{q} ({rows}x{cols})")

    return np.repeat(singles, count, axis=0), np.tile(singles, (count, 1, 1))
