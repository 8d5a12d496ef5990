from collections.abc import Callable, Hashable, Mapping
from dataclasses import dataclass

import logging
import math

import numpy as np
from scipy.special import entr

from structcode.field import FieldMatrix, IntArray, transpose
from structcode.schemes.common import OddLength, combined_blocks, flatten_rows
from structcode.schemes.embedding import embedding_message_batch
from structcode.schemes.entrywise import EMBEDDING_FIELD
from structcode.schemes.inner import inner_message_batch
from structcode.schemes.square import square_message_rows
from structcode.schemes.symmetric import symmetric_message_batch
from structcode.sources import DEFAULT_SUPPORT_CAP, JointSourceModel, SupportArrays, support_arrays

logger = logging.getLogger(__name__)

DISTRIBUTION_TOLERANCE = 1e-9

type Derive = Callable[[IntArray, IntArray], IntArray]


class InvalidDistribution(ValueError):
    def __init__(self, reason: str):
        super().__init__(f"invalid distribution: {reason}")
        self.reason = reason


class UnsupportedModel(ValueError):
    def __init__(self, model: JointSourceModel, reason: str):
        super().__init__(f"{model.name} is not supported here: {reason}")
        self.model = model
        self.reason = reason


@dataclass(frozen=True)
class DistributionTable:
    """A finite distribution over opaque hashable values."""

    support: tuple[Hashable, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probabilities):
            raise InvalidDistribution("support and probabilities have different lengths")

        if len(set(self.support)) != len(self.support):
            raise InvalidDistribution("support values must be distinct")

        if any(p < 0 or not math.isfinite(p) for p in self.probabilities):
            raise InvalidDistribution("probabilities must be finite and nonnegative")

        total = math.fsum(self.probabilities)

        if abs(total - 1.0) > DISTRIBUTION_TOLERANCE:
            raise InvalidDistribution(f"probabilities sum to {total!r}")

    @staticmethod
    def from_mapping(mapping: Mapping[Hashable, float]) -> "DistributionTable":
        return DistributionTable(tuple(mapping.keys()), tuple(float(p) for p in mapping.values()))

    def prob(self, value: Hashable) -> float:
        for x, p in zip(self.support, self.probabilities):
            if x == value:
                return p

        return 0.0

    def as_dict(self) -> dict[Hashable, float]:
        return dict(zip(self.support, self.probabilities))

    def __len__(self) -> int:
        return len(self.support)


def entropy_from_probabilities(probabilities: np.ndarray | tuple[float, ...]) -> float:
    """`−Σ p log₂ p` with `0 log 0 = 0`, accumulated with compensated summation."""
    terms = entr(np.asarray(probabilities, dtype=np.float64))
    return math.fsum(terms.tolist()) / math.log(2)


def entropy_bits(t: DistributionTable) -> float:
    return entropy_from_probabilities(t.probabilities)


def binary_entropy(p: float) -> float:
    return entropy_from_probabilities((p, 1.0 - p))


def h3(x: float, y: float) -> float:
    """Entropy of the three point distribution `(x, y, 1 − x − y)`."""
    return entropy_from_probabilities((x, y, max(0.0, 1.0 - x - y)))


def _as_rows(values: IntArray) -> IntArray:
    values = np.asarray(values, dtype=np.int64)
    return values.reshape(values.shape[0], -1)


def _grouped_probabilities(rows: IntArray, probabilities: np.ndarray) -> tuple[IntArray, np.ndarray, IntArray]:
    """Distinct rows, the probability mass of each and the group index of every input row."""
    keys, inverse = np.unique(rows, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    mass = np.bincount(inverse, weights=probabilities, minlength=keys.shape[0])

    return keys, mass, inverse


def _entropy_of(support: SupportArrays, *derives: Derive) -> float:
    """Joint entropy of several derived values over an enumerated support."""
    rows = np.concatenate([_as_rows(d(support.a, support.b)) for d in derives], axis=1)
    _, mass, _ = _grouped_probabilities(rows, support.probabilities)

    return entropy_from_probabilities(mass)


def pushforward(
    model: JointSourceModel, derive: Derive, cap: int = DEFAULT_SUPPORT_CAP
) -> DistributionTable:
    """
    Exact distribution of `derive(A, B)`. `derive` receives stacked `(N, m, l)`
    arrays and returns one value (an integer or a row of integers) per pair.
    """
    support = support_arrays(model, cap)
    keys, mass, _ = _grouped_probabilities(
        _as_rows(derive(support.a, support.b)), support.probabilities
    )
    values = tuple(int(k[0]) if k.shape[0] == 1 else tuple(int(x) for x in k) for k in keys)

    return DistributionTable(values, tuple(float(p) for p in mass))


def joint_entropy(model: JointSourceModel, *derives: Derive, cap: int = DEFAULT_SUPPORT_CAP) -> float:
    return _entropy_of(support_arrays(model, cap), *derives)


def conditional_entropy(
    model: JointSourceModel, target: Derive, given: Derive, cap: int = DEFAULT_SUPPORT_CAP
) -> float:
    """
    `H(X | Y)` computed directly as `−Σ p(x, y) log₂ (p(x, y) / p(y))` rather than
    by subtracting joint entropies.
    """
    support = support_arrays(model, cap)
    given_rows = _as_rows(given(support.a, support.b))
    joint_rows = np.concatenate([given_rows, _as_rows(target(support.a, support.b))], axis=1)

    _, given_mass, given_index = _grouped_probabilities(given_rows, support.probabilities)
    joint_keys, joint_mass, joint_index = _grouped_probabilities(joint_rows, support.probabilities)

    # Every joint group lies inside exactly one given group.
    owner = np.empty(joint_keys.shape[0], dtype=np.int64)
    owner[joint_index] = given_index

    return math.fsum(
        -p * math.log2(p / given_mass[g]) for p, g in zip(joint_mass, owner) if p > 0
    )


def source_pair(a: IntArray, b: IntArray) -> IntArray:
    return flatten_rows(a, b)


def source_a(a: IntArray, b: IntArray) -> IntArray:
    return flatten_rows(a)


def product(q: int) -> Derive:
    """Derive `AᵀB mod q`."""

    def derive(a: IntArray, b: IntArray) -> IntArray:
        return flatten_rows((transpose(a) @ b) % q)

    return derive


def side_information(q: int) -> Derive:
    """Derive `Q = (U, V)`, the message blocks the receiver combines without `W`."""

    def derive(a: IntArray, b: IntArray) -> IntArray:
        u, v, _ = combined_blocks(a, b, q)
        return flatten_rows(u, v)

    return derive


def correction(q: int) -> Derive:
    """Derive the `W` block of the message."""

    def derive(a: IntArray, b: IntArray) -> IntArray:
        return flatten_rows(combined_blocks(a, b, q)[2])

    return derive


def inner_message(q: int) -> Derive:
    return lambda a, b: inner_message_batch(a, b, q)


def _require_inner(model: JointSourceModel):
    if model.l != 1:
        raise UnsupportedModel(model, "the inner product scheme needs l = 1")

    if model.m % 2 != 0:
        raise OddLength(model.m)


def rate_sw(model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP) -> float:
    """Slepian-Wolf sum rate `H(A, B)`."""
    return joint_entropy(model, source_pair, cap=cap)


def rate_km_inner(model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP) -> float:
    """`2H(U, V, W)` for the inner product scheme."""
    _require_inner(model)
    return 2 * joint_entropy(model, inner_message(model.q), cap=cap)


def rate_km_inner_bound(model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP) -> float:
    """
    Upper bound `2H(U, V) + 2·P(Q ≠ 0)·log₂ q` on `rate_km_inner` for binary sources,
    where `W` is determined once `U = V = 0`. CrossPairedDSBS meets it with
    equality.
    """
    _require_inner(model)

    if model.q != 2:
        raise UnsupportedModel(model, "the bound holds for binary sources")

    support = support_arrays(model, cap)
    q_rows = side_information(model.q)(support.a, support.b)
    nonzero = float(support.probabilities[q_rows.any(axis=1)].sum())

    return 2 * _entropy_of(support, side_information(model.q)) + 2 * nonzero * math.log2(model.q)


def rate_km_symmetric(model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP) -> float:
    """`2H(U, V, W)` with matrix blocks."""
    if model.m % 2 != 0:
        raise OddLength(model.m)

    q = model.q
    return 2 * joint_entropy(model, lambda a, b: symmetric_message_batch(a, b, q), cap=cap)


def rate_sv(model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP) -> float:
    """Twice the entropy of the combined embedding message."""
    if model.l != 1:
        raise UnsupportedModel(model, "the embedding scheme needs l = 1")

    q = model.q
    return 2 * joint_entropy(model, lambda a, b: embedding_message_batch(a, b, q), cap=cap)


def rate_s_entrywise(model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP) -> float:
    """`2H({aᵢ ⊕₃ bᵢ})` for binary sources."""
    if model.q != 2:
        raise UnsupportedModel(model, "the entrywise embedding needs binary sources")

    return 2 * joint_entropy(
        model, lambda a, b: flatten_rows((a + b) % EMBEDDING_FIELD), cap=cap
    )


def rate_km_square(model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP) -> float:
    """`2H({S_j}, {G_j})` for the general product scheme."""
    if model.q % 2 == 0:
        raise UnsupportedModel(model, "the general product scheme needs an odd field")

    if model.l < 2:
        raise UnsupportedModel(model, "the general product scheme needs l >= 2")

    q = model.q
    return 2 * joint_entropy(model, lambda a, b: square_message_rows(a, b, q), cap=cap)


def inner_product_entropy(model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP) -> float:
    """`H(AᵀB)`, the rate floor for learning the product alone."""
    return joint_entropy(model, product(model.q), cap=cap)


def cor1_km_closed(m: int, p: float) -> float:
    return 2 * m * binary_entropy(p) + 2 * (1 - (1 - p) ** m)


def cor1_sw_closed(m: int, p: float) -> float:
    return m * (1 + binary_entropy(p))


def cor1_gain(m: int, p: float) -> float:
    """`η = R_SW / R_KM` from the closed forms. Infinite when the structured rate vanishes."""
    km = cor1_km_closed(m, p)
    return cor1_sw_closed(m, p) / km if km > 0 else math.inf


def cor1_gain_limit(p: float) -> float:
    """`(1 + h(p)) / (2h(p))`, the gain as m grows without bound."""
    h = binary_entropy(p)
    return (1 + h) / (2 * h) if h > 0 else math.inf


def corq3_sw_closed(m: int, epsilon: float, p: float) -> float:
    return m * (binary_entropy(2 * epsilon) + (1 - 2 * epsilon) + binary_entropy(p))


def corq3_km_bound(m: int, epsilon: float, p: float) -> float:
    """
    Upper bound on `rate_km_square` for the ternary source. Given `S`, the
    Gram sum `G` is fixed by two F_3 values, so `H(G | S) <= 2 log2(3)` and the
    doubled rate carries `4 log2(3)`.
    """
    x = 2 * (0.5 - epsilon) * (1 - p) + 2 * epsilon * (1 - p)
    y = 2 * (0.5 - epsilon) * p + 2 * epsilon * p
    return 2 * m * h3(x, y) + 4 * math.log2(3)


def constrained_km_closed(m: int, p: float) -> float:
    """Constrained binary symmetric scheme on m×m sources: `U` and `V` i.i.d. Bern(p), `W = 0`."""
    return 2 * m * m * binary_entropy(p)


def constrained_sw_closed(m: int, p: float) -> float:
    return m * m * (1 + binary_entropy(p))


@dataclass(frozen=True)
class NonrecoveryReport:
    """
    Terms of the condition under which the receiver of `(U, V, W)` learns the
    product but cannot recover the sources.

    # Fields:
    - `h_product`:      `H(AᵀB)`
    - `h_side_given_product`: `H(Q | AᵀB)` with `Q = (U, V)`
    - `rhs`:            `H(A | Q, AᵀB)`
    - `residual`:       `H(A, B | Q, W)`, positive when the sources stay hidden
    - `expansion_gap`:  `|H(U, V, W) − (H(AᵀB) + H(Q | AᵀB))|`
    """

    h_product: float
    h_side_given_product: float
    rhs: float
    residual: float
    expansion_gap: float

    @property
    def lhs(self) -> float:
        return self.h_product + self.h_side_given_product

    @property
    def holds(self) -> bool:
        return self.lhs < self.rhs


def nonrecovery_check(model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP) -> NonrecoveryReport:
    """
    Evaluates the nonrecovery condition for the inner product message of
    length-m columns. Models with l > 1 (the symmetric and general product
    schemes) raise `UnsupportedModel`.
    """
    if model.l != 1:
        raise UnsupportedModel(model, "the nonrecovery check covers the inner product message only (l = 1)")

    _require_inner(model)
    support = support_arrays(model, cap)
    q = model.q
    side, d, w = side_information(q), product(q), correction(q)

    h_d = _entropy_of(support, d)
    h_q_d = _entropy_of(support, side, d)
    h_a_q_d = _entropy_of(support, source_a, side, d)
    h_message = _entropy_of(support, side, w)
    h_sources = _entropy_of(support, source_pair)

    report = NonrecoveryReport(
        h_product=h_d,
        h_side_given_product=h_q_d - h_d,
        rhs=h_a_q_d - h_q_d,
        residual=h_sources - h_message,
        expansion_gap=abs(h_message - h_q_d),
    )

    logger.debug(f"nonrecovery terms for {model.name}: {report}")
    return report


@dataclass(frozen=True)
class MessageCollision:
    """Two distinct source pairs that produce the same inner product message."""

    first: tuple[FieldMatrix, FieldMatrix]
    second: tuple[FieldMatrix, FieldMatrix]
    message: tuple[int, ...]


def find_message_collision(
    model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP
) -> MessageCollision | None:
    """Returns a witness that `(A, B) → (U, V, W)` is not injective, or `None` if it is."""
    _require_inner(model)
    support = support_arrays(model, cap)
    messages = inner_message_batch(support.a, support.b, model.q)
    keys, inverse, counts = np.unique(messages, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    shared = np.nonzero(counts > 1)[0]

    if len(shared) == 0:
        return None

    i, j = np.nonzero(inverse == shared[0])[0][:2]

    def pair(k: int) -> tuple[FieldMatrix, FieldMatrix]:
        return FieldMatrix(support.a[k], model.modulus), FieldMatrix(support.b[k], model.modulus)

    return MessageCollision(
        first=pair(int(i)),
        second=pair(int(j)),
        message=tuple(int(x) for x in keys[shared[0]]),
    )


@dataclass(frozen=True)
class RateReport:
    """Sum rates of one model in bits per source symbol. Rates that do not apply are `None`."""

    model: str
    r_sw: float
    r_km: float | None = None
    r_s: float | None = None
    r_sv: float | None = None
    r_km_or: float | None = None
    r_km_or_side_b: float | None = None
    h_inner: float | None = None

    @property
    def gain(self) -> float | None:
        if self.r_km is None:
            return None

        return self.r_sw / self.r_km if self.r_km > 0 else math.inf


def rate_report(model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP) -> RateReport:
    """Computes every enumerated rate that applies to the model's field and shape."""
    binary, column = model.q == 2, model.l == 1
    r_km: float | None = None

    if column and model.m % 2 == 0:
        r_km = rate_km_inner(model, cap)
    elif model.q % 2 == 1 and model.l >= 2:
        r_km = rate_km_square(model, cap)

    report = RateReport(
        model=model.name,
        r_sw=rate_sw(model, cap),
        r_km=r_km,
        r_s=rate_s_entrywise(model, cap) if binary else None,
        r_sv=rate_sv(model, cap) if column else None,
        h_inner=inner_product_entropy(model, cap) if column else None,
    )

    logger.info(f"rates for {model.name}: sw={report.r_sw:.6f} km={report.r_km}")
    return report
