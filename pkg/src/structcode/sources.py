from abc import ABC, abstractmethod
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

import logging
import math

import numpy as np

from structcode.field import FieldMatrix, IntArray, PrimeModulus, as_modulus
from structcode.utils import find_numbers, split

logger = logging.getLogger(__name__)

DEFAULT_SUPPORT_CAP = 1 << 24
ROW_PMF_TOLERANCE = 1e-12
TABLE_FILE_TOLERANCE = 1e-9


class InvalidModelParameter(ValueError):
    def __init__(self, name: str, value: object, reason: str):
        super().__init__(f"invalid model parameter {name}={value}: {reason}")
        self.name = name
        self.value = value


class InconsistentTable(ValueError):
    pass


class SupportTooLarge(ValueError):
    size: int
    cap: int

    def __init__(self, size: int, cap: int):
        super().__init__(
            f"the model support has {size} outcomes which exceeds the enumeration cap of {cap}"
        )
        self.size = size
        self.cap = cap


class InvalidTableFile(ValueError):
    def __init__(self, path: str | None, line: int, reason: str):
        super().__init__(f"{path or '<table>'}:{line}: {reason}")
        self.path = path
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class RowOutcome:
    """One support point of the per-unit joint PMF: paired a-row and b-row entries."""

    a_row: tuple[int, ...]
    b_row: tuple[int, ...]
    probability: float


class JointSourceModel:
    """
    A joint PMF over a pair of matrices `(A, B)` in F_q^{m×l}, built from i.i.d.
    unit draws.

    Each of the `units` draws picks one `RowOutcome` from the shared row PMF.
    The assembly rule writes the draw's a-row into the flat (row-major)
    positions `a_positions[u]` of `A` and its b-row into `b_positions[u]` of
    `B`. The positions of all units partition the `m*l` entries of each
    matrix, so assembly is a bijection between draw tuples and `(A, B)`.

    Zero probability outcomes are dropped on construction so enumeration only
    visits the support.
    """

    name: str
    modulus: PrimeModulus
    m: int
    l: int
    outcomes: tuple[RowOutcome, ...]
    a_positions: tuple[tuple[int, ...], ...]
    b_positions: tuple[tuple[int, ...], ...]

    def __init__(
        self,
        name: str,
        q: PrimeModulus | int,
        m: int,
        l: int,
        outcomes: Sequence[RowOutcome],
        a_positions: Sequence[Sequence[int]],
        b_positions: Sequence[Sequence[int]],
    ):
        self.name = name
        self.modulus = as_modulus(q)
        self.m = m
        self.l = l

        if m < 1 or l < 1:
            raise InvalidModelParameter("shape", (m, l), "dimensions must be positive")

        if len(outcomes) == 0:
            raise InconsistentTable("the row PMF has no outcomes")

        arity = len(outcomes[0].a_row)
        seen: set[tuple[tuple[int, ...], tuple[int, ...]]] = set()

        for outcome in outcomes:
            if len(outcome.a_row) != arity or len(outcome.b_row) != arity:
                raise InconsistentTable(f"row outcome {outcome} does not have arity {arity}")

            for value in outcome.a_row + outcome.b_row:
                if not 0 <= value < self.modulus.q:
                    raise InconsistentTable(
                        f"row outcome {outcome} has an entry outside of F_{self.modulus.q}"
                    )

            if outcome.probability < 0 or not math.isfinite(outcome.probability):
                raise InconsistentTable(f"row outcome {outcome} has an invalid probability")

            key = (outcome.a_row, outcome.b_row)

            if key in seen:
                raise InconsistentTable(f"row outcome {key} is listed more than once")

            seen.add(key)

        total = math.fsum(o.probability for o in outcomes)

        if abs(total - 1.0) > ROW_PMF_TOLERANCE:
            raise InconsistentTable(f"row probabilities sum to {total!r}, expected 1")

        self.outcomes = tuple(o for o in outcomes if o.probability > 0)
        self.a_positions = tuple(tuple(p) for p in a_positions)
        self.b_positions = tuple(tuple(p) for p in b_positions)

        for label, positions in (("a", self.a_positions), ("b", self.b_positions)):
            flat = sorted(i for unit in positions for i in unit)

            if any(len(unit) != arity for unit in positions):
                raise InconsistentTable(f"{label} positions do not match the row arity {arity}")

            if flat != list(range(m * l)):
                raise InconsistentTable(
                    f"{label} positions must cover each of the {m * l} entries exactly once"
                )

        if len(self.a_positions) != len(self.b_positions):
            raise InconsistentTable("a and b position lists have different unit counts")

    @property
    def q(self) -> int:
        return self.modulus.q

    @property
    def arity(self) -> int:
        return len(self.outcomes[0].a_row)

    @property
    def units(self) -> int:
        return len(self.a_positions)

    def support_size(self) -> int:
        return len(self.outcomes) ** self.units

    def row_probabilities(self) -> np.ndarray:
        return np.array([o.probability for o in self.outcomes], dtype=np.float64)

    def __repr__(self) -> str:
        return f"JointSourceModel({self.name}, q={self.q}, m={self.m}, l={self.l})"


@dataclass(frozen=True)
class SupportArrays:
    """The full support of a model as aligned arrays, in enumeration order."""

    a: IntArray
    b: IntArray
    probabilities: np.ndarray

    def __len__(self) -> int:
        return self.probabilities.shape[0]


def _assemble(model: JointSourceModel, draws: IntArray) -> tuple[IntArray, IntArray]:
    """Maps a `(count, units)` array of outcome indices to `(A, B)` batches."""
    count = draws.shape[0]
    a_table = np.array([o.a_row for o in model.outcomes], dtype=np.int64)
    b_table = np.array([o.b_row for o in model.outcomes], dtype=np.int64)
    a_flat = np.zeros((count, model.m * model.l), dtype=np.int64)
    b_flat = np.zeros((count, model.m * model.l), dtype=np.int64)

    for unit in range(model.units):
        a_flat[:, list(model.a_positions[unit])] = a_table[draws[:, unit]]
        b_flat[:, list(model.b_positions[unit])] = b_table[draws[:, unit]]

    shape = (count, model.m, model.l)
    return a_flat.reshape(shape), b_flat.reshape(shape)


def support_arrays(model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP) -> SupportArrays:
    size = model.support_size()

    if size > cap:
        raise SupportTooLarge(size, cap)

    outcome_count = len(model.outcomes)
    index = np.arange(size, dtype=np.int64)
    draws = np.empty((size, model.units), dtype=np.int64)

    for unit in range(model.units):
        draws[:, unit] = (index // outcome_count ** (model.units - 1 - unit)) % outcome_count

    a, b = _assemble(model, draws)
    probabilities = np.prod(model.row_probabilities()[draws], axis=1)

    logger.debug(f"enumerated {size} outcomes of {model.name}")
    return SupportArrays(a=a, b=b, probabilities=probabilities)


def enumerate_support(
    model: JointSourceModel, cap: int = DEFAULT_SUPPORT_CAP
) -> Iterator[tuple[tuple[FieldMatrix, FieldMatrix], float]]:
    """Yields every positive probability `(A, B)` exactly once along with its probability."""
    support = support_arrays(model, cap)

    for a, b, p in zip(support.a, support.b, support.probabilities):
        yield (FieldMatrix(a, model.modulus), FieldMatrix(b, model.modulus)), float(p)


class Sampler:
    """
    Draws `(A, B)` pairs from a model. Each sampler owns its generator, so give
    every worker its own sampler.
    """

    model: JointSourceModel
    _rng: np.random.Generator
    _probabilities: np.ndarray

    def __init__(self, model: JointSourceModel, seed: int | Sequence[int]):
        self.model = model
        self._rng = np.random.default_rng(seed)
        probabilities = model.row_probabilities()
        self._probabilities = probabilities / probabilities.sum()

    def draw_batch(self, count: int) -> tuple[IntArray, IntArray]:
        draws = self._rng.choice(
            len(self.model.outcomes), size=(count, self.model.units), p=self._probabilities
        )
        return _assemble(self.model, draws)

    def draw(self) -> tuple[FieldMatrix, FieldMatrix]:
        a, b = self.draw_batch(1)
        return FieldMatrix(a[0], self.model.modulus), FieldMatrix(b[0], self.model.modulus)


def sample(model: JointSourceModel, seed: int | Sequence[int]) -> tuple[FieldMatrix, FieldMatrix]:
    return Sampler(model, seed).draw()


def _check_probability(name: str, value: float, upper: float = 1.0):
    if not (math.isfinite(value) and 0.0 <= value <= upper):
        raise InvalidModelParameter(name, value, f"must lie in [0, {upper}]")


def _check_rows(m: int, even: bool = False):
    if m < 1:
        raise InvalidModelParameter("m", m, "must be at least 1")

    if even and m % 2 != 0:
        raise InvalidModelParameter("m", m, "must be even")


def dsbs_outcomes(p: float) -> list[RowOutcome]:
    """Doubly symmetric binary source: uniform bits `a`, and `b = a ⊕ noise` with crossover `p`."""
    return [
        RowOutcome((0,), (0,), (1 - p) / 2),
        RowOutcome((0,), (1,), p / 2),
        RowOutcome((1,), (0,), p / 2),
        RowOutcome((1,), (1,), (1 - p) / 2),
    ]


def ternary_table(epsilon: float, p: float) -> list[list[float]]:
    """
    Joint PMF of `(a_i1, b_i1)` for the ternary correlated source. Rows index
    `a_i1`, columns index `b_i1`.
    """
    half = 0.5 - epsilon
    return [
        [half * (1 - p), half * p, 0.0],
        [2 * epsilon * p, 0.0, 2 * epsilon * (1 - p)],
        [0.0, half * (1 - p), half * p],
    ]


class ModelKind(ABC):
    """A named family of source models that knows how to build itself."""

    @abstractmethod
    def build(self) -> JointSourceModel:
        pass


@dataclass(frozen=True)
class CrossPairedDSBS(ModelKind):
    """`(a_i, b_{m/2+i})` and `(a_{m/2+i}, b_i)` are independent DSBS pairs."""

    m: int
    p: float

    def build(self) -> JointSourceModel:
        _check_rows(self.m, even=True)
        _check_probability("p", self.p)
        half = self.m // 2

        a_positions = [(i,) for i in range(self.m)]
        b_positions = [((i + half) % self.m,) for i in range(self.m)]

        return JointSourceModel(
            name=f"crosspaired(m={self.m},p={self.p:g})",
            q=2,
            m=self.m,
            l=1,
            outcomes=dsbs_outcomes(self.p),
            a_positions=a_positions,
            b_positions=b_positions,
        )


@dataclass(frozen=True)
class PairedDSBS(ModelKind):
    """`(a_i, b_i)` are independent DSBS pairs."""

    m: int
    p: float

    def build(self) -> JointSourceModel:
        _check_rows(self.m)
        _check_probability("p", self.p)

        return JointSourceModel(
            name=f"paired(m={self.m},p={self.p:g})",
            q=2,
            m=self.m,
            l=1,
            outcomes=dsbs_outcomes(self.p),
            a_positions=[(i,) for i in range(self.m)],
            b_positions=[(i,) for i in range(self.m)],
        )


@dataclass(frozen=True)
class SingleDSBS(ModelKind):
    p: float

    def build(self) -> JointSourceModel:
        _check_probability("p", self.p)

        return JointSourceModel(
            name=f"dsbs(p={self.p:g})",
            q=2,
            m=1,
            l=1,
            outcomes=dsbs_outcomes(self.p),
            a_positions=[(0,)],
            b_positions=[(0,)],
        )


@dataclass(frozen=True)
class TernaryCorrelated(ModelKind):
    """
    The q=3, l=2 source: `(a_i1, b_i1)` follow `ternary_table`, and the second
    column is derived with `b_i2 = b_i1` and `a_i2 = -b_i1 mod 3`.
    """

    m: int
    epsilon: float
    p: float

    def build(self) -> JointSourceModel:
        _check_rows(self.m)
        _check_probability("epsilon", self.epsilon, upper=0.5)
        _check_probability("p", self.p)

        outcomes = []

        for a1, row in enumerate(ternary_table(self.epsilon, self.p)):
            for b1, probability in enumerate(row):
                outcomes.append(RowOutcome((a1, (-b1) % 3), (b1, b1), probability))

        positions = [(2 * i, 2 * i + 1) for i in range(self.m)]

        return JointSourceModel(
            name=f"ternary(m={self.m},epsilon={self.epsilon:g},p={self.p:g})",
            q=3,
            m=self.m,
            l=2,
            outcomes=outcomes,
            a_positions=positions,
            b_positions=positions,
        )


@dataclass(frozen=True)
class CustomTable(ModelKind):
    path: Path

    def build(self) -> JointSourceModel:
        return load_custom_table(self.path)


def build_model(kind: ModelKind) -> JointSourceModel:
    return kind.build()


def parse_custom_table(text: str, path: str | None = None) -> JointSourceModel:
    """
    Parses a custom row PMF table.

    The first non comment line is the header `q m l arity`. Every following line
    lists the a-row entries, the b-row entries and the probability of that
    support point. Units fill `A` and `B` in row-major order, `arity` entries at
    a time. Blank lines and lines starting with `#` are ignored.
    """
    header: list[int] | None = None
    outcomes: list[RowOutcome] = []

    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()

        if line == "" or line.startswith("#"):
            continue

        if header is None:
            values = find_numbers(line)

            if len(values) != 4 or any(not v.is_integer() for v in values):
                raise InvalidTableFile(path, line_number, "header must be `q m l arity`")

            header = [int(v) for v in values]
            continue

        arity = header[3]
        fields = split(line, " ")

        if len(fields) != 2 * arity + 1:
            raise InvalidTableFile(
                path, line_number, f"expected {2 * arity} entries and a probability"
            )

        try:
            entries = [int(f) for f in fields[:-1]]
            probability = float(fields[-1])
        except ValueError as e:
            raise InvalidTableFile(path, line_number, str(e)) from e

        outcomes.append(RowOutcome(tuple(entries[:arity]), tuple(entries[arity:]), probability))

    if header is None:
        raise InvalidTableFile(path, 0, "missing `q m l arity` header")

    q, m, l, arity = header

    if arity < 1 or (m * l) % arity != 0:
        raise InvalidTableFile(path, 0, f"arity {arity} must divide m*l = {m * l}")

    total = math.fsum(o.probability for o in outcomes)

    if abs(total - 1.0) > TABLE_FILE_TOLERANCE:
        raise InconsistentTable(f"table probabilities sum to {total!r}, expected 1")

    # Within the file tolerance; renormalize so the model's stricter check holds.
    outcomes = [RowOutcome(o.a_row, o.b_row, o.probability / total) for o in outcomes]
    positions = [tuple(range(u * arity, (u + 1) * arity)) for u in range(m * l // arity)]

    return JointSourceModel(
        name=f"custom({path or 'inline'})",
        q=q,
        m=m,
        l=l,
        outcomes=outcomes,
        a_positions=positions,
        b_positions=positions,
    )


def load_custom_table(path: Path | str) -> JointSourceModel:
    with open(path, "r") as file:
        return parse_custom_table(file.read(), path=str(path))
