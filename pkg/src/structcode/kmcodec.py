from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce

import logging
import math
import time

import numpy as np

from structcode.entropy import DistributionTable, pushforward
from structcode.field import FieldMatrix, IntArray, as_modulus, transpose
from structcode.schemes.common import OddLength, Side, flatten_rows, mapping_blocks
from structcode.schemes.inner import inner_message_batch
from structcode.sources import JointSourceModel, Sampler
from structcode.utils import Range, partition

logger = logging.getLogger(__name__)

MAX_BINARY_LENGTH = 24
MAX_WORDS = 3**12
TRIAL_CHUNK = 256


class InvalidCodeParameters(ValueError):
    def __init__(self, reason: str):
        super().__init__(f"invalid code parameters: {reason}")
        self.reason = reason


class DecodeLimitExceeded(ValueError):
    def __init__(self, n: int, q: int):
        super().__init__(
            f"exhaustive decoding of length {n} words over F_{q} is not supported "
            f"(limits: n <= {MAX_BINARY_LENGTH} for q = 2, q^n <= {MAX_WORDS} otherwise)"
        )
        self.n = n
        self.q = q


class InfeasibleSyndrome(ValueError):
    def __init__(self, syndrome: Sequence[int]):
        super().__init__(f"no word has syndrome {list(syndrome)}")
        self.syndrome = syndrome


@dataclass(frozen=True)
class LinearCode:
    """
    A k×n syndrome matrix over F_q. Codes generated from the same seed are
    nested: the k-row code is the first k rows of every longer one.
    """

    matrix: FieldMatrix
    seed: int

    @property
    def q(self) -> int:
        return self.matrix.q

    @property
    def k(self) -> int:
        return self.matrix.rows

    @property
    def n(self) -> int:
        return self.matrix.cols

    @property
    def rate(self) -> float:
        return self.k / self.n


def gen_code(n: int, k: int, q: int, seed: int) -> LinearCode:
    modulus = as_modulus(q)

    if n < 1:
        raise InvalidCodeParameters(f"block length n={n} must be positive")

    if not 1 <= k <= n:
        raise InvalidCodeParameters(f"syndrome length k={k} must lie in [1, {n}]")

    master = np.random.default_rng(seed).integers(0, q, size=(n, n), dtype=np.int64)
    return LinearCode(FieldMatrix(master[:k], modulus), seed)


def syndrome(code: LinearCode, z: Sequence[int] | IntArray) -> IntArray:
    """`C·z` over F_q for one word, or for every row of a `(count, n)` array."""
    z = np.asarray(z, dtype=np.int64)

    if z.shape[-1] != code.n:
        raise InvalidCodeParameters(f"word length {z.shape[-1]} does not match n={code.n}")

    return (z @ code.matrix.entries.T) % code.q


@dataclass(frozen=True)
class SymbolModel:
    """I.i.d. distribution of one symbol of the word being compressed."""

    q: int
    probabilities: tuple[float, ...]

    def __post_init__(self):
        if len(self.probabilities) != self.q:
            raise InvalidCodeParameters(
                f"symbol model needs {self.q} probabilities, got {len(self.probabilities)}"
            )

        if any(p < 0 for p in self.probabilities) or abs(math.fsum(self.probabilities) - 1) > 1e-9:
            raise InvalidCodeParameters(f"{self.probabilities} is not a distribution")

    @staticmethod
    def bernoulli(p: float) -> "SymbolModel":
        return SymbolModel(2, (1.0 - p, p))

    @staticmethod
    def from_distribution(table: DistributionTable, q: int) -> "SymbolModel":
        """Builds a model from a distribution over the integers `0..q-1`."""
        probabilities = [0.0] * q

        for value, p in zip(table.support, table.probabilities):
            if not isinstance(value, int) or not 0 <= value < q:
                raise InvalidCodeParameters(f"symbol {value!r} is not an element of F_{q}")

            probabilities[value] += p

        return SymbolModel(q, tuple(probabilities))

    def log_probabilities(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.array(self.probabilities, dtype=np.float64))


def _word_index(words: IntArray, q: int) -> IntArray:
    """Lexicographic index of each word, first symbol most significant."""
    n = words.shape[-1]
    return words @ (q ** np.arange(n - 1, -1, -1, dtype=np.int64))


def _syndrome_key(syndromes: IntArray, q: int) -> IntArray:
    k = syndromes.shape[-1]
    return syndromes @ (q ** np.arange(k - 1, -1, -1, dtype=np.int64))


def _extend_counts(counts: np.ndarray, symbols: IntArray) -> np.ndarray:
    q = len(symbols)
    counts = np.repeat(counts, q, axis=0)
    counts[np.arange(counts.shape[0]), np.tile(symbols, counts.shape[0] // q)] += 1

    return counts


class CosetLeaderTable:
    """
    The maximum likelihood word of every syndrome of a code under a symbol
    model, built once by enumerating all `q^n` words.

    Ties are broken towards the lexicographically smallest word. Likelihoods
    are computed from symbol counts so tied words compare exactly equal.
    """

    code: LinearCode
    model: SymbolModel
    keys: IntArray
    leaders: IntArray

    def __init__(self, code: LinearCode, model: SymbolModel):
        q, n, k = code.q, code.n, code.k

        if model.q != q:
            raise InvalidCodeParameters(f"symbol model is over F_{model.q}, the code over F_{q}")

        if (q == 2 and n > MAX_BINARY_LENGTH) or (q > 2 and q**n > MAX_WORDS):
            raise DecodeLimitExceeded(n, q)

        self.code = code
        self.model = model
        columns = code.matrix.entries.T

        symbols = np.arange(q, dtype=np.int64)
        counts = np.zeros((1, q), dtype=np.int16)

        # Words grow one position at a time so a word's index is
        # `parent * q + symbol`. Binary syndromes are kept packed and updated
        # with XOR, other fields keep one digit per syndrome row.
        if q == 2:
            keys = np.zeros(1, dtype=np.int64)
            column_keys = _syndrome_key(columns, 2)

            for j in range(n):
                keys = (keys[:, None] ^ (symbols[None, :] * column_keys[j])).reshape(-1)
                counts = _extend_counts(counts, symbols)
        else:
            syndromes = np.zeros((1, k), dtype=np.int64)

            for j in range(n):
                syndromes = (syndromes[:, None, :] + symbols[None, :, None] * columns[j]) % q
                syndromes = syndromes.reshape(-1, k)
                counts = _extend_counts(counts, symbols)

            keys = _syndrome_key(syndromes, q)

        log_p = model.log_probabilities()

        with np.errstate(invalid="ignore"):
            likelihood = np.where(counts > 0, counts * log_p[None, :], 0.0).sum(axis=1)

        index = np.arange(keys.shape[0], dtype=np.int64)

        order = np.lexsort((index, -likelihood, keys))
        self.keys, first = np.unique(keys[order], return_index=True)
        self.leaders = order[first]

        logger.debug(f"coset leader table for n={n}, k={k}, q={q}: {len(self.keys)} syndromes")

    def __len__(self) -> int:
        return len(self.keys)

    def leader_index(self, syndromes: IntArray) -> IntArray:
        """Lexicographic word index of the leader of each syndrome row."""
        keys = _syndrome_key(np.atleast_2d(syndromes), self.code.q)
        position = np.searchsorted(self.keys, keys)
        position = np.minimum(position, len(self.keys) - 1)
        missing = self.keys[position] != keys

        if missing.any():
            raise InfeasibleSyndrome(np.atleast_2d(syndromes)[int(np.argmax(missing))].tolist())

        return self.leaders[position]

    def word(self, index: int) -> IntArray:
        q, n = self.code.q, self.code.n
        return (index // q ** np.arange(n - 1, -1, -1, dtype=np.int64)) % q


def ml_decode(
    code: LinearCode,
    s: Sequence[int] | IntArray,
    model: SymbolModel,
    table: CosetLeaderTable | None = None,
) -> IntArray:
    """
    The most probable word `z` with `C·z = s` under `model`. Pass a prebuilt
    `table` to decode many syndromes of the same code and model.
    """
    if table is None:
        table = CosetLeaderTable(code, model)

    z = table.word(int(table.leader_index(np.asarray(s, dtype=np.int64))[0]))
    assert np.array_equal(syndrome(code, z), np.asarray(s) % code.q)

    return z


@dataclass(frozen=True)
class TrialReport:
    """
    Outcome of a block of coding trials.

    # Fields:
    - `decode_errors`:    Trials where the decoded block differs from the true one.
    - `function_errors`:  For source models, block positions where the decoded
                          message gives the wrong inner product. `None` for
                          symbol models.
    - `coordinates`:      Symbol streams coded per trial, decoded independently.
    """

    n: int
    k: int
    q: int
    trials: int
    decode_errors: int
    elapsed: float = 0.0
    function_errors: int | None = None
    coordinates: int = 1

    @property
    def empirical_error_rate(self) -> float:
        return self.decode_errors / self.trials if self.trials > 0 else 0.0

    @property
    def function_error_rate(self) -> float | None:
        if self.function_errors is None or self.trials == 0:
            return None

        return self.function_errors / (self.trials * self.n)

    def __add__(self, other: "TrialReport") -> "TrialReport":
        function_errors = None

        if self.function_errors is not None or other.function_errors is not None:
            function_errors = (self.function_errors or 0) + (other.function_errors or 0)

        return TrialReport(
            n=self.n,
            k=self.k,
            q=self.q,
            trials=self.trials + other.trials,
            decode_errors=self.decode_errors + other.decode_errors,
            elapsed=self.elapsed + other.elapsed,
            function_errors=function_errors,
            coordinates=self.coordinates,
        )


def _symbol_chunk(
    code: LinearCode, table: CosetLeaderTable, model: SymbolModel, seed: int, chunk: Range
) -> TrialReport:
    words = np.stack(
        [
            np.random.default_rng([seed, t]).choice(code.q, size=code.n, p=model.probabilities)
            for t in chunk
        ]
    ).astype(np.int64)
    decoded = table.leader_index(syndrome(code, words))
    errors = int((decoded != _word_index(words, code.q)).sum())

    return TrialReport(code.n, code.k, code.q, len(chunk), errors)


def coordinate_models(model: JointSourceModel) -> list[SymbolModel]:
    """Marginal of every coordinate of the inner product message `[U; V; W]`."""
    q = model.q
    return [
        SymbolModel.from_distribution(
            pushforward(model, lambda a, b, c=c: inner_message_batch(a, b, q)[:, c]), q
        )
        for c in range(model.m + 1)
    ]


def receiver_syndromes(code: LinearCode, a: IntArray, b: IntArray) -> tuple[IntArray, IntArray]:
    """
    Encodes a block of `n` source pairs the way the two encoders do: each side
    maps its own stream and syndrome-encodes every coordinate of it, then the
    receiver adds the two syndromes.

    Returns the summed message stream `[U; V; W]` as an `(n, m+1)` array and the
    summed syndromes as an `(m+1, n−k)` array, one row per coordinate.
    """
    q = code.q
    x1 = flatten_rows(*mapping_blocks(a, Side.A, q))
    x2 = flatten_rows(*mapping_blocks(b, Side.B, q))
    syndromes = np.stack(
        [(syndrome(code, x1[:, c]) + syndrome(code, x2[:, c])) % q for c in range(x1.shape[1])]
    )

    return (x1 + x2) % q, syndromes


def _joint_chunk(
    code: LinearCode,
    model: JointSourceModel,
    tables: list[CosetLeaderTable],
    seed: int,
    chunk: Range,
) -> TrialReport:
    q, n, m = code.q, code.n, model.m
    half = m // 2
    decode_errors = 0
    function_errors = 0

    for t in chunk:
        a, b = Sampler(model, [seed, t]).draw_batch(n)
        messages, syndromes = receiver_syndromes(code, a, b)
        decoded = np.empty_like(messages)

        for c, table in enumerate(tables):
            index = table.leader_index(syndromes[c])[0]
            decoded[:, c] = table.word(int(index))

        if not np.array_equal(decoded, messages):
            decode_errors += 1

        u, v, w = decoded[:, :half], decoded[:, half:m], decoded[:, m]
        recovered = ((u * v).sum(axis=1) - w) % q
        expected = (transpose(a) @ b)[:, 0, 0] % q
        function_errors += int((recovered != expected).sum())

    return TrialReport(
        n, code.k, q, len(chunk), decode_errors, function_errors=function_errors, coordinates=m + 1
    )


def run_trials(
    source: SymbolModel | JointSourceModel,
    n: int,
    k: int,
    trials: int,
    seed: int,
    workers: int = 1,
) -> TrialReport:
    """
    Monte-Carlo estimate of the block error rate of syndrome coding with ML decoding.

    Trial t draws its data from the stream seeded with `(seed, t)` and the
    code is `gen_code(n, k, q, seed)`, so runs with different k share both the
    data and a nested family of codes.

    A `SymbolModel` source codes one i.i.d. stream of length n. A
    `JointSourceModel` source (l = 1, even m) draws n source pairs, maps them
    with the inner product mapping and codes each of the m+1 coordinates of
    the summed message as its own stream, decoding it with the coordinate's
    marginal. Dependence between coordinates is not used by the decoder.
    """
    if trials < 1:
        raise InvalidCodeParameters(f"trials={trials} must be positive")

    started = time.perf_counter()

    if isinstance(source, SymbolModel):
        code = gen_code(n, k, source.q, seed)
        table = CosetLeaderTable(code, source)

        def run_chunk(chunk: Range) -> TrialReport:
            return _symbol_chunk(code, table, source, seed, chunk)

    else:
        if source.l != 1:
            raise InvalidCodeParameters(f"{source.name}: coded sources need l = 1")

        if source.m % 2 != 0:
            raise OddLength(source.m)

        code = gen_code(n, k, source.q, seed)
        cache: dict[SymbolModel, CosetLeaderTable] = {}
        tables = []

        for marginal in coordinate_models(source):
            if marginal not in cache:
                cache[marginal] = CosetLeaderTable(code, marginal)
            tables.append(cache[marginal])

        def run_chunk(chunk: Range) -> TrialReport:
            return _joint_chunk(code, source, tables, seed, chunk)

    chunks = partition(trials, TRIAL_CHUNK)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            reports = list(executor.map(run_chunk, chunks))
    else:
        reports = [run_chunk(c) for c in chunks]

    report = reduce(lambda x, y: x + y, reports)
    elapsed = time.perf_counter() - started
    report = TrialReport(
        n=report.n,
        k=report.k,
        q=report.q,
        trials=report.trials,
        decode_errors=report.decode_errors,
        elapsed=elapsed,
        function_errors=report.function_errors,
        coordinates=report.coordinates,
    )

    logger.info(
        f"n={n} k={k}: {report.decode_errors}/{trials} block errors in {elapsed:.3f}s"
    )
    return report
