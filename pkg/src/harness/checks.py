from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce

import logging

import numpy as np

from harness.registry import AbstractScheme, Example, SchemeMetadata
from structcode.field import FieldMatrix, IntArray, all_matrices
from structcode.utils import Range, partition

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 1 << 16
MAX_VERIFICATION_PAIRS = 1 << 24


class VerificationTooLarge(ValueError):
    def __init__(self, pairs: int):
        super().__init__(
            f"exhaustive verification would check {pairs} pairs, the limit is {MAX_VERIFICATION_PAIRS}"
        )
        self.pairs = pairs


@dataclass(frozen=True)
class Counterexample:
    a: list[list[int]]
    b: list[list[int]]
    expected: list[list[int]]
    actual: list[list[int]]


class CheckResult(ABC):
    """Abstract base class for the outcomes of verifying one scheme."""

    scheme_name: str

    def __init__(self, scheme_name: str):
        self.scheme_name = scheme_name

    def is_ok(self) -> bool:
        """Returns true if the scheme decoded every checked pair correctly."""
        return False


@dataclass
class CheckResult_Ok(CheckResult):
    """
    Every admissible pair decoded correctly.

    # Slots:
    - `passed`:     Number of admissible pairs checked (all of them passed).
    - `enumerated`: Number of pairs enumerated before the admissibility filter.
    """

    passed: int
    enumerated: int

    def __init__(self, scheme_name: str, passed: int, enumerated: int):
        super().__init__(scheme_name)
        self.passed = passed
        self.enumerated = enumerated

    def is_ok(self) -> bool:
        return True


@dataclass
class CheckResult_ExampleFailed(CheckResult):
    """One of the scheme's hand-worked examples decoded to the wrong value."""

    example: Example
    actual: list[list[int]]

    def __init__(self, scheme_name: str, example: Example, actual: list[list[int]]):
        super().__init__(scheme_name)
        self.example = example
        self.actual = actual


@dataclass
class CheckResult_Mismatch(CheckResult):
    """At least one admissible pair decoded to the wrong value."""

    failures: int
    checked: int
    counterexample: Counterexample

    def __init__(
        self, scheme_name: str, failures: int, checked: int, counterexample: Counterexample
    ):
        super().__init__(scheme_name)
        self.failures = failures
        self.checked = checked
        self.counterexample = counterexample


@dataclass(frozen=True)
class ChunkTally:
    """Verification counts for a slice of the pair index space. Tallies add associatively."""

    enumerated: int
    checked: int
    failures: int
    counterexample: Counterexample | None = None

    def __add__(self, other: "ChunkTally") -> "ChunkTally":
        return ChunkTally(
            enumerated=self.enumerated + other.enumerated,
            checked=self.checked + other.checked,
            failures=self.failures + other.failures,
            counterexample=(
                self.counterexample if self.counterexample is not None else other.counterexample
            ),
        )


class VerifyEventHandlers(ABC):
    """
    Receives callbacks from `run_verification` that can be used to display
    progress details to the user.

    # Events:
    - `on_start_scheme`:   Verification of a scheme started.
    - `on_examples_pass`:  All of the scheme's examples decoded correctly.
    - `on_finish_scheme`:  Verification finished, correctly or incorrectly.
    """

    @abstractmethod
    def on_start_scheme(self, metadata: SchemeMetadata, q: int, m: int, l: int):
        pass

    @abstractmethod
    def on_examples_pass(self, metadata: SchemeMetadata, count: int):
        pass

    @abstractmethod
    def on_finish_scheme(self, metadata: SchemeMetadata, result: CheckResult):
        pass


def check_examples(
    scheme: AbstractScheme, metadata: SchemeMetadata
) -> CheckResult_ExampleFailed | None:
    """Runs every example of the scheme and returns the first failure, if any."""
    for example in metadata.examples():
        actual = scheme.compute(example.a_matrix(), example.b_matrix())

        if actual != example.expected_matrix():
            return CheckResult_ExampleFailed(metadata.name(), example, actual.to_list())

    return None


def check_chunk(
    scheme: AbstractScheme, singles: IntArray, q: int, chunk: Range
) -> ChunkTally:
    """Verifies the pairs whose index lies in `chunk`, pair index = a_index * count + b_index."""
    count = singles.shape[0]
    index = np.arange(chunk.start, chunk.stop, dtype=np.int64)
    a = singles[index // count]
    b = singles[index % count]

    admissible = scheme.admissible_batch(a, b, q)
    a, b = a[admissible], b[admissible]

    if a.shape[0] == 0:
        return ChunkTally(enumerated=len(chunk), checked=0, failures=0)

    actual = scheme.compute_batch(a, b, q)
    expected = scheme.expected_batch(a, b, q)
    wrong = np.any((actual != expected).reshape(a.shape[0], -1), axis=1)
    failures = int(wrong.sum())
    counterexample = None

    if failures > 0:
        i = int(np.argmax(wrong))
        counterexample = Counterexample(
            a=a[i].tolist(), b=b[i].tolist(), expected=expected[i].tolist(), actual=actual[i].tolist()
        )

    return ChunkTally(
        enumerated=len(chunk),
        checked=a.shape[0],
        failures=failures,
        counterexample=counterexample,
    )


def run_verification(
    metadata: SchemeMetadata,
    q: int,
    m: int,
    l: int,
    events: VerifyEventHandlers,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> CheckResult:
    """
    Checks a scheme's hand-worked examples and then exhaustively verifies its
    decoder on every admissible pair `(A, B)` in F_q^{m×l} × F_q^{m×l}.

    # Parameters
    - `metadata`:   Metadata about the scheme class that should be verified.
    - `q`, `m`, `l`: Field size and matrix shape of the exhaustive sweep.
    - `events`:     Event handler object notified as verification progresses. See
                    `VerifyEventHandlers` for the events that are raised.
    - `workers`:    Optional, defaults to 1. Number of threads the pair index range
                    is split across. Chunks share no mutable state.
    - `chunk_size`: Optional. Number of pair indices handled per chunk.

    Parameter errors (for example q = 2 for a scheme that needs an odd field)
    are raised to the caller before any event fires.
    """
    scheme = metadata.create_scheme_instance()
    scheme.check_parameters(q, m, l)

    total = q ** (2 * m * l)

    if total > MAX_VERIFICATION_PAIRS:
        raise VerificationTooLarge(total)

    singles = all_matrices(m, l, q)
    events.on_start_scheme(metadata, q, m, l)

    # Examples first; a failing example means the exhaustive sweep is skipped.
    example_failure = check_examples(scheme, metadata)

    if example_failure is not None:
        events.on_finish_scheme(metadata, example_failure)
        return example_failure

    events.on_examples_pass(metadata, len(list(metadata.examples())))

    chunks = partition(total, chunk_size)
    logger.info(f"verifying {metadata.name()} on {total} pairs in {len(chunks)} chunks")

    def run_chunk(chunk: Range) -> ChunkTally:
        return check_chunk(scheme, singles, q, chunk)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            tallies = list(executor.map(run_chunk, chunks))
    else:
        tallies = [run_chunk(c) for c in chunks]

    tally = reduce(lambda x, y: x + y, tallies, ChunkTally(0, 0, 0))
    result: CheckResult

    if tally.failures == 0:
        result = CheckResult_Ok(metadata.name(), passed=tally.checked, enumerated=tally.enumerated)
    else:
        assert tally.counterexample is not None
        result = CheckResult_Mismatch(
            metadata.name(),
            failures=tally.failures,
            checked=tally.checked,
            counterexample=tally.counterexample,
        )

    events.on_finish_scheme(metadata, result)
    return result


def verify_matrix(scheme: AbstractScheme, a: FieldMatrix, b: FieldMatrix) -> bool:
    """True if the scheme recovers the expected value for a single pair."""
    expected = scheme.expected_batch(a.entries[None], b.entries[None], a.q)[0]
    return bool(np.array_equal(scheme.compute(a, b).entries, expected))
