from abc import ABC, abstractmethod
from typing import Generator

import numpy as np

from structcode.field import FieldMatrix, IntArray, transpose


class AbstractScheme(ABC):
    """
    Base class for a structured distributed coding scheme that lets a receiver
    compute a function of `(A, B)` from the modulo-q combination of the two
    encoder outputs.

    Subclasses provide the scheme twice: `compute` runs the public encode,
    combine and decode operations on one pair, and `compute_batch` runs the
    same pipeline on stacked numpy arrays for exhaustive verification.
    """

    @abstractmethod
    def check_parameters(self, q: int, m: int, l: int) -> None:
        """Raises a `ValueError` subclass when the scheme does not support `(q, m, l)`."""
        pass

    @abstractmethod
    def compute(self, a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
        pass

    @abstractmethod
    def compute_batch(self, a: IntArray, b: IntArray, q: int) -> IntArray:
        pass

    def expected_batch(self, a: IntArray, b: IntArray, q: int) -> IntArray:
        """The value the receiver must recover, `AᵀB` unless overridden."""
        return (transpose(a) @ b) % q

    def admissible_batch(self, a: IntArray, b: IntArray, q: int) -> np.ndarray:
        """Mask of the pairs the scheme's decoding contract covers. All pairs by default."""
        return np.ones(a.shape[0], dtype=bool)


class Example:
    """
    A small hand-worked input pair and the output the receiver must decode for
    it. Examples are checked before a scheme's exhaustive verification runs.
    """

    a: list[list[int]]
    b: list[list[int]]
    q: int
    expected: list[list[int]]

    def __init__(
        self,
        a: list[list[int]],
        b: list[list[int]],
        q: int,
        expected: list[list[int]] | int,
    ):
        self.a = a
        self.b = b
        self.q = q
        self.expected = [[expected]] if isinstance(expected, int) else expected

    def a_matrix(self) -> FieldMatrix:
        return FieldMatrix(self.a, self.q)

    def b_matrix(self) -> FieldMatrix:
        return FieldMatrix(self.b, self.q)

    def expected_matrix(self) -> FieldMatrix:
        return FieldMatrix(self.expected, self.q)

    def __eq__(self, value: object) -> bool:
        if type(value) is Example:
            return (
                self.a == value.a
                and self.b == value.b
                and self.q == value.q
                and self.expected == value.expected
            )
        else:
            return False

    def __repr__(self) -> str:
        return f"Example(a={self.a}, b={self.b}, q={self.q}, expected={self.expected})"


class SchemeMetadata:
    """
    Stores an abstract scheme type and other metadata associated with the scheme.
    """

    klass: type[AbstractScheme]
    _name: str
    _title: str
    _examples: list[Example]

    def __init__(
        self,
        klass: type[AbstractScheme],
        name: str,
        title: str | None = None,
        examples: list[Example] | None = None,
    ):
        self.klass = klass
        self._name = name
        self._title = title if title is not None else name
        self._examples = list(examples) if examples is not None else []

    def create_scheme_instance(self, **kwargs) -> AbstractScheme:
        return self.klass(**kwargs)

    def name(self) -> str:
        return self._name

    def title(self) -> str:
        return self._title

    def add_example(self, example: Example):
        """Inserts `example` at the start of this scheme's examples list."""
        self._examples.insert(0, example)

    def examples(self) -> Generator[Example, None, None]:
        yield from self._examples

    def __repr__(self) -> str:
        return f"SchemeMetadata(name={self._name}, klass={self.klass}, examples={self._examples})"


class SchemeNotFound(ValueError):
    def __init__(self, name: str, known: list[str]):
        super().__init__(f"there is no scheme named `{name}` (known schemes: {', '.join(known)})")
        self.name = name


class DuplicateSchemeType(Exception):
    def __init__(self, scheme_type: type[AbstractScheme]):
        super().__init__(f"Cannot register {scheme_type} more than once")


class DuplicateSchemeName(Exception):
    def __init__(self, name: str):
        super().__init__(f"Cannot register two schemes named `{name}`")


class SchemeRegistry:
    """
    Stores the registered schemes by class and by name.
    """

    schemes: dict[str, type[AbstractScheme]]
    metadata: dict[type[AbstractScheme], SchemeMetadata]
    examples_scratch: dict[type[AbstractScheme], list[Example]]

    def __init__(self):
        self.schemes = dict()
        self.metadata = dict()
        self.examples_scratch = dict()

    def add_metadata(self, scheme: SchemeMetadata):
        """Adds metadata for a new scheme class."""
        if scheme.klass in self.metadata:
            raise DuplicateSchemeType(scheme.klass)

        if scheme.name() in self.schemes:
            raise DuplicateSchemeName(scheme.name())

        self.metadata[scheme.klass] = scheme
        self.schemes[scheme.name()] = scheme.klass

        # Examples registered before the class decorator ran are waiting in
        # scratch. Move them over keeping their order.
        if scheme.klass in self.examples_scratch:
            for e in reversed(self.examples_scratch[scheme.klass]):
                scheme.add_example(e)

            del self.examples_scratch[scheme.klass]

    def add_example(self, scheme_class: type[AbstractScheme], example: Example):
        """Inserts `example` at the start of the examples list for `scheme_class`."""
        if scheme_class in self.metadata:
            self.metadata[scheme_class].add_example(example)
        else:
            if scheme_class not in self.examples_scratch:
                self.examples_scratch[scheme_class] = list()

            self.examples_scratch[scheme_class].insert(0, example)

    def get_examples(self, scheme_class: type[AbstractScheme]) -> Generator[Example, None, None]:
        if scheme_class in self.metadata:
            yield from self.metadata[scheme_class].examples()
        else:
            yield from self.examples_scratch.get(scheme_class, [])

    def has_scheme(self, name: str) -> bool:
        return name in self.schemes

    def find_scheme(self, name: str) -> SchemeMetadata:
        if name not in self.schemes:
            raise SchemeNotFound(name, self.all_names())

        return self.metadata[self.schemes[name]]

    def all_names(self) -> list[str]:
        """Returns a sorted list of registered scheme names."""
        return sorted(self.schemes.keys())


_GLOBAL_SCHEME_REGISTRY: SchemeRegistry = SchemeRegistry()


def get_global_scheme_registry() -> SchemeRegistry:
    return _GLOBAL_SCHEME_REGISTRY
