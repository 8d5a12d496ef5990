from collections.abc import Callable, Hashable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import logging
import math

import networkx as nx
import numpy as np

from structcode.entropy import DistributionTable, entropy_from_probabilities, pushforward
from structcode.schemes.common import flatten_rows
from structcode.sources import DEFAULT_SUPPORT_CAP, JointSourceModel

logger = logging.getLogger(__name__)

MAX_VERTICES = 20
DEFAULT_RESTARTS = 8
DEFAULT_TOLERANCE = 1e-9
DEFAULT_MAX_ITERATIONS = 10_000
# Slack for the per-step monotonicity assertion, which compares floating point sums.
MONOTONE_SLACK = 1e-12
GRID_POINT_BUDGET = 4_000_000
GRID_CHUNK = 4096


class EmptySupport(ValueError):
    def __init__(self):
        super().__init__("the joint distribution has no support")


class TooManyVertices(ValueError):
    def __init__(self, count: int, limit: int = MAX_VERTICES):
        super().__init__(f"graph has {count} vertices, at most {limit} are supported")
        self.count = count
        self.limit = limit


class AlphabetTooLarge(ValueError):
    def __init__(self, size: int, limit: int):
        super().__init__(f"source alphabet has {size} values, at most {limit} are supported")
        self.size = size
        self.limit = limit


class GridTooLarge(ValueError):
    def __init__(self, points: int, limit: int = GRID_POINT_BUDGET):
        super().__init__(f"the search grid has {points} points, at most {limit} are supported")
        self.points = points
        self.limit = limit


class CharacteristicGraph:
    """
    The characteristic graph of `X` for computing `g(X, Y)` when the receiver
    knows `Y`. Two values of `X` are connected when some `y` is possible with
    both and `g` tells them apart.

    The graph keeps the joint PMF that induced it as a dense `|X| × |Y|`
    matrix with rows in `xs` order and columns in `ys` order.
    """

    graph: nx.Graph
    xs: tuple[Hashable, ...]
    ys: tuple[Hashable, ...]
    joint: np.ndarray

    def __init__(self, graph: nx.Graph, xs: tuple, ys: tuple, joint: np.ndarray):
        self.graph = graph
        self.xs = xs
        self.ys = ys
        self.joint = joint

    @property
    def vertices(self) -> tuple[Hashable, ...]:
        return self.xs

    @property
    def edges(self) -> list[tuple[Hashable, Hashable]]:
        index = {x: i for i, x in enumerate(self.xs)}
        ordered = [tuple(sorted(e, key=index.__getitem__)) for e in self.graph.edges]
        return sorted(ordered, key=lambda e: (index[e[0]], index[e[1]]))

    def is_complete(self) -> bool:
        n = len(self.xs)
        return self.graph.number_of_edges() == n * (n - 1) // 2

    def __repr__(self) -> str:
        return f"CharacteristicGraph(vertices={list(self.xs)}, edges={self.edges})"


def _joint_matrix(joint: DistributionTable) -> tuple[tuple, tuple, np.ndarray]:
    points = [(xy, p) for xy, p in zip(joint.support, joint.probabilities) if p > 0]

    if len(points) == 0:
        raise EmptySupport()

    xs = tuple(sorted({xy[0] for xy, _ in points}))
    ys = tuple(sorted({xy[1] for xy, _ in points}))
    x_index = {x: i for i, x in enumerate(xs)}
    y_index = {y: i for i, y in enumerate(ys)}
    matrix = np.zeros((len(xs), len(ys)), dtype=np.float64)

    for (x, y), p in points:
        matrix[x_index[x], y_index[y]] += p

    return xs, ys, matrix


def build_graph(joint: DistributionTable, g: Callable[[Hashable, Hashable], Hashable]) -> CharacteristicGraph:
    """`joint` is a distribution over `(x, y)` pairs."""
    xs, ys, matrix = _joint_matrix(joint)
    graph = nx.Graph()
    graph.add_nodes_from(xs)

    for i in range(len(xs)):
        for k in range(i + 1, len(xs)):
            for j, y in enumerate(ys):
                if matrix[i, j] > 0 and matrix[k, j] > 0 and g(xs[i], y) != g(xs[k], y):
                    graph.add_edge(xs[i], xs[k])
                    break

    logger.debug(f"characteristic graph with {len(xs)} vertices and {graph.number_of_edges()} edges")
    return CharacteristicGraph(graph, xs, ys, matrix)


def maximal_independent_sets(graph: CharacteristicGraph) -> list[tuple[Hashable, ...]]:
    """
    Every maximal independent set of the graph, found as the maximal cliques of
    its complement. Sets list their vertices in `xs` order and the family is
    sorted.
    """
    if len(graph.xs) > MAX_VERTICES:
        raise TooManyVertices(len(graph.xs))

    index = {x: i for i, x in enumerate(graph.xs)}
    family = {
        tuple(sorted(clique, key=index.__getitem__))
        for clique in nx.find_cliques(nx.complement(graph.graph))
    }

    return sorted(family, key=lambda s: [index[v] for v in s])


def _membership(graph: CharacteristicGraph) -> np.ndarray:
    """`(|X|, |W|)` mask of which independent sets contain each vertex."""
    family = maximal_independent_sets(graph)
    index = {x: i for i, x in enumerate(graph.xs)}
    mask = np.zeros((len(graph.xs), len(family)), dtype=bool)

    for w, members in enumerate(family):
        for x in members:
            mask[index[x], w] = True

    return mask


def _log2_safe(x: np.ndarray) -> np.ndarray:
    return np.log2(np.where(x > 0, x, 1.0))


def _objective(joint: np.ndarray, p_x_given_y: np.ndarray, t: np.ndarray) -> float:
    """`I(W; X | Y)` in bits for the test channel `t[x, w] = p(w | x)`."""
    r = p_x_given_y.T @ t
    ratio = _log2_safe(t)[:, None, :] - _log2_safe(r)[None, :, :]
    terms = joint[:, :, None] * t[:, None, :] * ratio

    return math.fsum(terms[(joint[:, :, None] * t[:, None, :]) > 0].tolist())


@dataclass(frozen=True)
class RestartOutcome:
    value: float
    iterations: int
    converged: bool


def _minimize(
    joint: np.ndarray,
    mask: np.ndarray,
    start: np.ndarray,
    tolerance: float,
    max_iterations: int,
) -> RestartOutcome:
    """Alternating minimization of `I(W; X | Y)` over `p(w | x)` supported on `mask`."""
    p_x = joint.sum(axis=1)
    p_y = joint.sum(axis=0)
    p_y_given_x = joint / p_x[:, None]
    p_x_given_y = joint / p_y[None, :]

    t = start
    value = _objective(joint, p_x_given_y, t)

    for iteration in range(1, max_iterations + 1):
        r = p_x_given_y.T @ t
        scores = p_y_given_x @ np.log(np.where(r > 0, r, 1.0))
        scores = np.where(mask, scores, -np.inf)
        scores -= scores.max(axis=1, keepdims=True)
        t = np.where(mask, np.exp(scores), 0.0)
        t /= t.sum(axis=1, keepdims=True)

        previous, value = value, _objective(joint, p_x_given_y, t)
        assert value <= previous + MONOTONE_SLACK, f"objective rose from {previous} to {value}"

        if previous - value < tolerance:
            return RestartOutcome(max(value, 0.0), iteration, True)

    return RestartOutcome(max(value, 0.0), max_iterations, False)


def _starting_point(mask: np.ndarray, restart: int, seed: int) -> np.ndarray:
    """Restart 0 spreads each row uniformly; later restarts draw rows from a Dirichlet."""
    if restart == 0:
        return mask / mask.sum(axis=1, keepdims=True)

    rng = np.random.default_rng([seed, restart])
    t = np.zeros(mask.shape, dtype=np.float64)

    for x in range(mask.shape[0]):
        allowed = np.nonzero(mask[x])[0]
        t[x, allowed] = rng.dirichlet(np.ones(len(allowed)))

    return t


@dataclass(frozen=True)
class GraphEntropyResult:
    value: float
    converged: bool
    restart_values: tuple[float, ...]
    iterations: tuple[int, ...]

    @property
    def spread(self) -> float:
        return max(self.restart_values) - min(self.restart_values)


def conditional_graph_entropy(
    graph: CharacteristicGraph,
    joint: DistributionTable | None = None,
    restarts: int = DEFAULT_RESTARTS,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    seed: int = 0,
    workers: int = 1,
) -> GraphEntropyResult:
    """
    `H_G(X | Y)`: the minimum of `I(W; X | Y)` over auxiliaries `W` taking values
    in the maximal independent sets of `graph`, with `X ∈ W` and `W → X → Y`.

    # Parameters
    - `joint`:     Optional. PMF over `(x, y)`; defaults to the one that built the graph.
    - `restarts`:  Number of independent starting points. Restart 0 is uniform.
    - `seed`:      Seeds the Dirichlet starting points of the later restarts.
    - `workers`:   Threads the restarts are spread over.

    The smallest value over all restarts is returned. `converged` is false
    when no restart met the tolerance within `max_iterations`.
    """
    matrix = graph.joint

    if joint is not None:
        xs, ys, matrix = _joint_matrix(joint)

        if xs != graph.xs or ys != graph.ys:
            raise ValueError("the joint distribution does not match the graph's alphabets")

    mask = _membership(graph)

    def run(restart: int) -> RestartOutcome:
        outcome = _minimize(
            matrix, mask, _starting_point(mask, restart, seed), tolerance, max_iterations
        )
        logger.debug(f"restart {restart}: {outcome.value:.12f} after {outcome.iterations} iterations")
        return outcome

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(run, range(restarts)))
    else:
        outcomes = [run(i) for i in range(restarts)]

    best = min(outcomes, key=lambda o: o.value)
    converged = any(o.converged for o in outcomes)

    if not converged:
        logger.warning(
            f"graph entropy optimizer did not converge after {max_iterations} iterations, "
            f"best value {best.value:.9f}"
        )

    return GraphEntropyResult(
        value=best.value,
        converged=converged,
        restart_values=tuple(o.value for o in outcomes),
        iterations=tuple(o.iterations for o in outcomes),
    )


def conditional_entropy_bound(graph: CharacteristicGraph) -> float:
    """`H(X | Y)`, the value reached when every vertex must be told apart."""
    return entropy_from_probabilities(graph.joint.ravel()) - entropy_from_probabilities(
        graph.joint.sum(axis=0)
    )


def _simplex_grid(parts: int, divisions: int) -> np.ndarray:
    """All points of the `parts`-simplex whose coordinates are multiples of `1 / divisions`."""
    if parts == 1:
        return np.ones((1, 1), dtype=np.float64)

    rows = []

    for first in range(divisions + 1):
        rest = _simplex_grid(parts - 1, divisions - first) * (divisions - first)
        head = np.full((rest.shape[0], 1), first, dtype=np.float64)
        rows.append(np.concatenate([head, rest], axis=1))

    return np.concatenate(rows, axis=0) / divisions


def grid_search_graph_entropy(
    graph: CharacteristicGraph, joint: DistributionTable | None = None, step: float = 1e-3
) -> float:
    """
    Minimizes `I(W; X | Y)` by evaluating every test channel on a grid of step
    `step` over each vertex's simplex. Only usable for tiny graphs.
    """
    matrix = graph.joint if joint is None else _joint_matrix(joint)[2]
    mask = _membership(graph)
    divisions = int(round(1 / step))
    allowed = [np.nonzero(mask[x])[0] for x in range(mask.shape[0])]
    sizes = [math.comb(divisions + len(a) - 1, len(a) - 1) for a in allowed]
    total = math.prod(sizes)

    if total > GRID_POINT_BUDGET:
        raise GridTooLarge(total)

    grids = [_simplex_grid(len(a), divisions) for a in allowed]
    p_x_given_y = matrix / matrix.sum(axis=0)[None, :]
    best = math.inf

    for start in range(0, total, GRID_CHUNK):
        index = np.arange(start, min(start + GRID_CHUNK, total))
        t = np.zeros((len(index), mask.shape[0], mask.shape[1]), dtype=np.float64)
        rest = index

        for x in reversed(range(mask.shape[0])):
            rest, digit = np.divmod(rest, sizes[x])
            t[:, x, allowed[x]] = grids[x][digit]

        r = np.einsum("xy,gxw->gyw", p_x_given_y, t)
        ratio = _log2_safe(t)[:, :, None, :] - _log2_safe(r)[:, None, :, :]
        weight = matrix[None, :, :, None] * t[:, :, None, :]
        values = np.where(weight > 0, weight * ratio, 0.0).sum(axis=(1, 2, 3))
        best = min(best, float(values.min()))

    return max(best, 0.0)


HYBRID_VARIANTS = ("km-or", "side-b")


def hybrid_graph(
    model: JointSourceModel, variant: str = "km-or", cap: int = DEFAULT_SUPPORT_CAP
) -> CharacteristicGraph:
    """
    Characteristic graph of `A` given the helper variable of a hybrid scheme
    for computing `AᵀB` with `l = 1`.

    - `km-or`:  the helper is `Y = A ⊕ B` and `g(A, Y) = Aᵀ(Y − A)`.
    - `side-b`: the helper is `B` itself and `g(A, B) = AᵀB`.
    """
    if model.l != 1:
        raise ValueError(f"{model.name}: the hybrid rate needs l = 1")

    q, m = model.q, model.m

    if variant == "km-or":
        table = pushforward(model, lambda a, b: flatten_rows(a, (a + b) % q), cap)
    elif variant == "side-b":
        table = pushforward(model, lambda a, b: flatten_rows(a, b), cap)
    else:
        raise ValueError(f"unknown hybrid rate variant `{variant}`, expected km-or or side-b")

    joint = DistributionTable(
        tuple((row[:m], row[m:]) for row in table.support), table.probabilities
    )
    a_values = {xy[0] for xy in joint.support}

    if len(a_values) > MAX_VERTICES:
        raise AlphabetTooLarge(len(a_values), MAX_VERTICES)

    def g(a: tuple, y: tuple) -> int:
        if variant == "km-or":
            return sum(x * (z - x) for x, z in zip(a, y)) % q
        return sum(x * z for x, z in zip(a, y)) % q

    return build_graph(joint, g)


def rate_km_or(
    model: JointSourceModel,
    variant: str = "km-or",
    cap: int = DEFAULT_SUPPORT_CAP,
    **options,
) -> float:
    """
    Hybrid sum rate for computing `AᵀB` with `l = 1`.

    - `km-or`:  both encoders send `Y = A ⊕ B` and the receiver additionally
                learns `A` up to the characteristic graph, giving
                `2H(Y) + H_G(A | Y)`.
    - `side-b`: `B` is sent in full and `A` is compressed against it,
                giving `H(B) + H_G(A | B)`.

    Extra keyword options are passed on to `conditional_graph_entropy`.
    """
    graph = hybrid_graph(model, variant, cap)
    h_y = entropy_from_probabilities(graph.joint.sum(axis=0))
    h_graph = conditional_graph_entropy(graph, **options).value
    rate = (2 * h_y if variant == "km-or" else h_y) + h_graph

    logger.info(f"{variant} rate for {model.name}: {rate:.9f}")
    return rate
