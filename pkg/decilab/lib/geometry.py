"""Geometry of solution sets: distance profiles, diameter and clustering.

All distances are absolute Hamming counts over the free variables. Rates
such as alpha and beta are converted at this boundary, with ceilings for
separation thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
from math import ceil, exp, sqrt

import numpy as np

from .formula import Assignment
from .oracle import SolutionSet, uniform_solution_sample
from .rng import coerce_generator
from ..types import AssignmentError, OracleLimitError, OracleLimits, UnsatisfiableError

logger = logging.getLogger(__name__)

DIAMETER_EXACT_LIMIT = 20_000
DISTANCE_MATRIX_LIMIT = 4096
DEFAULT_PAIRS = 2000
_PACKED_BITS = 64


def _packed(solution_set: SolutionSet) -> np.ndarray:
    if len(solution_set.variables) > _PACKED_BITS:
        raise OracleLimitError(f"distances need at most {_PACKED_BITS} free variables")
    return solution_set.packed()


def _distances(packed: np.ndarray, reference: np.uint64) -> np.ndarray:
    return np.bitwise_count(packed ^ reference).astype(np.int64)


def distance_profile(solution_set: SolutionSet, reference: Assignment) -> tuple[int, ...]:
    """X_d = number of solutions at Hamming distance d from ``reference``, d = 0..theta*n.

    Raises:
        AssignmentError: If the reference is not over the set's variables
        OracleLimitError: If the set is not fully materialized
    """
    if reference.variables != solution_set.variables:
        raise AssignmentError("reference must be an assignment over the free variables")
    if solution_set.truncated:
        raise OracleLimitError("a distance profile needs a fully materialized solution set")
    width = len(solution_set.variables)
    if not solution_set.solutions:
        return (0,) * (width + 1)
    distances = _distances(_packed(solution_set), np.uint64(reference.bits))
    return tuple(int(x) for x in np.bincount(distances, minlength=width + 1))


@dataclass(frozen=True, slots=True)
class GeometryReport:
    """Distances between satisfying assignments.

    When ``sampled`` is set the average comes from uniform pairs and
    carries ``standard_error``; the diameter is then a lower bound.
    """

    count: int
    free_variables: int
    average_distance: float
    standard_error: float
    sampled: bool
    diameter: int
    diameter_exact: bool
    frozen_fraction: float | None
    alpha: float | None = None
    condensed: bool | None = None

    @property
    def relative_average(self) -> float:
        """Average distance as a fraction of theta*n."""
        return self.average_distance / self.free_variables if self.free_variables else 0.0


def _exact_average(matrix: np.ndarray) -> float:
    total = matrix.shape[0]
    ones = matrix.sum(axis=0, dtype=np.int64)
    # ordered pairs differing at position i: 2 * c_i * (N - c_i)
    return float((2 * ones * (total - ones)).sum() / (total * total))


def _exact_diameter(packed: np.ndarray) -> int:
    diameter = 0
    for index in range(len(packed) - 1):
        farthest = np.bitwise_count(packed[index] ^ packed[index + 1 :]).max()
        diameter = max(diameter, int(farthest))
    return diameter


def geometry(
    solution_set: SolutionSet,
    alpha: float | None = None,
    *,
    rng: int | np.random.Generator | None = None,
    pairs: int = DEFAULT_PAIRS,
    limits: OracleLimits | None = None,
) -> GeometryReport:
    """Average pairwise distance over ordered pairs and the diameter.

    A truncated set switches to ``pairs`` uniform pairs drawn with the exact
    sampler. With ``alpha`` given, the set is alpha-condensed iff its
    diameter is at most alpha*n.

    Raises:
        UnsatisfiableError: If the set is empty
    """
    if solution_set.count == 0:
        raise UnsatisfiableError("geometry of an empty solution set is undefined")
    width = len(solution_set.variables)
    packed = _packed(solution_set)

    if not solution_set.truncated:
        matrix = solution_set.bit_matrix()
        average = _exact_average(matrix)
        standard_error = 0.0
        column_sums = matrix.sum(axis=0)
        frozen = int(((column_sums == 0) | (column_sums == len(matrix))).sum())
        frozen_fraction: float | None = frozen / width if width else 0.0
    else:
        generator = coerce_generator(0 if rng is None else rng)
        draws = [
            uniform_solution_sample(solution_set.formula, generator, limits=limits)
            for _ in range(2 * pairs)
        ]
        samples = np.array(
            [a.distance(b) for a, b in zip(draws[::2], draws[1::2], strict=True)], dtype=float
        )
        average = float(samples.mean())
        standard_error = float(samples.std(ddof=1) / sqrt(pairs)) if pairs > 1 else float("inf")
        frozen_fraction = None
        logger.info(
            "sampled %d pairs from %d solutions: average %.4f +/- %.4f",
            pairs,
            solution_set.count,
            average,
            standard_error,
        )

    diameter_exact = not solution_set.truncated and len(packed) <= DIAMETER_EXACT_LIMIT
    # otherwise a lower bound from the first materialized solutions
    diameter = _exact_diameter(packed[:DIAMETER_EXACT_LIMIT])

    condensed = None if alpha is None else diameter <= alpha * solution_set.formula.n
    return GeometryReport(
        count=solution_set.count,
        free_variables=width,
        average_distance=average,
        standard_error=standard_error,
        sampled=solution_set.truncated,
        diameter=diameter,
        diameter_exact=diameter_exact,
        frozen_fraction=frozen_fraction,
        alpha=alpha,
        condensed=condensed,
    )


def average_from_profiles(solution_set: SolutionSet) -> float:
    """Average pairwise distance recomputed from the profile of every solution."""
    total = 0
    for reference in solution_set.assignments():
        profile = distance_profile(solution_set, reference)
        total += sum(d * x for d, x in enumerate(profile))
    return total / (solution_set.count * solution_set.count)


# ============================================================================
# Shattering
# ============================================================================


@dataclass(frozen=True, slots=True)
class ShatterResult:
    """Greedy ball decomposition of a solution set and its shattering verdict.

    Clusters and the leftover are index tuples into ``solutions`` of the set.
    """

    clusters: tuple[tuple[int, ...], ...]
    leftover: tuple[int, ...]
    size_bound: float
    separation_bound: int
    min_separation: int | None
    largest_fraction: float
    leftover_fraction: float
    size_condition: bool
    separation_condition: bool
    shattered: bool
    estimated: bool

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(cluster) for cluster in self.clusters)


def shatter_decomposition(
    solution_set: SolutionSet,
    radius: int,
    alpha: float,
    beta: float,
    *,
    gap: int | None = None,
    max_leftover: float = 0.0,
    max_points: int = DISTANCE_MATRIX_LIMIT,
) -> ShatterResult:
    """Peel balls of ``radius`` around the densest remaining good solution.

    A solution is good unless ``gap`` is set and another solution lies at
    distance d with radius < d <= gap. Each round picks the uncovered good
    solution whose ball holds the most unassigned solutions (earliest in set
    order on ties) and carves that ball out as a cluster, bad members
    included. The leftover is whatever no ball covers.

    The set is shattered iff every cluster has at most exp(-alpha*theta*n)|S|
    solutions, clusters are at least ceil(beta*theta*n) apart and the leftover
    fraction is at most ``max_leftover``.

    Raises:
        OracleLimitError: If more than ``max_points`` solutions are materialized
    """
    points = len(solution_set.solutions)
    if points > max_points:
        raise OracleLimitError(f"{points} solutions exceed the distance matrix limit {max_points}")
    width = len(solution_set.variables)
    total = solution_set.count
    packed = _packed(solution_set)
    matrix = np.bitwise_count(packed[:, None] ^ packed[None, :]).astype(np.int64)
    within = matrix <= radius

    eligible = np.ones(points, dtype=bool)
    if gap is not None:
        eligible = ~((matrix > radius) & (matrix <= gap)).any(axis=1)

    labels = np.full(points, -1, dtype=np.int64)
    remaining = np.ones(points, dtype=bool)
    candidates = eligible.copy()
    clusters: list[tuple[int, ...]] = []
    while candidates.any():
        density = np.where(candidates, within[:, remaining].sum(axis=1), -1)
        center = int(np.argmax(density))
        members = remaining & within[center]
        labels[members] = len(clusters)
        clusters.append(tuple(int(i) for i in np.flatnonzero(members)))
        remaining &= ~members
        candidates &= ~members

    leftover = tuple(int(i) for i in np.flatnonzero(labels < 0))
    clustered = labels >= 0
    across = (labels[:, None] != labels[None, :]) & clustered[:, None] & clustered[None, :]
    min_separation = int(matrix[across].min()) if across.any() else None

    size_bound = exp(-alpha * width) * total
    separation_bound = ceil(beta * width)
    largest = max((len(c) for c in clusters), default=0)
    leftover_fraction = len(leftover) / total if total else 0.0
    size_condition = largest <= size_bound
    separation_condition = min_separation is None or min_separation >= separation_bound
    logger.debug(
        "shatter: %d clusters, largest %d, separation %s, leftover %d",
        len(clusters),
        largest,
        min_separation,
        len(leftover),
    )
    return ShatterResult(
        clusters=tuple(clusters),
        leftover=leftover,
        size_bound=size_bound,
        separation_bound=separation_bound,
        min_separation=min_separation,
        largest_fraction=largest / total if total else 0.0,
        leftover_fraction=leftover_fraction,
        size_condition=size_condition,
        separation_condition=separation_condition,
        shattered=size_condition and separation_condition and leftover_fraction <= max_leftover,
        estimated=solution_set.truncated,
    )
