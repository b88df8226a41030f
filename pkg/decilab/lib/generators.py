"""Random k-CNF ensembles.

Three models are supported:

- ``uniform``: m *distinct* clauses drawn without replacement from all
  2^k * C(n, k) proper k-clauses.
- ``planted``: sigma uniform, then m clauses drawn *with* replacement from
  the (2^k - 1) * C(n, k) clauses that sigma satisfies.
- ``planted-binomial``: sigma uniform, then each satisfied clause kept
  independently with p = m / ((2^k - 1) * C(n, k)).

Uniform sampling is without replacement and planted-fixed sampling is with
replacement. Clauses are built by unranking indices, so a draw depends only
on the seed and the numpy Philox stream, never on the platform.
"""

from __future__ import annotations

from collections.abc import Iterator
import logging
from math import comb
from typing import NamedTuple

import numpy as np

from .formula import Assignment, Formula
from .rng import spawn_generator, uniform_below
from ..types import AssignmentError, Clause, FormulaError, GenConfig, Model
from ..utils.validation import ValidationError, validate_model_size, validate_seed

logger = logging.getLogger(__name__)


class PlantedPair(NamedTuple):
    """A planted formula together with the assignment it was built around."""

    formula: Formula
    sigma: Assignment


def clause_universe_size(n: int, k: int) -> int:
    """Number of proper k-clauses over n variables, 2^k * C(n, k).

    Examples:
        >>> clause_universe_size(4, 3)
        32
    """
    return (1 << k) * comb(n, k)


def satisfied_universe_size(n: int, k: int) -> int:
    """Number of proper k-clauses a fixed assignment satisfies.

    Examples:
        >>> satisfied_universe_size(4, 3)
        28
    """
    return ((1 << k) - 1) * comb(n, k)


def unrank_subset(rank: int, n: int, k: int) -> tuple[int, ...]:
    """The k-subset of {1..n} with colex rank ``rank`` (combinatorial number system).

    Examples:
        >>> [unrank_subset(r, 4, 2) for r in range(6)]
        [(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)]
    """
    if not 0 <= rank < comb(n, k):
        raise ValidationError(f"rank {rank} outside [0, C({n},{k}))")
    chosen: list[int] = []
    upper = n
    for size in range(k, 0, -1):
        # largest c < upper with C(c, size) <= rank
        lo, hi = size - 1, upper - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if comb(mid, size) <= rank:
                lo = mid
            else:
                hi = mid - 1
        chosen.append(lo + 1)
        rank -= comb(lo, size)
        upper = lo
    return tuple(reversed(chosen))


def unrank_clause(index: int, n: int, k: int) -> Clause:
    """Proper k-clause number ``index`` of the 2^k * C(n, k) universe.

    The low k bits are the sign pattern: bit i set means the i-th smallest
    variable occurs positively.
    """
    subset_rank, pattern = divmod(index, 1 << k)
    variables = unrank_subset(subset_rank, n, k)
    return tuple(v if (pattern >> i) & 1 else -v for i, v in enumerate(variables))


def unrank_satisfied_clause(index: int, sigma: Assignment, n: int, k: int) -> Clause:
    """Clause number ``index`` among the (2^k - 1) * C(n, k) clauses sigma satisfies."""
    subset_rank, pattern = divmod(index, (1 << k) - 1)
    variables = unrank_subset(subset_rank, n, k)
    falsified = sum(1 << i for i, v in enumerate(variables) if not sigma.value(v))
    if pattern >= falsified:
        pattern += 1
    return tuple(v if (pattern >> i) & 1 else -v for i, v in enumerate(variables))


def _validate(config: GenConfig) -> None:
    validate_model_size(config.n, config.k, config.m)
    validate_seed(config.seed)


def _random_sigma(rng: np.random.Generator, n: int) -> Assignment:
    values = rng.integers(0, 2, size=n)
    return Assignment.from_mapping({i + 1: int(v) for i, v in enumerate(values)})


def _checked(formula: Formula, sigma: Assignment) -> PlantedPair:
    if not formula.is_satisfied_by(sigma):
        raise FormulaError("planted formula is not satisfied by its sigma")
    return PlantedPair(formula, sigma)


def gen_uniform(config: GenConfig) -> Formula:
    """Draw Phi_k(n, m): m distinct proper k-clauses, uniformly at random.

    Raises:
        ValidationError: If m exceeds the clause universe
    """
    _validate(config)
    universe = clause_universe_size(config.n, config.k)
    if config.m > universe:
        raise ValidationError(f"m={config.m} exceeds the clause universe of size {universe}")
    rng = spawn_generator(config.seed, config.stream)
    # Floyd's algorithm: a uniform m-subset with m draws.
    chosen: set[int] = set()
    for upper in range(universe - config.m, universe):
        draw = uniform_below(rng, upper + 1)
        chosen.add(upper if draw in chosen else draw)
    clauses = tuple(unrank_clause(index, config.n, config.k) for index in sorted(chosen))
    logger.debug(
        "uniform formula n=%d k=%d m=%d seed=%d", config.n, config.k, config.m, config.seed
    )
    return Formula(n=config.n, k=config.k, clauses=clauses)


def gen_planted_fixed(config: GenConfig) -> PlantedPair:
    """Planted model with exactly m clauses drawn with replacement."""
    _validate(config)
    rng = spawn_generator(config.seed, config.stream)
    sigma = _random_sigma(rng, config.n)
    universe = satisfied_universe_size(config.n, config.k)
    clauses = tuple(
        unrank_satisfied_clause(uniform_below(rng, universe), sigma, config.n, config.k)
        for _ in range(config.m)
    )
    return _checked(Formula(n=config.n, k=config.k, clauses=clauses), sigma)


def _binomial_indices(rng: np.random.Generator, universe: int, p: float) -> Iterator[int]:
    """Indices kept by independent Bernoulli(p) trials, via geometric gaps."""
    if p <= 0.0:
        return
    position = -1
    while True:
        position += int(rng.geometric(p))
        if position >= universe:
            return
        yield position


def gen_planted_binomial(config: GenConfig) -> PlantedPair:
    """Planted model keeping each satisfied clause with probability p.

    Raises:
        ValidationError: If p = m / ((2^k - 1) * C(n, k)) exceeds 1
    """
    _validate(config)
    universe = satisfied_universe_size(config.n, config.k)
    if config.m > universe:
        raise ValidationError(f"p = {config.m}/{universe} exceeds 1")
    p = config.m / universe
    rng = spawn_generator(config.seed, config.stream)
    sigma = _random_sigma(rng, config.n)
    clauses = tuple(
        unrank_satisfied_clause(index, sigma, config.n, config.k)
        for index in _binomial_indices(rng, universe, p)
    )
    return _checked(Formula(n=config.n, k=config.k, clauses=clauses), sigma)


def generate(config: GenConfig) -> Formula | PlantedPair:
    """Dispatch on ``config.model``."""
    if config.model is Model.UNIFORM:
        return gen_uniform(config)
    if config.model is Model.PLANTED:
        return gen_planted_fixed(config)
    return gen_planted_binomial(config)


def decimate_under(pair: PlantedPair | tuple[Formula, Assignment], t: int) -> Formula:
    """Substitute sigma(x_i) for x_1..x_t and simplify.

    The result equals t sequential calls of substitute_and_simplify; it is
    computed in one pass over the clauses.

    Raises:
        AssignmentError: If sigma does not satisfy the formula
        ValidationError: If t leaves [decimated, n]
    """
    formula, sigma = pair
    if not formula.decimated <= t <= formula.n:
        raise ValidationError(f"t={t} outside [{formula.decimated}, {formula.n}]")
    if not formula.is_satisfied_by(sigma):
        raise AssignmentError("sigma does not satisfy the formula")
    if t == formula.decimated:
        return formula
    reduced: list[Clause] = []
    for clause in formula.clauses:
        if any(abs(lit) <= t and sigma.satisfies(lit) for lit in clause):
            continue
        reduced.append(tuple(lit for lit in clause if abs(lit) > t))
    return Formula(
        n=formula.n,
        k=formula.k,
        clauses=tuple(reduced),
        decimated=t,
        scope=frozenset(v for v in formula.variables if v > t),
    )
