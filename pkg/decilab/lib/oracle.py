"""Exact solution counting, marginals and sampling.

Counting is a DPLL search with unit propagation that splits the residual
formula into variable-disjoint components and caches component counts.
Variables in the scope that no clause mentions contribute a factor of 2.
Everything built on top of the counter is exact: marginals are Fractions
and samples are drawn with integer weights.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import islice
import logging

import numpy as np

from .formula import Assignment, Formula, substitute_and_simplify
from .rng import coerce_generator, uniform_below
from ..types import (
    Clause,
    OracleLimitError,
    OracleLimits,
    SimplifyStatus,
    UnsatisfiableError,
    VariableIndex,
)

logger = logging.getLogger(__name__)

Clauses = tuple[Clause, ...]
_ComponentCache = dict[frozenset[Clause], int]


# ============================================================================
# DPLL counting kernel
# ============================================================================


def _assign(clauses: Clauses, literal: int) -> Clauses | None:
    """Make ``literal`` true; None on an empty clause."""
    reduced: list[Clause] = []
    for clause in clauses:
        if literal in clause:
            continue
        if -literal in clause:
            shorter = tuple(lit for lit in clause if lit != -literal)
            if not shorter:
                return None
            reduced.append(shorter)
        else:
            reduced.append(clause)
    return tuple(reduced)


def _propagate(clauses: Clauses) -> tuple[Clauses | None, set[VariableIndex]]:
    forced: set[VariableIndex] = set()
    current: Clauses | None = clauses
    while current:
        unit = next((clause[0] for clause in current if len(clause) == 1), None)
        if unit is None:
            break
        forced.add(abs(unit))
        current = _assign(current, unit)
    return current, forced


def _components(clauses: Clauses) -> list[Clauses]:
    parent: dict[VariableIndex, VariableIndex] = {}

    def find(v: VariableIndex) -> VariableIndex:
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    for clause in clauses:
        first = abs(clause[0])
        parent.setdefault(first, first)
        for literal in clause[1:]:
            v = abs(literal)
            parent.setdefault(v, v)
            a, b = find(first), find(v)
            if a != b:
                parent[b] = a
    groups: dict[VariableIndex, list[Clause]] = {}
    for clause in clauses:
        groups.setdefault(find(abs(clause[0])), []).append(clause)
    return [tuple(group) for group in groups.values()]


def _count(clauses: Clauses, scope: frozenset[VariableIndex], cache: _ComponentCache) -> int:
    """Satisfying assignments of ``clauses`` over ``scope``."""
    propagated, forced = _propagate(clauses)
    if propagated is None:
        return 0
    scope = scope - forced
    if not propagated:
        return 1 << len(scope)
    constrained = {abs(lit) for clause in propagated for lit in clause}
    total = 1 << (len(scope) - len(constrained))
    for component in _components(propagated):
        total *= _count_component(component, cache)
        if total == 0:
            return 0
    return total


def _count_component(clauses: Clauses, cache: _ComponentCache) -> int:
    key = frozenset(clauses)
    cached = cache.get(key)
    if cached is not None:
        return cached
    variables = frozenset(abs(lit) for clause in clauses for lit in clause)
    pivot = Counter(abs(lit) for clause in clauses for lit in clause).most_common(1)[0][0]
    rest = variables - {pivot}
    total = 0
    for literal in (pivot, -pivot):
        reduced = _assign(clauses, literal)
        if reduced is not None:
            total += _count(reduced, rest, cache)
    cache[key] = total
    return total


def _check_limits(formula: Formula, limits: OracleLimits) -> None:
    if len(formula.variables) > limits.max_free_vars:
        raise OracleLimitError(
            f"{len(formula.variables)} free variables exceed the limit of {limits.max_free_vars}"
        )


@lru_cache(maxsize=65536)
def _cached_count(formula: Formula) -> int:
    return _count(formula.clauses, formula.variables, {})


def count_solutions(formula: Formula, *, limits: OracleLimits | None = None) -> int:
    """Exact |S(formula)| over its free variables.

    Raises:
        OracleLimitError: If the formula has too many free variables
    """
    _check_limits(formula, limits or OracleLimits())
    return _cached_count(formula)


# ============================================================================
# Solution sets and marginals
# ============================================================================


@dataclass(frozen=True, slots=True)
class SolutionSet:
    """Satisfying assignments of a formula, bit-packed over ``variables``.

    ``count`` is always exact; ``solutions`` may be cut at the cap.
    """

    formula: Formula
    variables: tuple[VariableIndex, ...]
    solutions: tuple[int, ...]
    count: int

    @property
    def truncated(self) -> bool:
        return len(self.solutions) < self.count

    def __len__(self) -> int:
        return len(self.solutions)

    def assignments(self) -> Iterator[Assignment]:
        for bits in self.solutions:
            yield Assignment(self.variables, bits)

    def __contains__(self, assignment: object) -> bool:
        if not isinstance(assignment, Assignment) or assignment.variables != self.variables:
            return False
        return assignment.bits in self._lookup()

    def _lookup(self) -> frozenset[int]:
        return _solution_lookup(self.solutions)

    def bit_matrix(self) -> np.ndarray:
        """Solutions as a ``(len(self), len(variables))`` uint8 matrix."""
        packed = np.array(self.solutions, dtype=np.uint64)
        shifts = np.arange(len(self.variables), dtype=np.uint64)
        return ((packed[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)

    def packed(self) -> np.ndarray:
        return np.array(self.solutions, dtype=np.uint64)


@lru_cache(maxsize=256)
def _solution_lookup(solutions: tuple[int, ...]) -> frozenset[int]:
    return frozenset(solutions)


def _enumerate(
    clauses: Clauses, order: tuple[VariableIndex, ...], position: int, bits: int
) -> Iterator[int]:
    if not clauses:
        free = len(order) - position
        for tail in range(1 << free):
            yield bits | (tail << position)
        return
    variable = order[position]
    for value in (0, 1):
        reduced = _assign(clauses, variable if value else -variable)
        if reduced is not None:
            yield from _enumerate(reduced, order, position + 1, bits | (value << position))


def enumerate_solutions(
    formula: Formula, cap: int | None = None, *, limits: OracleLimits | None = None
) -> SolutionSet:
    """All satisfying assignments, materialized up to ``cap``.

    Solutions come in lexicographic order of (x_{t+1}, x_{t+2}, ...).

    Raises:
        OracleLimitError: If the formula has too many free variables
    """
    limits = limits or OracleLimits()
    count = count_solutions(formula, limits=limits)
    cap = limits.max_solutions if cap is None else cap
    order = formula.ordered_variables
    solutions = tuple(islice(_enumerate(formula.clauses, order, 0, 0), cap))
    if len(solutions) < count:
        logger.info("materialized %d of %d solutions (cap=%d)", len(solutions), count, cap)
    return SolutionSet(formula=formula, variables=order, solutions=solutions, count=count)


@dataclass(frozen=True, slots=True)
class MarginalVector:
    """Exact marginals M_x = #{sigma in S : sigma(x) = 1} / |S|."""

    values: dict[VariableIndex, Fraction]
    count: int

    def __getitem__(self, variable: VariableIndex) -> Fraction:
        return self.values[variable]

    def as_floats(self) -> dict[VariableIndex, float]:
        """Marginals rounded to the nearest 64-bit float."""
        return {v: float(value) for v, value in self.values.items()}


def true_marginals(formula: Formula, *, limits: OracleLimits | None = None) -> MarginalVector:
    """Exact marginal of every free variable.

    Raises:
        UnsatisfiableError: If the formula has no solution
    """
    _check_limits(formula, limits or OracleLimits())
    cache: _ComponentCache = {}
    total = _count(formula.clauses, formula.variables, cache)
    if total == 0:
        raise UnsatisfiableError("marginals are undefined for an unsatisfiable formula")
    values: dict[VariableIndex, Fraction] = {}
    for variable in formula.ordered_variables:
        reduced = _assign(formula.clauses, variable)
        ones = 0 if reduced is None else _count(reduced, formula.variables - {variable}, cache)
        values[variable] = Fraction(ones, total)
    return MarginalVector(values=values, count=total)


def marginal_histogram(
    marginals: dict[VariableIndex, float], *, bins: int = 10
) -> tuple[int, ...]:
    """Counts of marginal values over ``bins`` equal-width bins of [0, 1]."""
    counts, _ = np.histogram(list(marginals.values()), bins=bins, range=(0.0, 1.0))
    return tuple(int(c) for c in counts)


# ============================================================================
# Decimation process and uniform sampling
# ============================================================================


@dataclass(frozen=True, slots=True)
class DecimationStep:
    variable: VariableIndex
    marginal: Fraction
    value: int


@dataclass(frozen=True, slots=True)
class DecimationRun:
    """Output of the decimation process: the assignment and per-step marginals."""

    assignment: Assignment
    trace: tuple[DecimationStep, ...]


def decimation_process(
    formula: Formula,
    seed: int | np.random.Generator,
    *,
    limits: OracleLimits | None = None,
) -> DecimationRun:
    """Assign x_{t+1}, x_{t+2}, ... in turn, each 1 with its exact marginal.

    The output is uniform over S(formula).

    Raises:
        UnsatisfiableError: If the formula has no solution
    """
    limits = limits or OracleLimits()
    rng = coerce_generator(seed)
    total = count_solutions(formula, limits=limits)
    if total == 0:
        raise UnsatisfiableError("the decimation process needs a satisfiable formula")
    current = formula
    values: dict[VariableIndex, int] = {}
    trace: list[DecimationStep] = []
    for variable in formula.ordered_variables:
        positive = substitute_and_simplify(current, variable, 1)
        ones = 0 if positive.formula is None else count_solutions(positive.formula, limits=limits)
        value = 1 if uniform_below(rng, total) < ones else 0
        trace.append(DecimationStep(variable, Fraction(ones, total), value))
        if value:
            outcome, total = positive, ones
        else:
            outcome, total = substitute_and_simplify(current, variable, 0), total - ones
        # a positive-weight branch is never unsatisfiable
        assert outcome.status is not SimplifyStatus.UNSATISFIABLE and outcome.formula is not None
        current = outcome.formula
        values[variable] = value
    return DecimationRun(assignment=Assignment.from_mapping(values), trace=tuple(trace))


def uniform_solution_sample(
    formula: Formula,
    seed: int | np.random.Generator,
    *,
    limits: OracleLimits | None = None,
) -> Assignment:
    """Exact uniform sample from S(formula) by count-weighted descent.

    Raises:
        UnsatisfiableError: If the formula has no solution
    """
    _check_limits(formula, limits or OracleLimits())
    rng = coerce_generator(seed)
    cache: _ComponentCache = {}
    clauses: Clauses = formula.clauses
    scope = formula.variables
    total = _count(clauses, scope, cache)
    if total == 0:
        raise UnsatisfiableError("cannot sample from an unsatisfiable formula")
    values: dict[VariableIndex, int] = {}
    for variable in formula.ordered_variables:
        scope = scope - {variable}
        positive = _assign(clauses, variable)
        ones = 0 if positive is None else _count(positive, scope, cache)
        if uniform_below(rng, total) < ones:
            assert positive is not None
            clauses, total, values[variable] = positive, ones, 1
        else:
            negative = _assign(clauses, -variable)
            assert negative is not None
            clauses, total, values[variable] = negative, total - ones, 0
    return Assignment.from_mapping(values)
