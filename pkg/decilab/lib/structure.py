"""Variable-level structure of a formula around a satisfying assignment.

Detectors here are either syntactic given sigma (support, 1-/2-loose,
forced, tame, self-contained, expansion, Q0) or need the exact solution
set (loose, rigid). Finite-n thresholds use natural logs with ceilings,
floored at 1; see ``thresholds``.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
import logging
from math import ceil, floor, log
from typing import NamedTuple

import networkx as nx
import numpy as np

from .formula import Assignment, Formula, factor_graph, variable_node
from .oracle import SolutionSet
from ..types import (
    AssignmentError,
    ClauseIndex,
    ExpansionMode,
    LiteralCode,
    OracleLimitError,
    VariableIndex,
)

logger = logging.getLogger(__name__)

EXHAUSTIVE_EXPANSION_LIMIT = 20
TAME_RADIUS = 3


class Thresholds(NamedTuple):
    """ceil(ln n) and ceil(ln ln n), both at least 1."""

    ln_n: int
    ln_ln_n: int


def thresholds(n: int) -> Thresholds:
    """Resolved finite-n thresholds.

    Examples:
        >>> thresholds(100)
        Thresholds(ln_n=5, ln_ln_n=2)
        >>> thresholds(2)
        Thresholds(ln_n=1, ln_ln_n=1)
    """
    ln_n = log(n) if n > 1 else 0.0
    ln_ln_n = log(ln_n) if ln_n > 1 else 0.0
    return Thresholds(max(1, ceil(ln_n)), max(1, ceil(ln_ln_n)))


def _require_satisfying(formula: Formula, sigma: Assignment) -> None:
    if not formula.variables <= sigma.scope:
        raise AssignmentError("sigma must assign every free variable")
    if not formula.is_satisfied_by(sigma):
        raise AssignmentError("sigma does not satisfy the formula")


# ============================================================================
# Support
# ============================================================================


@dataclass(frozen=True, slots=True)
class SupportTable:
    """Which literal, if any, supports each clause under sigma.

    A literal supports a clause when it is the only true literal in it.
    ``counts`` maps the true literal of every free variable to S_l.
    """

    supporter: tuple[LiteralCode | None, ...]
    counts: dict[LiteralCode, int]

    def supported_by(self, literal: LiteralCode) -> tuple[ClauseIndex, ...]:
        return tuple(i for i, s in enumerate(self.supporter) if s == literal)

    def support_class(self, literal: LiteralCode) -> int:
        """0, 1, 2, or 3 for three or more supported clauses."""
        return min(self.counts.get(literal, 0), 3)

    def mean_support(self) -> float:
        return sum(self.counts.values()) / len(self.counts) if self.counts else 0.0


def support_table(formula: Formula, sigma: Assignment) -> SupportTable:
    """Support counts per true literal.

    Raises:
        AssignmentError: If sigma does not satisfy the formula
    """
    _require_satisfying(formula, sigma)
    counts = {sigma.true_literal(v): 0 for v in formula.ordered_variables}
    supporter: list[LiteralCode | None] = []
    for clause in formula.clauses:
        true_literals = {lit for lit in clause if sigma.satisfies(lit)}
        if len(true_literals) == 1:
            (literal,) = true_literals
            counts[literal] = counts.get(literal, 0) + 1
            supporter.append(literal)
        else:
            supporter.append(None)
    assert sum(counts.values()) <= formula.m
    return SupportTable(supporter=tuple(supporter), counts=counts)


class LooseLiterals(NamedTuple):
    """Variables whose sigma-true literal is 1-loose, resp. 2-loose."""

    one_loose: frozenset[VariableIndex]
    two_loose: frozenset[VariableIndex]


def classify_two_loose(formula: Formula, sigma: Assignment) -> LooseLiterals:
    """1-loose: supports no clause. 2-loose: every supported clause has another 1-loose variable."""
    table = support_table(formula, sigma)
    one_loose = frozenset(
        v for v in formula.variables if table.counts[sigma.true_literal(v)] == 0
    )
    blocked: set[VariableIndex] = set()
    for clause, literal in zip(formula.clauses, table.supporter, strict=True):
        if literal is None:
            continue
        owner = abs(literal)
        if not any(abs(lit) != owner and abs(lit) in one_loose for lit in clause):
            blocked.add(owner)
    return LooseLiterals(one_loose, frozenset(formula.variables - blocked))


# ============================================================================
# Flip distances: loose and rigid
# ============================================================================


def flip_distances(
    sigma: Assignment, solution_set: SolutionSet
) -> dict[VariableIndex, int | None]:
    """d_min(x) = min distance from sigma to a solution with x flipped; None if none exists.

    Raises:
        AssignmentError: If sigma is not one of the solutions
        OracleLimitError: If the solution set is truncated
    """
    if solution_set.truncated:
        raise OracleLimitError("flip distances need a fully materialized solution set")
    reference = sigma.restrict(solution_set.variables)
    if reference not in solution_set:
        raise AssignmentError("sigma is not a satisfying assignment of the formula")
    matrix = solution_set.bit_matrix().astype(bool)
    values = np.array([bool(reference.value(v)) for v in solution_set.variables], dtype=bool)
    differs = matrix != values[None, :]
    distances = differs.sum(axis=1)
    sentinel = len(solution_set.variables) + 1
    nearest = np.where(differs, distances[:, None], sentinel).min(axis=0, initial=sentinel)
    return {
        v: (None if int(d) == sentinel else int(d))
        for v, d in zip(solution_set.variables, nearest, strict=True)
    }


def classify_loose(
    formula: Formula, sigma: Assignment, solution_set: SolutionSet
) -> frozenset[VariableIndex]:
    """Variables flippable within ceil(ln n) of sigma."""
    bound = thresholds(formula.n).ln_n
    return frozenset(
        v for v, d in flip_distances(sigma, solution_set).items() if d is not None and d <= bound
    )


class RigidityEntry(NamedTuple):
    d_min: int | None
    rigid: bool


def classify_rigid(
    formula: Formula, sigma: Assignment, solution_set: SolutionSet, omega: int
) -> dict[VariableIndex, RigidityEntry]:
    """omega-rigid iff no flip exists or every flip costs at least omega."""
    return {
        v: RigidityEntry(d, d is None or d >= omega)
        for v, d in flip_distances(sigma, solution_set).items()
    }


# ============================================================================
# Forced and tame
# ============================================================================


def classify_forced(formula: Formula) -> frozenset[VariableIndex]:
    """Variables occurring in a unit clause."""
    return frozenset(abs(clause[0]) for clause in formula.clauses if len(clause) == 1)


def forcing_clauses(
    formula: Formula, sigma: Assignment, t: int
) -> tuple[tuple[ClauseIndex, LiteralCode], ...]:
    """Clauses reduced to a unit clause by decimating x_1..x_t under sigma.

    Each entry is (clause index, the literal left over).
    """
    forcing: list[tuple[ClauseIndex, LiteralCode]] = []
    for index, clause in enumerate(formula.clauses):
        prefix = [lit for lit in clause if abs(lit) <= t]
        rest = [lit for lit in clause if abs(lit) > t]
        if len(rest) == 1 and not any(sigma.satisfies(lit) for lit in prefix):
            forcing.append((index, rest[0]))
    return tuple(forcing)


def classify_tame(formula: Formula) -> frozenset[VariableIndex]:
    """Variables whose radius-3 factor-graph ball is acyclic with at most ceil(ln n) variables."""
    graph = factor_graph(formula)
    bound = thresholds(formula.n).ln_n
    tame: set[VariableIndex] = set()
    for variable in formula.ordered_variables:
        ball = nx.ego_graph(graph, variable_node(variable), radius=TAME_RADIUS)
        size = sum(1 for node in ball if node[0] == "v")
        if size <= bound and nx.is_forest(ball):
            tame.add(variable)
    return frozenset(tame)


# ============================================================================
# Self-contained sets
# ============================================================================


@dataclass(frozen=True, slots=True)
class SelfContainedSet:
    """Maximum set of true literals each supporting two clauses closed in the set.

    ``certificate`` maps every member to two such clause indices.
    """

    literals: frozenset[LiteralCode]
    certificate: dict[LiteralCode, tuple[ClauseIndex, ClauseIndex]]

    @property
    def variables(self) -> frozenset[VariableIndex]:
        return frozenset(abs(lit) for lit in self.literals)


def _is_closed(clause: tuple[int, ...], alive: set[VariableIndex], t: int) -> bool:
    return all(abs(lit) <= t or abs(lit) in alive for lit in clause)


def max_self_contained(
    formula: Formula, sigma: Assignment, t: int | None = None
) -> SelfContainedSet:
    """Peel literals with fewer than two closed supported clauses until none remain.

    Candidates are the sigma-true literals of free variables beyond x_t; a
    clause is closed when each of its variables is at most t or a candidate
    still alive. ``t`` defaults to the formula's decimated prefix.
    """
    t = formula.decimated if t is None else t
    table = support_table(formula, sigma)
    alive = {v for v in formula.variables if v > t}
    supported: dict[VariableIndex, list[ClauseIndex]] = {v: [] for v in alive}
    containing: dict[VariableIndex, list[ClauseIndex]] = {v: [] for v in alive}
    for index, (clause, literal) in enumerate(zip(formula.clauses, table.supporter, strict=True)):
        if literal is not None and abs(literal) in alive:
            supported[abs(literal)].append(index)
        for variable in {abs(lit) for lit in clause}:
            if variable in containing:
                containing[variable].append(index)

    closed = [_is_closed(clause, alive, t) for clause in formula.clauses]
    closed_support = {v: sum(closed[i] for i in supported[v]) for v in alive}
    queue = deque(sorted(v for v in alive if closed_support[v] < 2))
    while queue:
        variable = queue.popleft()
        if variable not in alive:
            continue
        alive.discard(variable)
        for index in containing[variable]:
            if not closed[index]:
                continue
            closed[index] = False
            owner = table.supporter[index]
            if owner is not None and abs(owner) in alive:
                closed_support[abs(owner)] -= 1
                if closed_support[abs(owner)] < 2:
                    queue.append(abs(owner))

    certificate: dict[LiteralCode, tuple[ClauseIndex, ClauseIndex]] = {}
    for variable in sorted(alive):
        first, second = [i for i in supported[variable] if closed[i]][:2]
        certificate[sigma.true_literal(variable)] = (first, second)
    return SelfContainedSet(literals=frozenset(certificate), certificate=certificate)


# ============================================================================
# Expansion and Q0
# ============================================================================


@dataclass(frozen=True, slots=True)
class ExpansionResult:
    """Outcome of searching for a set Q with 1 <= |Q| <= radius and e(Q) >= 2|Q|.

    e(Q) counts clauses with at least two distinct variables in Q. In
    heuristic mode ``holds`` means no violation was found.
    """

    holds: bool
    witness: frozenset[VariableIndex] | None
    mode: ExpansionMode
    radius: int


def _dense_clauses(formula: Formula, members: set[VariableIndex]) -> int:
    return sum(1 for clause in formula.clauses if len({abs(lit) for lit in clause} & members) >= 2)


def _exhaustive_expansion(formula: Formula, radius: int) -> frozenset[VariableIndex] | None:
    variables = formula.ordered_variables
    position = {v: i for i, v in enumerate(variables)}
    masks = np.arange(1, 1 << len(variables), dtype=np.uint32)
    sizes = np.bitwise_count(masks)
    keep = sizes <= radius
    masks, sizes = masks[keep], sizes[keep].astype(np.int64)
    dense = np.zeros(len(masks), dtype=np.int64)
    for clause in formula.clauses:
        clause_mask = np.uint32(sum(1 << position[v] for v in {abs(lit) for lit in clause}))
        dense += np.bitwise_count(masks & clause_mask) >= 2
    violating = np.flatnonzero(dense >= 2 * sizes)
    if not len(violating):
        return None
    mask = int(masks[violating[0]])
    return frozenset(v for v in variables if mask >> position[v] & 1)


def _greedy_expansion(formula: Formula, radius: int) -> frozenset[VariableIndex] | None:
    members = set(formula.variables)
    while members:
        if len(members) <= radius and _dense_clauses(formula, members) >= 2 * len(members):
            return frozenset(members)
        incidence: Counter[VariableIndex] = Counter()
        for clause in formula.clauses:
            inside = {abs(lit) for lit in clause} & members
            if len(inside) >= 2:
                incidence.update(inside)
        members.discard(min(members, key=lambda v: (incidence[v], v)))
    return None


def expansion_check(formula: Formula, chi: float) -> ExpansionResult:
    """Look for a small dense variable set, radius floor(chi * n).

    Exhaustive up to 20 free variables, a greedy peeling search beyond.
    """
    radius = floor(chi * formula.n)
    if len(formula.variables) <= EXHAUSTIVE_EXPANSION_LIMIT:
        mode = ExpansionMode.EXHAUSTIVE
        witness = _exhaustive_expansion(formula, radius) if radius >= 1 else None
    else:
        mode = ExpansionMode.HEURISTIC
        witness = _greedy_expansion(formula, radius) if radius >= 1 else None
    return ExpansionResult(holds=witness is None, witness=witness, mode=mode, radius=radius)


@dataclass(frozen=True, slots=True)
class Q0Result:
    """Degree and redundancy statistics against ceil(ln n) and ceil(ln ln n)."""

    passes: bool
    max_degree: int
    degree_bound: int
    heavy_variables: frozenset[VariableIndex]
    duplicate_clauses: int
    repeated_variable_clauses: int
    redundancy_bound: int

    @property
    def redundant(self) -> int:
        return self.duplicate_clauses + self.repeated_variable_clauses


def q0_check(formula: Formula) -> Q0Result:
    """No variable in more than ceil(ln n) clauses, at most ceil(ln ln n) redundant clauses.

    Redundant clauses are repeats of an earlier clause (as a literal set)
    plus clauses that mention a variable twice.
    """
    bounds = thresholds(formula.n)
    degrees = formula.variable_degrees()
    heavy = frozenset(v for v, d in degrees.items() if d > bounds.ln_n)
    copies = Counter(frozenset(clause) for clause in formula.clauses)
    duplicates = sum(c - 1 for c in copies.values())
    repeated = sum(
        1 for clause in formula.clauses if len({abs(lit) for lit in clause}) < len(clause)
    )
    return Q0Result(
        passes=not heavy and duplicates + repeated <= bounds.ln_ln_n,
        max_degree=max(degrees.values(), default=0),
        degree_bound=bounds.ln_n,
        heavy_variables=heavy,
        duplicate_clauses=duplicates,
        repeated_variable_clauses=repeated,
        redundancy_bound=bounds.ln_ln_n,
    )


# ============================================================================
# Aggregate report
# ============================================================================


@dataclass(frozen=True, slots=True)
class VariableStructure:
    variable: VariableIndex
    support: int
    one_loose: bool
    two_loose: bool
    forced: bool
    tame: bool
    self_contained: bool
    loose: bool | None = None
    d_min: int | None = None
    rigid: bool | None = None


@dataclass(frozen=True, slots=True)
class VariableStructureReport:
    """Per-variable structure with fractions over the theta*n free variables.

    Oracle-backed fields are None when no solution set was supplied.
    """

    variables: tuple[VariableStructure, ...]
    thresholds: Thresholds
    omega: int | None

    def _fraction(self, flag: str) -> float | None:
        if not self.variables:
            return 0.0
        values = [getattr(entry, flag) for entry in self.variables]
        if any(value is None for value in values):
            return None
        return sum(bool(value) for value in values) / len(values)

    @property
    def loose_fraction(self) -> float | None:
        return self._fraction("loose")

    @property
    def two_loose_fraction(self) -> float | None:
        return self._fraction("two_loose")

    @property
    def rigid_fraction(self) -> float | None:
        return self._fraction("rigid")

    @property
    def forced_fraction(self) -> float | None:
        return self._fraction("forced")

    @property
    def self_contained_fraction(self) -> float | None:
        return self._fraction("self_contained")


def structure_report(
    formula: Formula,
    sigma: Assignment,
    solution_set: SolutionSet | None = None,
    omega: int | None = None,
) -> VariableStructureReport:
    """Run every detector and collect per-variable flags.

    ``omega`` defaults to ceil(ln n) + 1 for the rigidity flag.
    """
    bounds = thresholds(formula.n)
    omega = bounds.ln_n + 1 if omega is None else omega
    table = support_table(formula, sigma)
    loose_literals = classify_two_loose(formula, sigma)
    forced = classify_forced(formula)
    tame = classify_tame(formula)
    contained = max_self_contained(formula, sigma).variables
    distances = flip_distances(sigma, solution_set) if solution_set is not None else None
    entries = []
    for variable in formula.ordered_variables:
        d_min = distances[variable] if distances is not None else None
        entries.append(
            VariableStructure(
                variable=variable,
                support=table.counts[sigma.true_literal(variable)],
                one_loose=variable in loose_literals.one_loose,
                two_loose=variable in loose_literals.two_loose,
                forced=variable in forced,
                tame=variable in tame,
                self_contained=variable in contained,
                loose=None if distances is None else d_min is not None and d_min <= bounds.ln_n,
                d_min=d_min,
                rigid=None if distances is None else d_min is None or d_min >= omega,
            )
        )
    logger.debug("structure thresholds %s, omega %d", bounds, omega)
    return VariableStructureReport(
        variables=tuple(entries),
        thresholds=bounds,
        omega=omega if solution_set is not None else None,
    )
