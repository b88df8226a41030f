"""CNF formulas, assignments and the factor graph.

Formulas are immutable. Literals are signed integers in the DIMACS style
(``+v`` is x_v, ``-v`` its negation). A formula carries its decimated prefix
``t`` and a free-variable scope, which defaults to V_t = {t+1, ..., n}.
"""

from __future__ import annotations

from bisect import bisect_left
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from functools import lru_cache
import logging

import networkx as nx

from ..types import AssignmentError, Clause, FormulaError, SimplifyStatus, VariableIndex
from ..utils.validation import validate_int

logger = logging.getLogger(__name__)

VariableNode = tuple[str, int]


@dataclass(frozen=True, slots=True)
class Assignment:
    """A truth assignment over a sorted variable tuple, bit-packed.

    Bit ``i`` of ``bits`` is the value of ``variables[i]``.
    """

    variables: tuple[VariableIndex, ...]
    bits: int

    def __post_init__(self) -> None:
        if any(a >= b for a, b in zip(self.variables, self.variables[1:], strict=False)):
            raise AssignmentError("assignment variables must be strictly increasing")
        if self.bits < 0 or self.bits >> len(self.variables):
            raise AssignmentError("assignment bits exceed its scope")

    @classmethod
    def from_mapping(cls, values: Mapping[VariableIndex, int]) -> Assignment:
        """Build an assignment from ``{variable: 0 | 1}``."""
        variables = tuple(sorted(values))
        bits = 0
        for position, variable in enumerate(variables):
            value = values[variable]
            if value not in (0, 1):
                raise AssignmentError(f"x{variable} must be 0 or 1 (got {value!r})")
            bits |= value << position
        return cls(variables, bits)

    @classmethod
    def from_bitstring(cls, text: str, *, first: VariableIndex = 1) -> Assignment:
        """Parse ``"101"`` as x_first=1, x_{first+1}=0, x_{first+2}=1.

        Examples:
            >>> Assignment.from_bitstring("101").as_dict()
            {1: 1, 2: 0, 3: 1}
        """
        if any(char not in "01" for char in text):
            raise AssignmentError(f"not a bitstring: {text!r}")
        bits = sum(1 << i for i, char in enumerate(text) if char == "1")
        return cls(tuple(range(first, first + len(text))), bits)

    @property
    def scope(self) -> frozenset[VariableIndex]:
        return frozenset(self.variables)

    def __len__(self) -> int:
        return len(self.variables)

    def _position(self, variable: VariableIndex) -> int:
        position = bisect_left(self.variables, variable)
        if position == len(self.variables) or self.variables[position] != variable:
            raise AssignmentError(f"x{variable} is outside the assignment scope")
        return position

    def value(self, variable: VariableIndex) -> int:
        """Value (0 or 1) of ``variable``."""
        return (self.bits >> self._position(variable)) & 1

    def true_literal(self, variable: VariableIndex) -> int:
        """The literal over ``variable`` that this assignment makes true."""
        return variable if self.value(variable) else -variable

    def satisfies(self, literal: int) -> bool:
        return self.value(abs(literal)) == (literal > 0)

    def as_dict(self) -> dict[VariableIndex, int]:
        return {v: (self.bits >> i) & 1 for i, v in enumerate(self.variables)}

    def restrict(self, variables: Iterable[VariableIndex]) -> Assignment:
        """Project onto a subset of the scope."""
        return Assignment.from_mapping({v: self.value(v) for v in variables})

    def to_bitstring(self) -> str:
        return "".join(str((self.bits >> i) & 1) for i in range(len(self.variables)))

    def distance(self, other: Assignment) -> int:
        """Hamming distance to an assignment over the same scope."""
        if self.variables != other.variables:
            raise AssignmentError("distance needs assignments over the same scope")
        return (self.bits ^ other.bits).bit_count()


@dataclass(frozen=True, slots=True)
class Formula:
    """A CNF over x_1..x_n after decimating the prefix x_1..x_t."""

    n: int
    k: int
    clauses: tuple[Clause, ...] = ()
    decimated: int = 0
    scope: frozenset[VariableIndex] | None = None

    def __post_init__(self) -> None:
        if self.n < 0 or self.k < 1:
            raise FormulaError(f"invalid formula shape n={self.n}, k={self.k}")
        if not 0 <= self.decimated <= self.n:
            raise FormulaError(f"decimated prefix t={self.decimated} outside [0, {self.n}]")
        scope = self.scope
        if scope is None:
            scope = frozenset(range(self.decimated + 1, self.n + 1))
        elif any(v <= self.decimated or v > self.n for v in scope):
            raise FormulaError("scope must lie within V_t")
        object.__setattr__(self, "scope", frozenset(scope))
        clauses = tuple(tuple(clause) for clause in self.clauses)
        for clause in clauses:
            if not clause:
                raise FormulaError("empty clause in formula")
            if len(clause) > self.k:
                raise FormulaError(f"clause {clause} longer than k={self.k}")
            for literal in clause:
                if literal == 0 or abs(literal) not in scope:
                    raise FormulaError(f"literal {literal} is not over a free variable")
        object.__setattr__(self, "clauses", clauses)

    @property
    def variables(self) -> frozenset[VariableIndex]:
        """The free variables."""
        assert self.scope is not None
        return self.scope

    @property
    def ordered_variables(self) -> tuple[VariableIndex, ...]:
        return tuple(sorted(self.variables))

    @property
    def m(self) -> int:
        return len(self.clauses)

    def is_satisfied_by(self, assignment: Assignment) -> bool:
        """True iff every clause has a literal that ``assignment`` makes true."""
        return all(any(assignment.satisfies(lit) for lit in clause) for clause in self.clauses)

    def variable_degrees(self) -> dict[VariableIndex, int]:
        """Number of clauses each free variable occurs in."""
        degrees = dict.fromkeys(self.ordered_variables, 0)
        for clause in self.clauses:
            for variable in {abs(lit) for lit in clause}:
                degrees[variable] += 1
        return degrees

    def occurrences(self) -> dict[VariableIndex, list[int]]:
        """Clause indices per free variable."""
        where: dict[VariableIndex, list[int]] = {v: [] for v in self.ordered_variables}
        for index, clause in enumerate(self.clauses):
            for variable in sorted({abs(lit) for lit in clause}):
                where[variable].append(index)
        return where


@dataclass(frozen=True, slots=True)
class SimplifyOutcome:
    """Result of substitute_and_simplify.

    ``formula`` is None exactly when the status is UNSATISFIABLE.
    """

    status: SimplifyStatus
    formula: Formula | None


@lru_cache(maxsize=65536)
def substitute_and_simplify(formula: Formula, var: VariableIndex, value: int) -> SimplifyOutcome:
    """Assign ``var := value``, delete satisfied clauses and drop false literals.

    Raises:
        FormulaError: If ``var`` is not a free variable of ``formula``
    """
    if var not in formula.variables:
        raise FormulaError(f"x{var} is not free (decimated prefix t={formula.decimated})")
    if value not in (0, 1):
        raise FormulaError(f"value must be 0 or 1 (got {value!r})")
    true_literal = var if value else -var
    reduced: list[Clause] = []
    for clause in formula.clauses:
        if true_literal in clause:
            continue
        if -true_literal in clause:
            shorter = tuple(lit for lit in clause if lit != -true_literal)
            if not shorter:
                logger.debug("x%d := %d empties clause %s", var, value, clause)
                return SimplifyOutcome(SimplifyStatus.UNSATISFIABLE, None)
            reduced.append(shorter)
        else:
            reduced.append(clause)
    decimated = formula.decimated + 1 if var == formula.decimated + 1 else formula.decimated
    simplified = Formula(
        n=formula.n,
        k=formula.k,
        clauses=tuple(reduced),
        decimated=decimated,
        scope=formula.variables - {var},
    )
    status = SimplifyStatus.FORMULA if reduced else SimplifyStatus.SATISFIED
    return SimplifyOutcome(status, simplified)


# ============================================================================
# Factor graph
# ============================================================================


def variable_node(variable: VariableIndex) -> VariableNode:
    return ("v", variable)


def clause_node(index: int) -> VariableNode:
    return ("c", index)


def factor_graph(formula: Formula) -> nx.MultiGraph:
    """Bipartite variable/clause graph, one edge per literal occurrence.

    Edges carry ``sign`` (+1 or -1). A clause repeating a variable gives
    parallel edges, which count as a cycle.
    """
    graph = nx.MultiGraph()
    graph.add_nodes_from(variable_node(v) for v in formula.ordered_variables)
    for index, clause in enumerate(formula.clauses):
        graph.add_node(clause_node(index))
        for literal in clause:
            graph.add_edge(
                variable_node(abs(literal)), clause_node(index), sign=1 if literal > 0 else -1
            )
    return graph


def _ball(
    formula: Formula, x: VariableIndex, radius: int
) -> tuple[nx.MultiGraph, dict[VariableNode, int]]:
    if x not in formula.variables:
        raise FormulaError(f"x{x} is not a free variable")
    graph = factor_graph(formula)
    return graph, nx.single_source_shortest_path_length(graph, variable_node(x), cutoff=radius)


def neighborhood_subformula(formula: Formula, x: VariableIndex, omega: int) -> Formula:
    """Sub-formula spanned by all vertices within distance 2*omega of x.

    Clause order is preserved. Variables at distance exactly 2*omega stay
    free, with only their clauses inside the ball.
    """
    validate_int("omega", omega, minimum=1)
    _, ball = _ball(formula, x, 2 * omega)
    kept = tuple(
        clause for index, clause in enumerate(formula.clauses) if clause_node(index) in ball
    )
    scope = frozenset(node[1] for node in ball if node[0] == "v")
    return Formula(n=formula.n, k=formula.k, clauses=kept, decimated=formula.decimated, scope=scope)


def is_tree_neighborhood(formula: Formula, x: VariableIndex, omega: int) -> bool:
    """True iff the factor graph restricted to N^omega(x) is acyclic."""
    validate_int("omega", omega, minimum=0)
    graph, ball = _ball(formula, x, 2 * omega)
    return bool(nx.is_forest(graph.subgraph(ball)))

