"""Belief Propagation on the factor graph and BP-guided decimation.

Messages live on edges (one per literal occurrence). ``x_to_a[e, z]`` is
the variable-to-clause message for value z, ``a_to_x[e, z]`` the
clause-to-variable message. One sweep is the synchronous operator

    a_to_x <- clause update of x_to_a
    x_to_a <- normalized leave-one-out product of a_to_x

and the marginal after omega sweeps is the normalized full product of the
clause messages computed in the last sweep. Zero denominators give 1/2 and
are counted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from math import ceil, log

import numpy as np

from .formula import Assignment, Formula, neighborhood_subformula, substitute_and_simplify
from .oracle import MarginalVector, true_marginals
from .rng import coerce_generator
from ..types import FormulaError, OracleLimits, SimplifyStatus, VariableIndex
from ..utils.validation import validate_int

logger = logging.getLogger(__name__)

LOG_SPACE_DEGREE = 64
BP_BAND = (0.49, 0.51)
MID_BAND = (0.01, 0.99)


def default_omega(n: int) -> int:
    """Convenience iteration depth max(1, ceil(ln n)).

    Examples:
        >>> default_omega(100)
        5
    """
    return max(1, ceil(log(n))) if n > 1 else 1


# ============================================================================
# Factor graph arrays
# ============================================================================


def _padded(groups: list[list[int]]) -> np.ndarray:
    width = max((len(g) for g in groups), default=0)
    matrix = np.full((len(groups), width), -1, dtype=np.int64)
    for row, group in enumerate(groups):
        matrix[row, : len(group)] = group
    return matrix


@dataclass(frozen=True, eq=False)
class EdgeGraph:
    """Edge arrays of a formula's factor graph."""

    variables: tuple[VariableIndex, ...]
    edge_clause: np.ndarray
    edge_variable: np.ndarray
    edge_sign: np.ndarray
    clause_groups: np.ndarray
    variable_groups: np.ndarray
    lookup: dict[tuple[int, VariableIndex], int]

    @property
    def edges(self) -> int:
        return len(self.edge_clause)

    @property
    def log_space(self) -> bool:
        return max(self.clause_groups.shape[1], self.variable_groups.shape[1]) > LOG_SPACE_DEGREE

    @classmethod
    def from_formula(cls, formula: Formula) -> EdgeGraph:
        variables = formula.ordered_variables
        position = {v: i for i, v in enumerate(variables)}
        clause_of: list[int] = []
        variable_of: list[int] = []
        sign_of: list[int] = []
        lookup: dict[tuple[int, VariableIndex], int] = {}
        clause_groups: list[list[int]] = [[] for _ in formula.clauses]
        variable_groups: list[list[int]] = [[] for _ in variables]
        for a, clause in enumerate(formula.clauses):
            for literal in clause:
                edge = len(clause_of)
                clause_of.append(a)
                variable_of.append(position[abs(literal)])
                sign_of.append(1 if literal > 0 else -1)
                lookup.setdefault((a, abs(literal)), edge)
                clause_groups[a].append(edge)
                variable_groups[position[abs(literal)]].append(edge)
        return cls(
            variables=variables,
            edge_clause=np.array(clause_of, dtype=np.int64),
            edge_variable=np.array(variable_of, dtype=np.int64),
            edge_sign=np.array(sign_of, dtype=np.int64),
            clause_groups=_padded(clause_groups),
            variable_groups=_padded(variable_groups),
            lookup=lookup,
        )


def _group_products(
    values: np.ndarray, groups: np.ndarray, edges: int, log_space: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Leave-one-out product per edge and full product per group."""
    rows = groups.shape[0]
    if groups.shape[1] == 0:
        return np.empty(edges), np.ones(rows)
    mask = groups >= 0
    padded = np.where(mask, values[np.where(mask, groups, 0)], 1.0)
    if log_space:
        with np.errstate(divide="ignore"):
            logs = np.log(padded)
        zero = np.zeros((rows, 1))
        prefix = np.concatenate([zero, np.cumsum(logs, axis=1)[:, :-1]], axis=1)
        suffix = np.concatenate([np.cumsum(logs[:, ::-1], axis=1)[:, ::-1][:, 1:], zero], axis=1)
        others = np.exp(prefix + suffix)
        full = np.exp(logs.sum(axis=1))
    else:
        one = np.ones((rows, 1))
        prefix = np.concatenate([one, np.cumprod(padded, axis=1)[:, :-1]], axis=1)
        suffix = np.concatenate(
            [np.cumprod(padded[:, ::-1], axis=1)[:, ::-1][:, 1:], one], axis=1
        )
        others = prefix * suffix
        full = padded.prod(axis=1)
    leave_one_out = np.empty(edges)
    leave_one_out[groups[mask]] = others[mask]
    return leave_one_out, full


def _normalize(zero: np.ndarray, one: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    total = zero + one
    degenerate = total == 0
    safe = np.where(degenerate, 1.0, total)
    p1 = np.where(degenerate, 0.5, one / safe)
    p0 = np.where(degenerate, 0.5, zero / safe)
    return p0, p1, int(degenerate.sum())


# ============================================================================
# Message state and the BP operator
# ============================================================================


@dataclass(frozen=True, eq=False)
class MessageState:
    """Messages after ``iteration`` sweeps.

    ``a_to_x`` holds the clause messages that produced ``x_to_a``; for the
    initial state they are the clause messages of the all-1/2 vector.
    """

    graph: EdgeGraph
    x_to_a: np.ndarray
    a_to_x: np.ndarray
    iteration: int = 0
    zero_denominators: int = 0


def _clause_update(graph: EdgeGraph, x_to_a: np.ndarray) -> np.ndarray:
    edges = graph.edges
    satisfying = (1 + graph.edge_sign) // 2
    violating = np.asarray(x_to_a[np.arange(edges), 1 - satisfying], dtype=float)
    others, _ = _group_products(violating, graph.clause_groups, edges, graph.log_space)
    a_to_x = np.empty((edges, 2))
    a_to_x[np.arange(edges), satisfying] = 1.0
    a_to_x[np.arange(edges), 1 - satisfying] = 1.0 - others
    return a_to_x


def _variable_update(graph: EdgeGraph, a_to_x: np.ndarray) -> tuple[np.ndarray, int]:
    edges = graph.edges
    zero, _ = _group_products(a_to_x[:, 0], graph.variable_groups, edges, graph.log_space)
    one, _ = _group_products(a_to_x[:, 1], graph.variable_groups, edges, graph.log_space)
    p0, p1, degenerate = _normalize(zero, one)
    return np.stack([p0, p1], axis=1), degenerate


def initial_state(formula: Formula) -> MessageState:
    """mu[0]: every variable-to-clause message is (1/2, 1/2)."""
    graph = EdgeGraph.from_formula(formula)
    x_to_a = np.full((graph.edges, 2), 0.5)
    return MessageState(graph=graph, x_to_a=x_to_a, a_to_x=_clause_update(graph, x_to_a))


def bp_sweep(state: MessageState) -> MessageState:
    """Apply the BP operator once: mu[l] -> mu[l+1]."""
    a_to_x = _clause_update(state.graph, state.x_to_a)
    x_to_a, degenerate = _variable_update(state.graph, a_to_x)
    if degenerate:
        logger.debug("sweep %d: %d zero denominators", state.iteration + 1, degenerate)
    return MessageState(
        graph=state.graph,
        x_to_a=x_to_a,
        a_to_x=a_to_x,
        iteration=state.iteration + 1,
        zero_denominators=state.zero_denominators + degenerate,
    )


def clause_to_var(state: MessageState, a: int, x: VariableIndex, zeta: int) -> float:
    """Message from clause ``a`` to variable ``x`` for value ``zeta``, from the current x_to_a.

    Raises:
        FormulaError: If x does not occur in clause a
    """
    edge = state.graph.lookup.get((a, x))
    if edge is None:
        raise FormulaError(f"x{x} does not occur in clause {a}")
    sign = int(state.graph.edge_sign[edge])
    if zeta == (1 + sign) // 2:
        return 1.0
    product = 1.0
    for other in state.graph.clause_groups[a]:
        if other < 0 or other == edge:
            continue
        other_sign = int(state.graph.edge_sign[other])
        product *= float(state.x_to_a[other, (1 - other_sign) // 2])
    return 1.0 - product


# ============================================================================
# Marginals
# ============================================================================


@dataclass(frozen=True, slots=True)
class BPResult:
    """BP marginals mu_x(formula, omega) for every free variable."""

    marginals: dict[VariableIndex, float]
    omega: int
    zero_denominators: int = 0

    def __getitem__(self, variable: VariableIndex) -> float:
        return self.marginals[variable]

    def bias(self, variable: VariableIndex) -> float:
        return abs(self.marginals[variable] - 0.5)

    def biased(self, delta: float) -> frozenset[VariableIndex]:
        """Variables whose marginal differs from 1/2 by more than ``delta``."""
        return frozenset(v for v, mu in self.marginals.items() if abs(mu - 0.5) > delta)


def bp_marginals(formula: Formula, omega: int) -> BPResult:
    """Run ``omega`` sweeps from the all-1/2 vector, then take marginals.

    ``omega = 0`` returns 1/2 for every variable.
    """
    validate_int("omega", omega, minimum=0)
    if omega == 0:
        return BPResult({v: 0.5 for v in formula.ordered_variables}, omega=0)
    state = initial_state(formula)
    for _ in range(omega):
        state = bp_sweep(state)
    graph = state.graph
    groups, edges, log_space = graph.variable_groups, graph.edges, graph.log_space
    _, zero = _group_products(state.a_to_x[:, 0], groups, edges, log_space)
    _, one = _group_products(state.a_to_x[:, 1], groups, edges, log_space)
    _, mu, degenerate = _normalize(zero, one)
    return BPResult(
        marginals={v: float(mu[i]) for i, v in enumerate(graph.variables)},
        omega=omega,
        zero_denominators=state.zero_denominators + degenerate,
    )


def bp_marginal(formula: Formula, x: VariableIndex, omega: int) -> float:
    """mu_x(formula, omega), computed on the radius-2*omega neighborhood of x."""
    validate_int("omega", omega, minimum=0)
    if x not in formula.variables:
        raise FormulaError(f"x{x} is not a free variable")
    if omega == 0:
        return 0.5
    return bp_marginals(neighborhood_subformula(formula, x, omega), omega)[x]


# ============================================================================
# BP-guided decimation
# ============================================================================


@dataclass(frozen=True, slots=True)
class BPDecimationStep:
    variable: VariableIndex
    marginal: float
    value: int


@dataclass(frozen=True, slots=True)
class BPDecimationRun:
    """Outcome of BP decimation.

    Exactly one of ``assignment`` and ``failed_at`` is set; ``failed_at`` is
    the variable whose substitution produced an empty clause.
    """

    assignment: Assignment | None
    failed_at: VariableIndex | None
    trace: tuple[BPDecimationStep, ...] = field(default_factory=tuple)

    @property
    def succeeded(self) -> bool:
        return self.assignment is not None


def bp_decimation(
    formula: Formula, omega: int, seed: int | np.random.Generator
) -> BPDecimationRun:
    """Assign the free variables in index order, each 1 with its BP marginal."""
    validate_int("omega", omega, minimum=0)
    rng = coerce_generator(seed)
    current = formula
    values: dict[VariableIndex, int] = {}
    trace: list[BPDecimationStep] = []
    for variable in formula.ordered_variables:
        mu = bp_marginal(current, variable, omega)
        value = 1 if rng.random() < mu else 0
        trace.append(BPDecimationStep(variable, mu, value))
        outcome = substitute_and_simplify(current, variable, value)
        if outcome.status is SimplifyStatus.UNSATISFIABLE or outcome.formula is None:
            logger.debug("BP decimation hit an empty clause at x%d", variable)
            return BPDecimationRun(assignment=None, failed_at=variable, trace=tuple(trace))
        current = outcome.formula
        values[variable] = value
    return BPDecimationRun(
        assignment=Assignment.from_mapping(values), failed_at=None, trace=tuple(trace)
    )


# ============================================================================
# Comparison against exact marginals
# ============================================================================


def extreme_band(k: int) -> float:
    """Width 2^(-k/2) of the extreme marginal band [0, w] U [1 - w, 1]."""
    return 2.0 ** (-k / 2)


def _in_band(value: float, band: tuple[float, float]) -> bool:
    return band[0] <= value <= band[1]


@dataclass(frozen=True, slots=True)
class MarginalComparison:
    """Per-variable |mu_x - M_x| and band counts."""

    bp: BPResult
    exact: MarginalVector
    discrepancy: dict[VariableIndex, float]
    bp_band: int
    exact_extreme: int
    exact_mid: int
    mismatch: int

    @property
    def variables(self) -> int:
        return len(self.discrepancy)

    @property
    def max_discrepancy(self) -> float:
        return max(self.discrepancy.values(), default=0.0)

    @property
    def mean_discrepancy(self) -> float:
        return sum(self.discrepancy.values()) / self.variables if self.variables else 0.0

    def fraction(self, count: int) -> float:
        return count / self.variables if self.variables else 0.0


def compare_marginals(
    formula: Formula, omega: int, *, limits: OracleLimits | None = None
) -> MarginalComparison:
    """BP against exact marginals.

    A mismatch is a variable whose BP marginal lies in [0.49, 0.51] while
    its exact marginal lies in the extreme band.

    Raises:
        OracleLimitError: If the formula is too large for the exact oracle
        UnsatisfiableError: If the formula has no solution
    """
    exact = true_marginals(formula, limits=limits)
    bp = bp_marginals(formula, omega)
    width = extreme_band(formula.k)
    discrepancy: dict[VariableIndex, float] = {}
    bp_band = exact_extreme = exact_mid = mismatch = 0
    for variable in formula.ordered_variables:
        mu = bp[variable]
        m_x = float(exact[variable])
        discrepancy[variable] = abs(mu - m_x)
        in_bp_band = _in_band(mu, BP_BAND)
        extreme = m_x <= width or m_x >= 1.0 - width
        bp_band += in_bp_band
        exact_extreme += extreme
        exact_mid += _in_band(m_x, MID_BAND)
        mismatch += in_bp_band and extreme
    return MarginalComparison(
        bp=bp,
        exact=exact,
        discrepancy=discrepancy,
        bp_band=bp_band,
        exact_extreme=exact_extreme,
        exact_mid=exact_mid,
        mismatch=mismatch,
    )
