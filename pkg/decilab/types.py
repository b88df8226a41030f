"""Type definitions for decilab.

This module contains the shared enums, exceptions, record payloads,
configuration dataclasses and type aliases used across the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
import os
from typing import TypedDict

# ============================================================================
# Exceptions
# ============================================================================


class DecilabError(Exception):
    """Base class for domain errors raised by decilab."""


class FormulaError(DecilabError):
    """Raised when a formula operation violates its contract."""


class DimacsError(FormulaError):
    """Raised when DIMACS text cannot be parsed."""


class AssignmentError(DecilabError):
    """Raised when an assignment does not fit the formula it is used with."""


class UnsatisfiableError(DecilabError):
    """Raised when an operation needs at least one satisfying assignment."""


class OracleLimitError(DecilabError):
    """Raised when exact enumeration would exceed the configured limits."""


class RecordError(DecilabError):
    """Raised when an emitted record cannot be decoded."""


# ============================================================================
# Enums
# ============================================================================


class Model(str, Enum):
    """Random formula ensembles."""

    UNIFORM = "uniform"
    PLANTED = "planted"
    PLANTED_BINOMIAL = "planted-binomial"


class SimplifyStatus(str, Enum):
    """Outcome of substituting a value into a formula."""

    FORMULA = "formula"
    UNSATISFIABLE = "unsatisfiable"
    SATISFIED = "satisfied"


class Regime(str, Enum):
    """Phase labels over (k, rho, theta)."""

    SYMMETRIC = "symmetric"
    SHATTERED = "shattered"
    CONDENSED = "condensed"
    FORCED = "forced"
    BP_MISMATCH = "bp-mismatch"
    UNCLASSIFIED = "unclassified"


class Analysis(str, Enum):
    """Analyses an experiment can request per decimation step."""

    MARGINALS = "marginals"
    BP = "bp"
    STRUCTURE = "structure"
    GEOMETRY = "geometry"
    REGIME = "regime"


class RecordKind(str, Enum):
    """Kinds of experiment records."""

    DECIMATION = "decimation"
    BP_COMPARISON = "bp-comparison"


class OutputFormat(str, Enum):
    """Supported record formats."""

    JSON_LINES = "json-lines"
    CSV = "csv"


class ExpansionMode(str, Enum):
    """How an expansion check was carried out."""

    EXHAUSTIVE = "exhaustive"
    HEURISTIC = "heuristic"


# ============================================================================
# TypedDicts for emitted records
# ============================================================================


class ExperimentRecord(TypedDict):
    """One row of experiment output, keyed per (repetition, t)."""

    schema_version: int
    kind: str
    model: str
    seed: int
    repetition: int
    config_hash: str
    instance_digest: str | None
    n: int
    k: int
    m: int
    t: int | None
    theta: float | None
    rho: float
    regime: str | None
    failure: str | None
    solution_count: int | None
    marginal_mid_fraction: float | None
    marginal_extreme_fraction: float | None
    bp_band_fraction: float | None
    mismatch_fraction: float | None
    max_discrepancy: float | None
    mean_discrepancy: float | None
    zero_denominators: int | None
    loose_fraction: float | None
    two_loose_fraction: float | None
    rigid_fraction: float | None
    forced_fraction: float | None
    self_contained_fraction: float | None
    expansion_holds: bool | None
    average_distance: float | None
    overlap_flag: bool | None
    diameter: int | None
    condensed_flag: bool | None
    bp_decimation_failed_at: int | None


# ============================================================================
# Dataclasses
# ============================================================================


@dataclass(frozen=True, slots=True)
class GenConfig:
    """Parameters of one random formula draw."""

    n: int
    k: int
    m: int
    seed: int
    model: Model = Model.UNIFORM
    stream: int = 0


@dataclass(frozen=True, slots=True)
class OracleLimits:
    """Caps on exact enumeration."""

    max_free_vars: int = 30
    max_solutions: int = 10**6

    @classmethod
    def from_env(cls) -> OracleLimits:
        """Build limits from DECILAB_MAX_FREE_VARS / DECILAB_MAX_SOLUTIONS."""
        defaults = cls()
        return cls(
            max_free_vars=int(os.getenv("DECILAB_MAX_FREE_VARS", defaults.max_free_vars)),
            max_solutions=int(os.getenv("DECILAB_MAX_SOLUTIONS", defaults.max_solutions)),
        )


@dataclass(frozen=True, slots=True)
class PhaseConstants:
    """Asymptotic constants left abstract by the theory.

    The defaults are working values, not derived ones.
    """

    k0: int = 20
    rho0: float = 3.0
    c0: float = 2.0
    c: float = 0.01


@dataclass(frozen=True, slots=True)
class ExperimentSpec:
    """A reproducible experiment: ensemble, decimation schedule and analyses."""

    model: Model
    n: int
    k: int
    m: int
    schedule: tuple[float, ...]
    omega: int = 1
    repetitions: int = 1
    seed: int = 0
    analyses: frozenset[Analysis] = field(default_factory=lambda: frozenset(Analysis))
    chi: float = 0.1
    json_path: str | None = None
    csv_path: str | None = None
    workers: int = 1

    @property
    def steps(self) -> tuple[int, ...]:
        """Decimation times t = round(fraction * n), in schedule order."""
        return tuple(round(fraction * self.n) for fraction in self.schedule)


# ============================================================================
# Type Aliases
# ============================================================================

VariableIndex = int
LiteralCode = int  # +v for x_v, -v for its negation
Clause = tuple[LiteralCode, ...]
ClauseIndex = int
Seed = int
