"""Core domain kernels for decilab."""

from .bp import bp_decimation, bp_marginal, bp_marginals, bp_sweep, compare_marginals
from .dimacs import emit_dimacs, parse_dimacs, parse_sigma
from .formula import Assignment, Formula, neighborhood_subformula, substitute_and_simplify
from .generators import PlantedPair, decimate_under, generate
from .geometry import distance_profile, geometry, shatter_decomposition
from .oracle import (
    count_solutions,
    decimation_process,
    enumerate_solutions,
    true_marginals,
    uniform_solution_sample,
)
from .phase import PhasePoint, classify_regime, count_lower_bound, psi
from .structure import structure_report, support_table, thresholds

__all__ = [
    "Assignment",
    "Formula",
    "PhasePoint",
    "PlantedPair",
    "bp_decimation",
    "bp_marginal",
    "bp_marginals",
    "bp_sweep",
    "classify_regime",
    "compare_marginals",
    "count_lower_bound",
    "count_solutions",
    "decimate_under",
    "decimation_process",
    "distance_profile",
    "emit_dimacs",
    "enumerate_solutions",
    "generate",
    "geometry",
    "neighborhood_subformula",
    "parse_dimacs",
    "parse_sigma",
    "psi",
    "shatter_decomposition",
    "structure_report",
    "substitute_and_simplify",
    "support_table",
    "thresholds",
    "true_marginals",
    "uniform_solution_sample",
]
