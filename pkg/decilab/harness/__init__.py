"""Experiment harness: spec loading, runners and run metrics."""

from .metrics import RunMetrics
from .run import (
    run_bp_comparison,
    run_decimation_experiment,
    run_experiment,
    run_experiment_async,
)
from .state import RunState, load_experiment_spec, spec_from_mapping

__all__ = [
    "RunMetrics",
    "RunState",
    "load_experiment_spec",
    "run_bp_comparison",
    "run_decimation_experiment",
    "run_experiment",
    "run_experiment_async",
    "spec_from_mapping",
]
