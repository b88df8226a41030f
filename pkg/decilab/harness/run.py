"""Experiment execution.

A repetition draws one instance, fixes sigma, and walks the decimation
schedule, producing one record per decimation time. Repetitions are
independent and run on a process pool when more than one worker is asked
for; records always come back in (repetition, t) order.
"""

from __future__ import annotations

import asyncio
from collections.abc import Iterator
from concurrent.futures import ProcessPoolExecutor
from functools import partial
import logging
from math import exp

from .metrics import RunMetrics
from .records import (
    empty_record,
    failure_text,
    fill_bp,
    fill_comparison,
    fill_geometry,
    fill_marginals,
    fill_structure,
)
from .state import RunState
from ..digest import formula_digest
from ..lib.bp import bp_decimation, bp_marginals, compare_marginals
from ..lib.formula import Assignment, Formula
from ..lib.generators import PlantedPair, decimate_under, generate
from ..lib.geometry import geometry
from ..lib.oracle import SolutionSet, enumerate_solutions, true_marginals, uniform_solution_sample
from ..lib.phase import PhasePoint, classify_regime, rho_from_r
from ..lib.rng import spawn_generator
from ..lib.structure import expansion_check, structure_report
from ..types import (
    Analysis,
    DecilabError,
    ExperimentRecord,
    ExperimentSpec,
    GenConfig,
    OracleLimits,
    RecordKind,
)
from ..utils.validation import ValidationError

logger = logging.getLogger(__name__)

# Substream tags below the (seed, repetition) prefix.
_SAMPLE_STREAM = 1
_BP_DECIMATION_STREAM = 2
_GEOMETRY_STREAM = 3


def _instance(spec: ExperimentSpec, repetition: int, limits: OracleLimits) -> PlantedPair:
    """The repetition's formula with its sigma.

    U-mode draws sigma uniformly from S(formula); P-mode uses the planted one.
    """
    drawn = generate(GenConfig(spec.n, spec.k, spec.m, spec.seed, spec.model, repetition))
    if isinstance(drawn, PlantedPair):
        return drawn
    rng = spawn_generator(spec.seed, repetition, _SAMPLE_STREAM)
    return PlantedPair(drawn, uniform_solution_sample(drawn, rng, limits=limits))


def _regime(spec: ExperimentSpec, rho: float, t: int) -> str | None:
    if rho <= 0.0:
        return None
    verdict = classify_regime(PhasePoint(spec.k, rho, 1.0 - t / spec.n, n=spec.n))
    return "|".join(sorted(label.value for label in verdict.labels))


def _solutions(formula: Formula, limits: OracleLimits) -> SolutionSet | None:
    """Materialized solutions, or None past the oracle limits."""
    try:
        solutions = enumerate_solutions(formula, limits=limits)
    except DecilabError as exc:
        logger.debug("no exact solution set at t=%d: %s", formula.decimated, exc)
        return None
    return None if solutions.truncated else solutions


def _analyze(
    record: ExperimentRecord,
    spec: ExperimentSpec,
    decimated: Formula,
    sigma: Assignment,
    repetition: int,
    limits: OracleLimits,
) -> None:
    t = decimated.decimated
    if Analysis.MARGINALS in spec.analyses:
        fill_marginals(record, true_marginals(decimated, limits=limits), spec.k)
    if Analysis.BP in spec.analyses:
        rng = spawn_generator(spec.seed, repetition, _BP_DECIMATION_STREAM, t)
        fill_bp(
            record,
            bp_marginals(decimated, spec.omega),
            bp_decimation(decimated, spec.omega, rng),
        )
    solutions = None
    if Analysis.STRUCTURE in spec.analyses or Analysis.GEOMETRY in spec.analyses:
        solutions = _solutions(decimated, limits)
    if Analysis.STRUCTURE in spec.analyses:
        fill_structure(
            record,
            structure_report(decimated, sigma, solutions),
            expansion_check(decimated, spec.chi),
        )
    if Analysis.GEOMETRY in spec.analyses and solutions is not None:
        alpha = exp(2.0 - record["rho"]) / spec.k
        rng = spawn_generator(spec.seed, repetition, _GEOMETRY_STREAM, t)
        fill_geometry(record, geometry(solutions, alpha, rng=rng, limits=limits))


def _run_repetition(
    spec: ExperimentSpec,
    repetition: int,
    kind: RecordKind,
    config_hash: str,
    limits: OracleLimits,
) -> list[ExperimentRecord]:
    """All records of one repetition, in schedule order.

    Decimation runs turn domain errors into ``failure`` fields; BP comparison
    runs let them propagate.
    """
    steps = spec.steps
    if not steps:
        return []
    rho = rho_from_r(spec.k, spec.m / spec.n)
    tolerant = kind is RecordKind.DECIMATION
    try:
        pair = _instance(spec, repetition, limits)
    except (DecilabError, ValidationError) as exc:
        if not tolerant:
            raise
        logger.warning("repetition %d: instance failed: %s", repetition, exc)
        record = empty_record(spec, repetition, config_hash, kind, rho=rho)
        record["failure"] = failure_text(exc)
        return [record]

    digest = formula_digest(pair.formula)
    records: list[ExperimentRecord] = []
    for t in steps:
        record = empty_record(spec, repetition, config_hash, kind, t=t, rho=rho)
        record["instance_digest"] = digest
        try:
            decimated = decimate_under(pair, t)
            if Analysis.REGIME in spec.analyses:
                record["regime"] = _regime(spec, rho, t)
            if kind is RecordKind.BP_COMPARISON:
                fill_comparison(record, compare_marginals(decimated, spec.omega, limits=limits))
            else:
                _analyze(record, spec, decimated, pair.sigma, repetition, limits)
        except (DecilabError, ValidationError) as exc:
            if not tolerant:
                raise
            logger.warning("repetition %d, t=%d: %s", repetition, t, exc)
            record["failure"] = failure_text(exc)
        records.append(record)
    logger.info("repetition %d: %d records", repetition, len(records))
    return records


def run_decimation_experiment(
    spec: ExperimentSpec, *, limits: OracleLimits | None = None
) -> Iterator[ExperimentRecord]:
    """Records for every (repetition, t), generated lazily in order."""
    state = RunState(spec, RecordKind.DECIMATION, limits or OracleLimits())
    for repetition in range(spec.repetitions):
        yield from _run_repetition(spec, repetition, state.kind, state.digest, state.limits)


def run_bp_comparison(
    spec: ExperimentSpec, *, limits: OracleLimits | None = None
) -> Iterator[ExperimentRecord]:
    """Per-t BP against exact marginals; oracle errors propagate.

    Raises:
        OracleLimitError: If an instance is too large for the exact oracle
    """
    state = RunState(spec, RecordKind.BP_COMPARISON, limits or OracleLimits())
    for repetition in range(spec.repetitions):
        yield from _run_repetition(spec, repetition, state.kind, state.digest, state.limits)


async def run_experiment_async(state: RunState) -> list[ExperimentRecord]:
    """Run every repetition, on a process pool when ``spec.workers > 1``.

    Args:
        state: Spec, record kind, limits and the metrics to update

    Returns:
        All records, ordered by (repetition, t)
    """
    spec = state.spec
    job = partial(_run_repetition, spec, kind=state.kind, config_hash=state.digest)
    logger.info(
        "experiment %s: %s model, %d repetitions, %d workers",
        state.digest,
        spec.model.value,
        spec.repetitions,
        spec.workers,
    )
    if spec.workers > 1:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            batches = await asyncio.gather(
                *(
                    loop.run_in_executor(pool, partial(job, rep, limits=state.limits))
                    for rep in range(spec.repetitions)
                )
            )
    else:
        batches = []
        for repetition in range(spec.repetitions):
            batches.append(job(repetition, limits=state.limits))
            await asyncio.sleep(0)
    records: list[ExperimentRecord] = []
    for batch in batches:
        state.metrics.observe(batch)
        records.extend(batch)
    return records


def run_experiment(
    spec: ExperimentSpec,
    kind: RecordKind = RecordKind.DECIMATION,
    *,
    limits: OracleLimits | None = None,
    metrics: RunMetrics | None = None,
) -> list[ExperimentRecord]:
    """Synchronous entry point around :func:`run_experiment_async`."""
    state = RunState(spec, kind, limits or OracleLimits(), metrics or RunMetrics())
    records = asyncio.run(run_experiment_async(state))
    state.metrics.log_summary()
    return records


__all__ = [
    "run_bp_comparison",
    "run_decimation_experiment",
    "run_experiment",
    "run_experiment_async",
]
