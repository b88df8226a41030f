"""Construction of experiment records.

Each analysis fills its own group of fields on a record that starts out
with every measurement set to None.
"""

from __future__ import annotations

from ..lib.bp import BP_BAND, MID_BAND, BPDecimationRun, BPResult, MarginalComparison, extreme_band
from ..lib.geometry import GeometryReport
from ..lib.oracle import MarginalVector
from ..lib.structure import ExpansionResult, VariableStructureReport
from ..protocol import SCHEMA_VERSION
from ..types import ExperimentRecord, ExperimentSpec, RecordKind

OVERLAP_FRACTION = 0.49


def _fraction(count: int, total: int) -> float:
    return count / total if total else 0.0


def empty_record(
    spec: ExperimentSpec,
    repetition: int,
    config_hash: str,
    kind: RecordKind = RecordKind.DECIMATION,
    *,
    t: int | None = None,
    rho: float = 0.0,
) -> ExperimentRecord:
    """A record carrying identity fields only."""
    return ExperimentRecord(
        schema_version=SCHEMA_VERSION,
        kind=kind.value,
        model=spec.model.value,
        seed=spec.seed,
        repetition=repetition,
        config_hash=config_hash,
        instance_digest=None,
        n=spec.n,
        k=spec.k,
        m=spec.m,
        t=t,
        theta=None if t is None else 1.0 - t / spec.n,
        rho=rho,
        regime=None,
        failure=None,
        solution_count=None,
        marginal_mid_fraction=None,
        marginal_extreme_fraction=None,
        bp_band_fraction=None,
        mismatch_fraction=None,
        max_discrepancy=None,
        mean_discrepancy=None,
        zero_denominators=None,
        loose_fraction=None,
        two_loose_fraction=None,
        rigid_fraction=None,
        forced_fraction=None,
        self_contained_fraction=None,
        expansion_holds=None,
        average_distance=None,
        overlap_flag=None,
        diameter=None,
        condensed_flag=None,
        bp_decimation_failed_at=None,
    )


def failure_text(exc: BaseException) -> str:
    """``"OracleLimitError: ..."``; the type name leads so metrics can match on it."""
    return f"{type(exc).__name__}: {exc}"


def fill_marginals(record: ExperimentRecord, marginals: MarginalVector, k: int) -> None:
    width = extreme_band(k)
    values = [float(value) for value in marginals.values.values()]
    mid = sum(MID_BAND[0] <= value <= MID_BAND[1] for value in values)
    extreme = sum(value <= width or value >= 1.0 - width for value in values)
    record["solution_count"] = marginals.count
    record["marginal_mid_fraction"] = _fraction(mid, len(values))
    record["marginal_extreme_fraction"] = _fraction(extreme, len(values))


def fill_bp(record: ExperimentRecord, result: BPResult, run: BPDecimationRun) -> None:
    values = result.marginals.values()
    in_band = sum(BP_BAND[0] <= mu <= BP_BAND[1] for mu in values)
    record["bp_band_fraction"] = _fraction(in_band, len(result.marginals))
    record["zero_denominators"] = result.zero_denominators
    record["bp_decimation_failed_at"] = run.failed_at


def fill_comparison(record: ExperimentRecord, comparison: MarginalComparison) -> None:
    record["solution_count"] = comparison.exact.count
    record["marginal_mid_fraction"] = comparison.fraction(comparison.exact_mid)
    record["marginal_extreme_fraction"] = comparison.fraction(comparison.exact_extreme)
    record["bp_band_fraction"] = comparison.fraction(comparison.bp_band)
    record["mismatch_fraction"] = comparison.fraction(comparison.mismatch)
    record["max_discrepancy"] = comparison.max_discrepancy
    record["mean_discrepancy"] = comparison.mean_discrepancy
    record["zero_denominators"] = comparison.bp.zero_denominators


def fill_structure(
    record: ExperimentRecord, report: VariableStructureReport, expansion: ExpansionResult
) -> None:
    record["loose_fraction"] = report.loose_fraction
    record["two_loose_fraction"] = report.two_loose_fraction
    record["rigid_fraction"] = report.rigid_fraction
    record["forced_fraction"] = report.forced_fraction
    record["self_contained_fraction"] = report.self_contained_fraction
    record["expansion_holds"] = expansion.holds


def fill_geometry(record: ExperimentRecord, report: GeometryReport) -> None:
    """Average distance against 0.49*theta*n and the condensation flag."""
    record["solution_count"] = report.count
    record["average_distance"] = report.average_distance
    record["overlap_flag"] = report.average_distance >= OVERLAP_FRACTION * report.free_variables
    record["diameter"] = report.diameter
    record["condensed_flag"] = report.condensed
