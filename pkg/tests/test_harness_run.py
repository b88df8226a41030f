"""Tests for harness.run module."""

from dataclasses import replace

import pytest

from decilab.harness.metrics import RunMetrics
from decilab.harness.run import (
    run_bp_comparison,
    run_decimation_experiment,
    run_experiment,
    run_experiment_async,
)
from decilab.harness.state import RunState
from decilab.lib.phase import rho_from_r
from decilab.protocol import RECORD_FIELDS, encode_record
from decilab.types import (
    Analysis,
    ExperimentSpec,
    Model,
    OracleLimitError,
    OracleLimits,
    RecordKind,
)


@pytest.fixture
def planted_spec():
    """A small planted experiment with every analysis."""
    return ExperimentSpec(
        model=Model.PLANTED,
        n=10,
        k=3,
        m=40,
        schedule=(0.0, 0.5),
        omega=2,
        repetitions=2,
        seed=11,
    )


@pytest.fixture
def uniform_spec():
    """A sparse uniform experiment; five 3-clauses are always satisfiable."""
    return ExperimentSpec(
        model=Model.UNIFORM,
        n=10,
        k=3,
        m=5,
        schedule=(0.0, 0.3, 1.0),
        repetitions=2,
        seed=3,
        analyses=frozenset({Analysis.MARGINALS, Analysis.STRUCTURE, Analysis.REGIME}),
    )


class TestDecimationExperiment:
    """Test the decimation harness."""

    def test_order_and_identity(self, planted_spec):
        """Test records come out per (repetition, t) with identity fields."""
        records = list(run_decimation_experiment(planted_spec))
        assert [(r["repetition"], r["t"]) for r in records] == [(0, 0), (0, 5), (1, 0), (1, 5)]
        for record in records:
            assert list(record) == list(RECORD_FIELDS)
            assert record["kind"] == "decimation"
            assert record["model"] == "planted"
            assert record["failure"] is None
            assert record["theta"] == pytest.approx(1 - record["t"] / 10)
            assert record["rho"] == pytest.approx(rho_from_r(3, 4.0))
            assert record["solution_count"] >= 1
            assert record["two_loose_fraction"] is not None
            assert record["average_distance"] is not None
            assert record["regime"]

    def test_instance_digest(self, planted_spec):
        """Test one instance per repetition, shared across its schedule."""
        records = list(run_decimation_experiment(planted_spec))
        assert records[0]["instance_digest"] == records[1]["instance_digest"]
        assert records[0]["instance_digest"] != records[2]["instance_digest"]

    def test_chi_sets_expansion_radius(self, planted_spec):
        """Test chi reaches the expansion check: the whole formula is dense at radius n."""
        wide = list(run_decimation_experiment(replace(planted_spec, chi=1.0)))
        assert wide[0]["t"] == 0
        assert wide[0]["expansion_holds"] is False
        narrow = list(run_decimation_experiment(replace(planted_spec, chi=0.0)))
        assert all(record["expansion_holds"] is True for record in narrow)

    def test_uniform_model(self, uniform_spec):
        """Test U-mode records carry the uniform tag and sampled sigma analyses."""
        records = list(run_decimation_experiment(uniform_spec))
        assert len(records) == 6
        assert {r["model"] for r in records} == {"uniform"}
        assert all(r["failure"] is None for r in records)
        assert all(r["rigid_fraction"] is not None for r in records)
        assert all(r["bp_band_fraction"] is None for r in records)
        fully_decimated = [r for r in records if r["t"] == 10]
        assert all(r["solution_count"] == 1 for r in fully_decimated)

    def test_empty_schedule(self, planted_spec):
        """Test an empty schedule yields no records."""
        assert list(run_decimation_experiment(replace(planted_spec, schedule=()))) == []

    def test_oracle_limit_recorded(self, planted_spec):
        """Test oracle aborts become failure fields in decimation runs."""
        spec = replace(planted_spec, analyses=frozenset({Analysis.MARGINALS}), repetitions=1)
        records = list(run_decimation_experiment(spec, limits=OracleLimits(max_free_vars=6)))
        assert records[0]["failure"].startswith("OracleLimitError")
        assert records[0]["solution_count"] is None
        assert records[1]["failure"] is None

    def test_instance_failure(self, uniform_spec):
        """Test a failed U-mode draw gives a single record without t."""
        records = list(
            run_decimation_experiment(
                replace(uniform_spec, repetitions=1), limits=OracleLimits(max_free_vars=4)
            )
        )
        assert len(records) == 1
        assert records[0]["t"] is None
        assert records[0]["theta"] is None
        assert records[0]["failure"].startswith("OracleLimitError")


class TestBPComparison:
    """Test the BP comparison harness."""

    def test_fields(self, planted_spec):
        """Test comparison records carry discrepancy fields."""
        records = list(run_bp_comparison(planted_spec))
        assert len(records) == 4
        for record in records:
            assert record["kind"] == "bp-comparison"
            assert 0.0 <= record["mean_discrepancy"] <= record["max_discrepancy"] <= 1.0
            assert 0.0 <= record["mismatch_fraction"] <= 1.0
            assert record["loose_fraction"] is None

    def test_oracle_limit_propagates(self, planted_spec):
        """Test oracle aborts are raised, not recorded."""
        with pytest.raises(OracleLimitError):
            list(run_bp_comparison(planted_spec, limits=OracleLimits(max_free_vars=6)))


class TestRunExperiment:
    """Test the pooled runner."""

    def test_reproducible(self, planted_spec):
        """Test equal specs give byte-identical output."""
        first = [encode_record(r) for r in run_experiment(planted_spec)]
        second = [encode_record(r) for r in run_experiment(planted_spec)]
        assert first == second

    def test_workers_do_not_change_records(self, planted_spec):
        """Test a process pool reproduces the sequential output."""
        sequential = [encode_record(r) for r in run_experiment(planted_spec)]
        pooled = [encode_record(r) for r in run_experiment(replace(planted_spec, workers=2))]
        assert pooled == sequential

    def test_seed_changes_records(self, planted_spec):
        """Test a different seed draws different instances."""
        first = run_experiment(planted_spec)
        second = run_experiment(replace(planted_spec, seed=12))
        assert first[0]["instance_digest"] != second[0]["instance_digest"]

    def test_metrics(self, planted_spec):
        """Test the caller's metrics see every repetition."""
        metrics = RunMetrics()
        records = run_experiment(planted_spec, RecordKind.DECIMATION, metrics=metrics)
        assert metrics.get_metrics()["instances"] == 2
        assert metrics.get_metrics()["records"] == len(records)

    @pytest.mark.asyncio
    async def test_async(self, planted_spec):
        """Test the async runner inside a running loop."""
        state = RunState(planted_spec, RecordKind.BP_COMPARISON)
        records = await run_experiment_async(state)
        assert [r["kind"] for r in records] == ["bp-comparison"] * 4
        assert state.metrics.get_metrics()["instances"] == 2
