"""Run metrics collection and logging."""

from __future__ import annotations

from collections.abc import Iterable
import json
import logging
import os
import sys

from ..types import ExperimentRecord

logger = logging.getLogger(__name__)

_ORACLE_ABORT = "OracleLimitError"


class RunMetrics:
    """Counters for one experiment run."""

    def __init__(self) -> None:
        self.instances = 0
        self.records = 0
        self.failures = 0
        self.oracle_aborts = 0
        self.bp_failures = 0
        self.zero_denominators = 0

    def observe(self, records: Iterable[ExperimentRecord]) -> None:
        """Fold the records of one repetition into the counters."""
        self.instances += 1
        for record in records:
            self.records += 1
            failure = record["failure"]
            if failure is not None:
                self.failures += 1
                if failure.startswith(_ORACLE_ABORT):
                    self.oracle_aborts += 1
            if record["bp_decimation_failed_at"] is not None:
                self.bp_failures += 1
            self.zero_denominators += record["zero_denominators"] or 0

    def get_metrics(self) -> dict[str, int]:
        """Get current metrics as a dictionary."""
        return {
            "instances": self.instances,
            "records": self.records,
            "failures": self.failures,
            "oracle_aborts": self.oracle_aborts,
            "bp_failures": self.bp_failures,
            "zero_denominators": self.zero_denominators,
        }

    def log_summary(self) -> None:
        """Log a one-line summary, or a JSON line on stderr with DECILAB_METRICS_JSON set."""
        metrics = self.get_metrics()
        if "DECILAB_METRICS_JSON" in os.environ:
            print(json.dumps(metrics, sort_keys=True), file=sys.stderr, flush=True)
            return
        logger.info(
            "Metrics: instances=%d, records=%d, failures=%d, oracle_aborts=%d, "
            "bp_failures=%d, zero_denominators=%d",
            metrics["instances"],
            metrics["records"],
            metrics["failures"],
            metrics["oracle_aborts"],
            metrics["bp_failures"],
            metrics["zero_denominators"],
        )
