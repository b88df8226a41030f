"""Versioned record codec for experiment output (JSON lines and CSV)."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
import csv
import json
from pathlib import Path
from typing import Any, cast

from .types import ExperimentRecord, OutputFormat, RecordError
from .utils.formatting import format_cell

SCHEMA_VERSION = 1
RECORD_FIELDS: tuple[str, ...] = tuple(ExperimentRecord.__annotations__)


def _ordered(record: Mapping[str, Any]) -> dict[str, Any]:
    missing = [name for name in RECORD_FIELDS if name not in record]
    extra = sorted(set(record) - set(RECORD_FIELDS))
    if missing or extra:
        raise RecordError(f"record fields do not match the schema: missing={missing} extra={extra}")
    return {name: record[name] for name in RECORD_FIELDS}


def encode_record(record: Mapping[str, Any]) -> str:
    """Serialize one record as a compact JSON line in schema field order."""

    try:
        return json.dumps(
            _ordered(record), separators=(",", ":"), ensure_ascii=True, allow_nan=False
        )
    except (TypeError, ValueError) as exc:
        raise RecordError(f"record is not serializable: {exc}") from exc


def decode_record(line: str) -> ExperimentRecord:
    """Parse one JSON line back into a record."""

    try:
        parsed = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordError("received malformed JSON record") from exc
    if not isinstance(parsed, dict):
        raise RecordError("a record must be a JSON object")
    record = _ordered(parsed)
    if record["schema_version"] != SCHEMA_VERSION:
        raise RecordError(f"unsupported schema version {record['schema_version']!r}")
    return cast(ExperimentRecord, record)


def write_json_lines(records: Iterable[Mapping[str, Any]], path: str | Path) -> int:
    """Write records one per line; returns the number written."""

    count = 0
    with Path(path).open("w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(encode_record(record) + "\n")
            count += 1
    return count


def read_json_lines(path: str | Path) -> list[ExperimentRecord]:
    with Path(path).open(encoding="utf-8") as handle:
        return [decode_record(line) for line in handle if line.strip()]


def write_csv(
    rows: Iterable[Mapping[str, Any]],
    path: str | Path,
    *,
    fields: Sequence[str] = RECORD_FIELDS,
) -> int:
    """Write rows as CSV with a header; column order is ``fields``."""

    count = 0
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([format_cell(row[name]) for name in fields])
            count += 1
    return count


def emit(
    records: Sequence[Mapping[str, Any]], output_format: OutputFormat, path: str | Path
) -> int:
    """Write ``records`` in the requested format."""

    if output_format is OutputFormat.JSON_LINES:
        return write_json_lines(records, path)
    return write_csv(records, path)
