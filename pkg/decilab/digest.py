"""Stable SHA-256 digests for experiment configs and formula instances."""

from __future__ import annotations

from dataclasses import asdict
from enum import Enum
import json
from typing import Any

from cryptography.hazmat.primitives import hashes

from .lib.formula import Formula
from .types import ExperimentSpec

DIGEST_LENGTH = 16  # hex characters kept in records


def _canonical(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (frozenset, set)):
        return sorted(_canonical(v) for v in value)
    if isinstance(value, (tuple, list)):
        return [_canonical(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    return value


def sha256_hex(payload: bytes) -> str:
    """Hex SHA-256 of ``payload``."""

    digest = hashes.Hash(hashes.SHA256())
    digest.update(payload)
    return digest.finalize().hex()


def canonical_json(value: Any) -> bytes:
    """Sorted-key compact JSON used as hash input."""

    return json.dumps(
        _canonical(value), sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("utf-8")


def config_hash(spec: ExperimentSpec) -> str:
    """Digest of everything that determines an experiment's output.

    Output paths and the worker count do not change records and are left out.
    """

    fields = asdict(spec)
    for key in ("json_path", "csv_path", "workers"):
        fields.pop(key)
    return sha256_hex(canonical_json(fields))[:DIGEST_LENGTH]


def formula_digest(formula: Formula) -> str:
    """Digest of a formula's shape, clauses and free-variable scope."""

    payload = {
        "n": formula.n,
        "k": formula.k,
        "decimated": formula.decimated,
        "scope": formula.variables,
        "clauses": formula.clauses,
    }
    return sha256_hex(canonical_json(payload))[:DIGEST_LENGTH]
