"""Experiment spec loading and the per-run state container."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field, replace
import json
from pathlib import Path
from typing import Any

from .metrics import RunMetrics
from ..digest import config_hash
from ..types import Analysis, ExperimentSpec, Model, OracleLimits, RecordKind
from ..utils.validation import (
    SpecError,
    ValidationError,
    validate_int,
    validate_model_size,
    validate_probability,
    validate_schedule,
    validate_seed,
)

_KNOWN_KEYS = frozenset(
    {
        "model",
        "n",
        "k",
        "m",
        "r",
        "schedule",
        "omega",
        "repetitions",
        "seed",
        "analyses",
        "chi",
        "json",
        "csv",
        "workers",
    }
)


def _clause_count(data: Mapping[str, Any], n: int) -> int:
    if ("m" in data) == ("r" in data):
        raise SpecError("give exactly one of 'm' (clauses) or 'r' (density)")
    if "m" in data:
        return data["m"]
    r = data["r"]
    if not isinstance(r, (int, float)) or r < 0:
        raise SpecError(f"r must be a non-negative number (got {r!r})")
    return round(r * n)


def validate_spec(spec: ExperimentSpec) -> ExperimentSpec:
    """Check an ExperimentSpec, raising SpecError on the first problem."""
    try:
        validate_model_size(spec.n, spec.k, spec.m)
        validate_schedule(spec.schedule)
        validate_int("omega", spec.omega)
        validate_int("repetitions", spec.repetitions, minimum=1)
        validate_seed(spec.seed)
        validate_probability("chi", spec.chi)
        validate_int("workers", spec.workers, minimum=1)
    except SpecError:
        raise
    except ValidationError as exc:
        raise SpecError(str(exc)) from exc
    return spec


def spec_from_mapping(data: Mapping[str, Any]) -> ExperimentSpec:
    """Build a validated spec from parsed JSON.

    Raises:
        SpecError: On unknown keys, missing keys or invalid values
    """
    unknown = sorted(set(data) - _KNOWN_KEYS)
    if unknown:
        raise SpecError(f"unknown spec keys: {', '.join(unknown)}")
    try:
        n, k = data["n"], data["k"]
        model = Model(data.get("model", Model.UNIFORM.value))
        analyses = frozenset(Analysis(a) for a in data.get("analyses", [a.value for a in Analysis]))
        schedule = tuple(float(f) for f in data.get("schedule", ()))
    except KeyError as exc:
        raise SpecError(f"missing spec key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise SpecError(f"invalid spec value: {exc}") from exc
    if isinstance(n, bool) or not isinstance(n, int):
        raise SpecError(f"n must be an integer (got {n!r})")
    spec = ExperimentSpec(
        model=model,
        n=n,
        k=k,
        m=_clause_count(data, n),
        schedule=schedule,
        omega=data.get("omega", 1),
        repetitions=data.get("repetitions", 1),
        seed=data.get("seed", 0),
        analyses=analyses,
        chi=data.get("chi", 0.1),
        json_path=data.get("json"),
        csv_path=data.get("csv"),
        workers=data.get("workers", 1),
    )
    return validate_spec(spec)


def load_experiment_spec(path: str | Path, *, seed: int | None = None) -> ExperimentSpec:
    """Read a JSON spec file; ``seed`` overrides the file's seed.

    Raises:
        SpecError: If the file is not valid JSON or the spec is invalid
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SpecError("spec file must hold a JSON object")
    spec = spec_from_mapping(data)
    return validate_spec(replace(spec, seed=seed)) if seed is not None else spec


@dataclass
class RunState:
    """Everything shared by the repetitions of one run.

    Workers get ``spec``, ``kind``, ``digest`` and ``limits``; the metrics
    stay with the coordinating process.
    """

    spec: ExperimentSpec
    kind: RecordKind = RecordKind.DECIMATION
    limits: OracleLimits = field(default_factory=OracleLimits)
    metrics: RunMetrics = field(default_factory=RunMetrics)
    digest: str = ""

    def __post_init__(self) -> None:
        if not self.digest:
            self.digest = config_hash(self.spec)
