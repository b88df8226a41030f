"""Utility functions for decilab."""

from .formatting import format_cell, format_float, format_fraction, truncate_for_log
from .validation import (
    SpecError,
    ValidationError,
    validate_int,
    validate_model_size,
    validate_probability,
    validate_schedule,
    validate_seed,
)

__all__ = [
    "SpecError",
    "ValidationError",
    "format_cell",
    "format_float",
    "format_fraction",
    "truncate_for_log",
    "validate_int",
    "validate_model_size",
    "validate_probability",
    "validate_schedule",
    "validate_seed",
]
