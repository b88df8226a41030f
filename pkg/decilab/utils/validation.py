"""Validation utilities.

This module provides functions for validating model parameters, seeds,
decimation schedules and experiment specs.
"""

from __future__ import annotations

from collections.abc import Sequence

MAX_SEED = 2**64


class ValidationError(ValueError):
    """Raised when validation fails."""


class SpecError(ValidationError):
    """Raised when an experiment spec is malformed."""


def validate_int(name: str, value: int, *, minimum: int = 0) -> None:
    """Validate that an integer parameter is at least ``minimum``.

    Args:
        name: Parameter name used in the error message
        value: Value to check
        minimum: Smallest allowed value

    Raises:
        ValidationError: If the value is not an int or is too small

    Examples:
        >>> validate_int("n", 5, minimum=1)
        >>> validate_int("n", 0, minimum=1)
        Traceback (most recent call last):
        ...
        decilab.utils.validation.ValidationError: n must be >= 1 (got 0)
    """
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{name} must be an integer (got {value!r})")
    if value < minimum:
        raise ValidationError(f"{name} must be >= {minimum} (got {value})")


def validate_model_size(n: int, k: int, m: int) -> None:
    """Validate (n, k, m) for a random k-CNF.

    Raises:
        ValidationError: Unless k >= 2, n >= k and m >= 0

    Examples:
        >>> validate_model_size(10, 3, 20)
        >>> validate_model_size(2, 3, 1)
        Traceback (most recent call last):
        ...
        decilab.utils.validation.ValidationError: n must be >= 3 (got 2)
    """
    validate_int("k", k, minimum=2)
    validate_int("n", n, minimum=k)
    validate_int("m", m, minimum=0)


def validate_seed(seed: int) -> None:
    """Validate a 64-bit seed.

    Examples:
        >>> validate_seed(0)
        >>> validate_seed(-1)
        Traceback (most recent call last):
        ...
        decilab.utils.validation.ValidationError: seed must be in [0, 2**64) (got -1)
    """
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < MAX_SEED:
        raise ValidationError(f"seed must be in [0, 2**64) (got {seed!r})")


def validate_probability(name: str, value: float) -> None:
    """Validate that ``value`` lies in [0, 1].

    Examples:
        >>> validate_probability("p", 0.25)
        >>> validate_probability("p", 1.5)
        Traceback (most recent call last):
        ...
        decilab.utils.validation.ValidationError: p must lie in [0, 1] (got 1.5)
    """
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1] (got {value})")


def validate_schedule(schedule: Sequence[float]) -> None:
    """Validate a decimation schedule of fractions t/n.

    Raises:
        ValidationError: If a fraction leaves [0, 1] or the schedule is unsorted

    Examples:
        >>> validate_schedule([0.0, 0.5, 0.9])
        >>> validate_schedule([0.5, 0.2])
        Traceback (most recent call last):
        ...
        decilab.utils.validation.ValidationError: schedule must be sorted ascending
    """
    for fraction in schedule:
        validate_probability("schedule fraction", fraction)
    if list(schedule) != sorted(schedule):
        raise ValidationError("schedule must be sorted ascending")
