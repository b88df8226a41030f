"""Formatting utilities.

This module provides helpers for log-safe strings and for the textual
forms of numbers written to reports and record files.
"""

from __future__ import annotations

from fractions import Fraction


def truncate_for_log(data: str, *, max_length: int = 200) -> str:
    """Shorten long strings (formula dumps, traces) for logging.

    Args:
        data: Text to shorten
        max_length: Maximum length kept before the ellipsis

    Returns:
        The text, cut with a length note when it is too long

    Examples:
        >>> truncate_for_log("short")
        'short'
        >>> truncate_for_log("x" * 30, max_length=10)
        'xxxxxxxxxx... (30 chars)'
    """
    if len(data) <= max_length:
        return data
    return f"{data[:max_length]}... ({len(data)} chars)"


def format_float(value: float) -> str:
    """Format a float with its shortest round-trip representation.

    Examples:
        >>> format_float(0.1)
        '0.1'
        >>> format_float(2.0)
        '2.0'
    """
    return repr(float(value))


def format_fraction(value: Fraction) -> str:
    """Format an exact marginal as ``p/q`` (or an integer).

    Examples:
        >>> format_fraction(Fraction(3, 4))
        '3/4'
        >>> format_fraction(Fraction(1))
        '1'
    """
    return str(value)


def format_cell(value: object) -> str:
    """Render one CSV cell.

    ``None`` becomes the empty string, booleans are lower-case.

    Examples:
        >>> format_cell(None)
        ''
        >>> format_cell(True)
        'true'
        >>> format_cell(0.5)
        '0.5'
        >>> format_cell("uniform")
        'uniform'
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)
